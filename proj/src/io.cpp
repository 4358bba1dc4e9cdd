#include "ide/io.hpp"

#include <filesystem>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace ide {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

namespace {

pt::ptree read_tree(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("file not found: " + path);
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  return tree;
}

std::string resolve_path(const std::string& base_file, const std::string& rel) {
  fs::path p(rel);
  if (p.is_absolute()) return p.string();
  return (fs::path(base_file).parent_path() / p).string();
}

template <class T>
T need(const pt::ptree& t, const std::string& key) {
  auto v = t.get_optional<std::string>(key);
  if (!v) throw ConfigError("missing key '" + key + "'");
  try {
    return t.get<T>(key);
  } catch (const pt::ptree_error&) {
    throw ConfigError("bad value for '" + key + "': " + *v);
  }
}

template <class T>
T get_or(const pt::ptree& t, const std::string& key, T fallback) {
  if (!t.get_optional<std::string>(key)) return fallback;
  return need<T>(t, key);
}

double positive(double v, const std::string& key) {
  if (!(v > 0.0)) throw ConfigError("'" + key + "' must be positive");
  return v;
}

const pt::ptree& section(const pt::ptree& t, const std::string& name) {
  static const pt::ptree empty;
  auto s = t.get_child_optional(name);
  return s ? *s : empty;
}

// Child sections named prefix.N, in order of N.
std::vector<std::pair<std::string, const pt::ptree*>> numbered(const pt::ptree& t, const std::string& prefix) {
  std::vector<std::pair<int, std::pair<std::string, const pt::ptree*>>> found;
  for (const auto& [key, child] : t) {
    if (key.rfind(prefix + ".", 0) != 0) continue;
    try {
      found.push_back({std::stoi(key.substr(prefix.size() + 1)), {key, &child}});
    } catch (const std::exception&) {
      throw ConfigError("bad section name [" + key + "]");
    }
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<std::string, const pt::ptree*>> out;
  for (auto& f : found) out.push_back(f.second);
  return out;
}

OperatorKernel::Term read_term(const pt::ptree& t, int dim) {
  std::string family = need<std::string>(t, "family");
  std::vector<double> params = parse_list(get_or<std::string>(t, "params", ""));
  Mat m = parse_matrix(get_or<std::string>(t, "matrix", "identity"), dim);
  return {make_profile(family, params), m};
}

}  // namespace

std::vector<double> parse_list(const std::string& text) {
  std::string s = text;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::stringstream ss(s);
  std::vector<double> out;
  std::string tok;
  while (ss >> tok) {
    try {
      size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + tok + "'");
    }
  }
  return out;
}

Mat parse_matrix(const std::string& text, int dim) {
  std::string s = text;
  s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
  if (s.rfind("identity", 0) == 0) {
    if (dim < 1) throw ConfigError("identity needs a known dimension");
    double scale = 1.0;
    if (s.size() > 8) {
      if (s[8] != '*') throw ConfigError("bad matrix '" + text + "'");
      auto v = parse_list(s.substr(9));
      if (v.size() != 1) throw ConfigError("bad identity scale in '" + text + "'");
      scale = v[0];
    }
    return scale * Mat::Identity(dim, dim);
  }
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) {
    auto v = parse_list(row);
    if (v.empty()) continue;
    if (!rows.empty() && v.size() != rows.front().size()) throw ConfigError("ragged matrix '" + text + "'");
    rows.push_back(std::move(v));
  }
  if (rows.empty()) throw ConfigError("empty matrix");
  Mat m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  if (dim > 0 && (m.rows() != dim || m.cols() != dim)) throw ConfigError("matrix '" + text + "' is not " + std::to_string(dim) + "x" + std::to_string(dim));
  return m;
}

OperatorKernel load_kernel(const std::string& path) {
  pt::ptree t = read_tree(path);
  int dim = need<int>(t, "dim");
  if (dim < 1) throw ConfigError("dim must be positive");
  double mu = get_or<double>(t, "mu", 0.0);
  if (mu < 0.0) throw ConfigError("mu must be >= 0");

  if (auto samples = t.get_optional<std::string>("samples")) {
    WeightedSignal s = read_csv(resolve_path(path, *samples), 1.0);
    if (s.dim() != dim * dim) throw ConfigError("sample columns must hold dim*dim entries");
    std::vector<Mat> mats;
    for (int j = 0; j < s.size(); ++j) {
      Mat m(dim, dim);
      for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) m(r, c) = s.values()(j, r * dim + c);
      mats.push_back(m);
    }
    return OperatorKernel::sampled(s.grid(), std::move(mats), mu);
  }
  std::vector<OperatorKernel::Term> terms;
  if (t.get_optional<std::string>("family")) terms.push_back(read_term(t, dim));
  for (const auto& [name, child] : numbered(t, "term")) terms.push_back(read_term(*child, dim));
  if (terms.empty()) return OperatorKernel::zero(dim);
  try {
    return OperatorKernel::from_terms(std::move(terms), mu);
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
}

MaterialLaw load_material(const std::string& path) {
  pt::ptree t = read_tree(path);
  const pt::ptree& law_sec = section(t, "law");
  std::vector<std::pair<std::string, int>> fields;
  std::stringstream ss(need<std::string>(law_sec, "fields"));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (item.empty()) continue;
    auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("field '" + item + "' needs name:size");
    int d = 0;
    try {
      d = std::stoi(item.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad field size in '" + item + "'");
    }
    fields.emplace_back(item.substr(0, colon), d);
  }
  double radius = get_or<double>(law_sec, "radius", std::numeric_limits<double>::infinity());
  MaterialLaw law;
  try {
    law = MaterialLaw(fields, radius);
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }

  for (const auto& [name, child] : numbered(t, "block")) {
    const pt::ptree& b = *child;
    int row = law.field_index(need<std::string>(b, "row"));
    int col = law.field_index(need<std::string>(b, "col"));
    auto kind = parse_block_kind(need<std::string>(b, "kind"));
    BlockTerm term;
    if (kind == BlockTerm::Kind::constant || kind == BlockTerm::Kind::static_z) {
      std::string text = need<std::string>(b, "matrix");
      Mat m = row == col ? parse_matrix(text, law.field_dim(row)) : parse_matrix(text, -1);
      term = kind == BlockTerm::Kind::constant ? BlockTerm::constant(m) : BlockTerm::z_linear(m);
    } else {
      OperatorKernel k = load_kernel(resolve_path(path, need<std::string>(b, "kernel")));
      switch (kind) {
        case BlockTerm::Kind::hyp0: term = BlockTerm::hyp0(k); break;
        case BlockTerm::Kind::hyp1: term = BlockTerm::hyp1(k); break;
        case BlockTerm::Kind::par2: term = BlockTerm::par2(k); break;
        default: term = BlockTerm::par3(k); break;
      }
      auto l = b.get_optional<std::string>("left");
      auto r = b.get_optional<std::string>("right");
      if (l || r) {
        if (!l || !r) throw ConfigError("[" + name + "] needs both left and right");
        term.sandwich(parse_matrix(*l, -1), parse_matrix(*r, -1));
      }
    }
    try {
      law.add(row, col, std::move(term));
    } catch (const DimensionMismatch& e) {
      throw ConfigError("[" + name + "]: " + e.what());
    }
  }
  return law;
}

Tolerances read_tolerances(const pt::ptree& t) {
  const pt::ptree& s = section(t, "tolerances");
  Tolerances tol;
  tol.algebraic = positive(get_or<double>(s, "algebraic", tol.algebraic), "algebraic");
  tol.quadrature = positive(get_or<double>(s, "quadrature", tol.quadrature), "quadrature");
  tol.lipschitz = positive(get_or<double>(s, "lipschitz", tol.lipschitz), "lipschitz");
  return tol;
}

Tolerances load_tolerances(const std::string& path) { return read_tolerances(read_tree(path)); }

ProblemSpec load_problem(const std::string& path, const Overrides& o) {
  pt::ptree t = read_tree(path);
  const pt::ptree& prob = section(t, "problem");
  MaterialLaw law = load_material(resolve_path(path, need<std::string>(prob, "material")));
  const int m = law.dim();
  double nu = positive(o.nu.value_or(need<double>(prob, "nu")), "nu");
  double dt = positive(o.dt.value_or(need<double>(prob, "dt")), "dt");
  double tmax = positive(o.tmax.value_or(need<double>(prob, "tmax")), "tmax");
  double t0 = get_or<double>(prob, "t0", 0.0);
  TimeGrid grid = TimeGrid::covering(t0, tmax, dt);

  const pt::ptree& op = section(t, "operator");
  std::string type = get_or<std::string>(op, "type", "zero");
  BlockOperator::Layout layout = law.fields();
  BlockOperator a;
  try {
    if (type == "zero") {
      a = BlockOperator::zero(layout);
    } else if (type == "matrix") {
      std::string st = get_or<std::string>(op, "structure", "skew");
      auto structure = st == "skew" ? BlockOperator::Structure::skew
                       : st == "symmetric_positive" ? BlockOperator::Structure::symmetric_positive
                       : st == "general" ? BlockOperator::Structure::general
                                         : throw ConfigError("unknown structure '" + st + "'");
      a = BlockOperator(parse_matrix(need<std::string>(op, "matrix"), m), structure, layout);
    } else if (type == "gradient") {
      int cells = o.cells.value_or(need<int>(op, "cells"));
      double length = get_or<double>(op, "length", 1.0);
      auto g = build_grad_dirichlet_1d(cells, length / cells);
      std::string conv = get_or<std::string>(op, "convention", "gradient_adjoint");
      auto c = conv == "gradient_adjoint" ? SkewConvention::gradient_adjoint
               : conv == "divergence_gradient" ? SkewConvention::divergence_gradient
                                               : throw ConfigError("unknown convention '" + conv + "'");
      a = assemble_block_skew(g.grad, layout, c);
    } else {
      throw ConfigError("unknown operator type '" + type + "'");
    }
  } catch (const StructureError& e) {
    throw ConfigError(std::string("[operator]: ") + e.what());
  } catch (const DimensionMismatch& e) {
    throw ConfigError(std::string("[operator]: ") + e.what());
  }

  const pt::ptree& src = section(t, "source");
  std::string stype = get_or<std::string>(src, "type", "zero");
  WeightedSignal f(grid, m, nu);
  if (stype == "constant") {
    auto v = parse_list(need<std::string>(src, "values"));
    if (static_cast<int>(v.size()) != m) throw ConfigError("source values need one entry per component");
    double t_end = get_or<double>(src, "t_end", std::numeric_limits<double>::infinity());
    Vec x = Eigen::Map<Vec>(v.data(), m);
    for (int j = 0; j < grid.n; ++j)
      if (grid.t(j) >= 0.0 && grid.t(j) < t_end) f.set(j, x);
  } else if (stype == "pulse") {
    Pulse p{get_or<double>(src, "amplitude", 1.0), get_or<double>(src, "center", 0.5),
            positive(get_or<double>(src, "width", 0.1), "width")};
    auto comps = parse_list(get_or<std::string>(src, "components", "0"));
    for (double c : comps)
      if (c < 0 || c >= m || c != std::floor(c)) throw ConfigError("bad source component");
    for (int j = 0; j < grid.n; ++j)
      for (double c : comps) f.values()(j, static_cast<int>(c)) = p.value(grid.t(j));
  } else if (stype == "csv") {
    WeightedSignal s = read_csv(resolve_path(path, need<std::string>(src, "file")), nu);
    if (s.dim() != m) throw ConfigError("source CSV has the wrong number of columns");
    f = s;
  } else if (stype != "zero") {
    throw ConfigError("unknown source type '" + stype + "'");
  }

  ProblemSpec spec{std::move(law), std::move(a), std::nullopt, std::move(f), nu, std::nullopt, read_tolerances(t)};

  if (auto init = t.get_child_optional("initial")) {
    auto v = parse_list(need<std::string>(*init, "x0"));
    if (static_cast<int>(v.size()) != m) throw ConfigError("x0 needs one entry per component");
    spec.x0 = Eigen::Map<Vec>(v.data(), m);
  }
  if (auto mono = t.get_child_optional("monotone")) {
    std::string key = need<std::string>(*mono, "relation");
    std::vector<int> comps;
    for (double c : parse_list(need<std::string>(*mono, "components"))) {
      if (c < 0 || c >= m || c != std::floor(c)) throw ConfigError("bad monotone component");
      comps.push_back(static_cast<int>(c));
    }
    std::map<std::string, double> params;
    for (const auto& [k, v] : *mono)
      if (k != "relation" && k != "components") params[k] = need<double>(*mono, k);
    spec.mono = MonotonePart{make_relation(key, static_cast<int>(comps.size()), params), comps};
  }
  return spec;
}

namespace {

void read_grid(const pt::ptree& t, int& cells, double& length, double& nu, double& dt, double& tmax) {
  const pt::ptree& g = section(t, "grid");
  cells = get_or<int>(g, "cells", cells);
  length = get_or<double>(g, "length", length);
  nu = get_or<double>(g, "nu", nu);
  dt = get_or<double>(g, "dt", dt);
  tmax = get_or<double>(g, "tmax", tmax);
}

void read_pulse(const pt::ptree& t, Pulse& p) {
  const pt::ptree& s = section(t, "source");
  p.amplitude = get_or<double>(s, "amplitude", p.amplitude);
  p.center = get_or<double>(s, "center", p.center);
  p.width = positive(get_or<double>(s, "width", p.width), "width");
}

template <class C>
void apply_grid_overrides(C& c, const Overrides& o) {
  if (o.cells) c.cells = *o.cells;
  if (o.nu) c.nu = *o.nu;
  if (o.dt) c.dt = *o.dt;
  if (o.tmax) c.tmax = *o.tmax;
  if (o.r1) c.nu = 1.0 / (2.0 * *o.r1);
}

}  // namespace

void apply_overrides(ViscoConfig& c, const Overrides& o) { apply_grid_overrides(c, o); }
void apply_overrides(PhaseConfig& c, const Overrides& o) { apply_grid_overrides(c, o); }

ViscoConfig load_visco_config(const std::string& path, const Overrides& o) {
  pt::ptree t = read_tree(path);
  ViscoConfig c;
  read_grid(t, c.cells, c.length, c.nu, c.dt, c.tmax);
  const pt::ptree& m = section(t, "material");
  c.rho0 = get_or<double>(m, "rho0", c.rho0);
  c.rho1 = get_or<double>(m, "rho1", c.rho1);
  c.c0 = get_or<double>(m, "c0", c.c0);
  c.c1 = get_or<double>(m, "c1", c.c1);
  const pt::ptree& k = section(t, "kernel");
  c.kernel_decay = get_or<double>(k, "decay", c.kernel_decay);
  c.kernel_beta = get_or<double>(k, "beta", c.kernel_beta);
  read_pulse(t, c.source);
  apply_overrides(c, o);
  return c;
}

PhaseConfig load_phase_config(const std::string& path, const Overrides& o) {
  pt::ptree t = read_tree(path);
  PhaseConfig c;
  read_grid(t, c.cells, c.length, c.nu, c.dt, c.tmax);
  const pt::ptree& m = section(t, "material");
  c.alpha = get_or<double>(m, "alpha", c.alpha);
  c.lambda = get_or<double>(m, "lambda", c.lambda);
  const pt::ptree& k = section(t, "kernels");
  c.c_decay = get_or<double>(k, "c_decay", c.c_decay);
  c.c_beta = get_or<double>(k, "c_beta", c.c_beta);
  c.d_decay = get_or<double>(k, "d_decay", c.d_decay);
  c.d_beta = get_or<double>(k, "d_beta", c.d_beta);
  c.k_decay = get_or<double>(k, "k_decay", c.k_decay);
  c.k_beta = get_or<double>(k, "k_beta", c.k_beta);
  c.relation = get_or<std::string>(section(t, "relation"), "key", c.relation);
  read_pulse(t, c.source);
  apply_overrides(c, o);
  return c;
}

}  // namespace ide
