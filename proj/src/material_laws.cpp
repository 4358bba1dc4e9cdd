#include "ide/material_laws.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ide {

namespace {

Complex inverse_z(double xi, double nu) { return Complex(nu, xi); }

// (1 +- s K^) or its inverse, sandwiched; no z factor.
CMat kernel_factor(const BlockTerm& t, double xi, double nu) {
  const OperatorKernel& k = *t.kernel;
  const int m = k.dim();
  CMat kh = kSqrt2Pi * kernel_transform(k, xi, nu);
  CMat core;
  if (t.has_resolvent()) {
    if (op_norm(kh) >= 1.0)
      throw InvertibilityError("Neumann condition fails for a resolvent block at xi = " + std::to_string(xi) +
                               ", nu = " + std::to_string(nu));
    core = (CMat::Identity(m, m) - kh).partialPivLu().inverse();
  } else {
    core = CMat::Identity(m, m) + kh;
  }
  if (t.left) core = t.left->cast<Complex>() * core;
  if (t.right) core = core * t.right->cast<Complex>();
  return core;
}

// Term value multiplied by z^{-1} (scaled = true) or plain M-term.
CMat term_value(const BlockTerm& t, double xi, double nu, bool scaled) {
  Complex zi = inverse_z(xi, nu);
  Complex pre_static = scaled ? Complex(1.0) : 1.0 / zi;  // factor on z-scaled terms
  Complex pre_plain = scaled ? zi : Complex(1.0);
  switch (t.kind) {
    case BlockTerm::Kind::constant:
      return pre_plain * t.matrix.cast<Complex>();
    case BlockTerm::Kind::static_z:
      return pre_static * t.matrix.cast<Complex>();
    case BlockTerm::Kind::hyp0:
    case BlockTerm::Kind::hyp1:
      return pre_plain * kernel_factor(t, xi, nu);
    case BlockTerm::Kind::par2:
    case BlockTerm::Kind::par3:
      return pre_static * kernel_factor(t, xi, nu);
  }
  return {};
}

bool symmetric(const Mat& m) { return (m - m.transpose()).norm() <= 1e-12 * std::max(1.0, m.norm()); }

}  // namespace

BlockTerm BlockTerm::constant(Mat m) {
  BlockTerm t;
  t.kind = Kind::constant;
  t.matrix = std::move(m);
  return t;
}

BlockTerm BlockTerm::z_linear(Mat n) {
  BlockTerm t;
  t.kind = Kind::static_z;
  t.matrix = std::move(n);
  return t;
}

namespace {
BlockTerm kernel_term(BlockTerm::Kind kind, OperatorKernel k) {
  BlockTerm t;
  t.kind = kind;
  t.kernel = std::move(k);
  return t;
}
}  // namespace

BlockTerm BlockTerm::hyp0(OperatorKernel c) { return kernel_term(Kind::hyp0, std::move(c)); }
BlockTerm BlockTerm::hyp1(OperatorKernel b) { return kernel_term(Kind::hyp1, std::move(b)); }
BlockTerm BlockTerm::par2(OperatorKernel c) { return kernel_term(Kind::par2, std::move(c)); }
BlockTerm BlockTerm::par3(OperatorKernel b) { return kernel_term(Kind::par3, std::move(b)); }

BlockTerm& BlockTerm::sandwich(Mat l, Mat r) {
  if (!kernel) throw StructureError("only kernel terms take sandwich factors");
  if (l.cols() != kernel->dim() || r.rows() != kernel->dim())
    throw DimensionMismatch("sandwich factors do not match the kernel dimension");
  left = std::move(l);
  right = std::move(r);
  return *this;
}

int BlockTerm::rows() const {
  if (!kernel) return static_cast<int>(matrix.rows());
  return left ? static_cast<int>(left->rows()) : kernel->dim();
}

int BlockTerm::cols() const {
  if (!kernel) return static_cast<int>(matrix.cols());
  return right ? static_cast<int>(right->cols()) : kernel->dim();
}

int BlockTerm::inner_dim() const { return kernel ? kernel->dim() : static_cast<int>(matrix.cols()); }

std::string to_string(BlockTerm::Kind k) {
  switch (k) {
    case BlockTerm::Kind::constant: return "constant";
    case BlockTerm::Kind::static_z: return "static_z";
    case BlockTerm::Kind::hyp0: return "hyp0";
    case BlockTerm::Kind::hyp1: return "hyp1";
    case BlockTerm::Kind::par2: return "par2";
    case BlockTerm::Kind::par3: return "par3";
  }
  return "?";
}

BlockTerm::Kind parse_block_kind(const std::string& s) {
  static const std::map<std::string, BlockTerm::Kind> names = {
      {"constant", BlockTerm::Kind::constant}, {"static_z", BlockTerm::Kind::static_z},
      {"hyp0", BlockTerm::Kind::hyp0},         {"hyp1", BlockTerm::Kind::hyp1},
      {"par2", BlockTerm::Kind::par2},         {"par3", BlockTerm::Kind::par3},
  };
  auto it = names.find(s);
  if (it == names.end()) throw ConfigError("unknown block kind '" + s + "'");
  return it->second;
}

// ---------------------------------------------------------------------------

MaterialLaw::MaterialLaw(std::vector<std::pair<std::string, int>> fields, double radius)
    : fields_(std::move(fields)), radius_(radius) {
  if (fields_.empty()) throw PreconditionError("material law needs at least one field");
  if (!(radius_ > 0.0)) throw PreconditionError("disc radius must be positive");
  for (const auto& [name, d] : fields_) {
    if (d < 1) throw PreconditionError("field '" + name + "' has no components");
    offsets_.push_back(dim_);
    dim_ += d;
  }
}

MaterialLaw& MaterialLaw::add(int row, int col, BlockTerm term) {
  const int nf = static_cast<int>(fields_.size());
  if (row < 0 || col < 0 || row >= nf || col >= nf) throw DimensionMismatch("block position out of range");
  if (term.rows() != field_dim(row) || term.cols() != field_dim(col))
    throw DimensionMismatch("block term shape does not match fields " + fields_[row].first + ", " +
                            fields_[col].first);
  if (term.kernel && (term.left || term.right) && (!term.left || !term.right))
    throw DimensionMismatch("sandwich needs both factors");
  entries_.push_back({row, col, std::move(term)});
  return *this;
}

int MaterialLaw::field_index(const std::string& name) const {
  for (size_t i = 0; i < fields_.size(); ++i)
    if (fields_[i].first == name) return static_cast<int>(i);
  throw ConfigError("unknown field '" + name + "'");
}

bool MaterialLaw::block_diagonal() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const BlockEntry& e) { return e.row == e.col; });
}

CMat MaterialLaw::evaluate_scaled(double xi, double nu) const {
  if (!(nu > 0.0)) throw RangeError("Re z^{-1} must be positive");
  if (std::isfinite(radius_) && nu < (1.0 - 1e-12) / (2.0 * radius_))
    throw RangeError("z outside the disc of validity");
  CMat out = CMat::Zero(dim_, dim_);
  for (const auto& e : entries_)
    out.block(offsets_[e.row], offsets_[e.col], field_dim(e.row), field_dim(e.col)) +=
        term_value(e.term, xi, nu, true);
  return out;
}

CMat MaterialLaw::evaluate_at(double xi, double nu) const {
  if (!(nu > 0.0)) throw RangeError("Re z^{-1} must be positive");
  if (std::isfinite(radius_) && nu < (1.0 - 1e-12) / (2.0 * radius_))
    throw RangeError("z outside the disc of validity");
  CMat out = CMat::Zero(dim_, dim_);
  for (const auto& e : entries_)
    out.block(offsets_[e.row], offsets_[e.col], field_dim(e.row), field_dim(e.col)) +=
        term_value(e.term, xi, nu, false);
  return out;
}

CMat MaterialLaw::evaluate(Complex z) const {
  if (z == Complex(0.0)) throw RangeError("z = 0 is not inside the disc");
  Complex zi = 1.0 / z;
  return evaluate_at(zi.imag(), zi.real());
}

MaterialLaw MaterialLaw::restricted(const std::vector<int>& fields) const {
  std::vector<std::pair<std::string, int>> f;
  std::map<int, int> index;
  for (int i : fields) {
    index[i] = static_cast<int>(f.size());
    f.push_back(fields_.at(i));
  }
  MaterialLaw out(f, radius_);
  for (const auto& e : entries_)
    if (index.count(e.row) && index.count(e.col)) out.add(index[e.row], index[e.col], e.term);
  return out;
}

// ---------------------------------------------------------------------------

double neumann_norm(const BlockTerm& term, double xi, double nu) {
  if (!term.kernel) return 0.0;
  return kSqrt2Pi * op_norm(kernel_transform(*term.kernel, xi, nu));
}

MarginGrid default_margin_grid(double r1, int xi_count, double xi_max, int nu_levels, double growth) {
  if (!(r1 > 0.0) || xi_count < 2 || nu_levels < 1 || !(growth > 1.0))
    throw PreconditionError("bad margin grid parameters");
  MarginGrid g;
  double nu_min = 1.0 / (2.0 * r1);
  for (int k = 0; k < nu_levels; ++k) g.nu.push_back(nu_min * std::pow(growth, k));
  auto pos = log_frequency_grid(1e-2, xi_max, xi_count);
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) g.xi.push_back(-*it);
  g.xi.push_back(0.0);
  g.xi.insert(g.xi.end(), pos.begin(), pos.end());
  return g;
}

SolvabilityReport solvability_margin(const MaterialLaw& m, double r1, const MarginGrid& grid, Exec exec) {
  if (!(r1 > 0.0) || r1 > m.radius() * (1.0 + 1e-12)) throw PreconditionError("r1 must lie in (0, r]");
  const double nu_min = 1.0 / (2.0 * r1);
  for (double nu : grid.nu)
    if (nu < nu_min * (1.0 - 1e-12)) throw PreconditionError("margin grid has nu below 1/(2 r1)");
  if (grid.nu.empty() || grid.xi.empty()) throw PreconditionError("empty margin grid");

  const int nx = static_cast<int>(grid.xi.size());
  const int nn = static_cast<int>(grid.nu.size());
  const bool blockwise = m.block_diagonal() && m.fields().size() > 1;
  const int nf = static_cast<int>(m.fields().size());
  std::vector<double> vals(static_cast<size_t>(nx) * nn);
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (int idx = 0; idx < nx * nn; ++idx) {
    double nu = grid.nu[idx / nx], xi = grid.xi[idx % nx];
    CMat h = hermitian_part(m.evaluate_scaled(xi, nu));
    if (!blockwise) {
      vals[idx] = lambda_min_hermitian(h);
      continue;
    }
    double v = std::numeric_limits<double>::infinity();
    for (int f = 0; f < nf; ++f) {
      int o = m.offset(f), d = m.field_dim(f);
      v = std::min(v, lambda_min_hermitian(h.block(o, o, d, d)));
    }
    vals[idx] = v;
  }

  SolvabilityReport r;
  r.nu_min = nu_min;
  r.grid = grid;
  r.c_est = std::numeric_limits<double>::infinity();
  r.row_minima.assign(nn, std::numeric_limits<double>::infinity());
  for (int idx = 0; idx < nx * nn; ++idx) {
    int k = idx / nx;
    r.row_minima[k] = std::min(r.row_minima[k], vals[idx]);
    if (vals[idx] < r.c_est) {
      r.c_est = vals[idx];
      r.worst_nu = grid.nu[k];
      r.worst_xi = grid.xi[idx % nx];
    }
  }
  r.worst_z = 1.0 / Complex(r.worst_nu, r.worst_xi);
  for (double nu : grid.nu) {
    auto b = analytic_margin_bound(m, nu);
    if (!b) {
      r.analytic_bound.reset();
      break;
    }
    r.analytic_bound = r.analytic_bound ? std::min(*r.analytic_bound, *b) : *b;
  }
  return r;
}

SolvabilityReport solvability_margin(const MaterialLaw& m, double r1) {
  return solvability_margin(m, r1, default_margin_grid(r1));
}

double hyp_C_bound(const OperatorKernel& c, double d, double nu) {
  return nu * (1.0 - l1_weighted_norm(c, nu)) - 4.0 * kSqrt2Pi * d;
}

double hyp_B_bound(const OperatorKernel& b, double d, double nu0, double nu) {
  if (nu < nu0) throw PreconditionError("hyp_B_bound needs nu >= nu0");
  double n0 = l1_weighted_norm(b, nu0);
  if (n0 >= 1.0) throw PreconditionError("|B|_{L1,nu0} must be below 1");
  return (nu * (1.0 - n0) - 4.0 * kSqrt2Pi * d) / ((1.0 + n0) * (1.0 + n0));
}

double abs_cont_bound(const OperatorKernel& b, const OperatorKernel& b_prime, const Mat& b0, double nu) {
  double n = l1_weighted_norm(b, nu);
  if (n >= 1.0) throw PreconditionError("|B|_{L1,nu} must be below 1");
  return nu - (l1_weighted_norm(b_prime, nu) + op_norm(b0)) / (1.0 - n);
}

ParabolicMargin parabolic_margin(const BlockTerm& term, double r, const std::vector<double>& xi_grid) {
  if (term.kind != BlockTerm::Kind::par2 && term.kind != BlockTerm::Kind::par3)
    throw PreconditionError("parabolic margin applies to par2/par3 blocks");
  if (!(r > 0.0)) throw PreconditionError("radius must be positive");
  const double nu = 1.0 / (2.0 * r);
  std::vector<double> xs = xi_grid;
  if (xs.empty()) {
    auto pos = default_frequency_grid();
    xs.push_back(0.0);
    for (double x : pos) {
      xs.push_back(x);
      xs.push_back(-x);
    }
  }
  ParabolicMargin pm;
  for (double xi : xs) {
    double s = neumann_norm(term, xi, nu);
    if (s > pm.sup_norm) {
      pm.sup_norm = s;
      pm.worst_xi = xi;
    }
  }
  if (term.kind == BlockTerm::Kind::par2) {
    pm.value = 1.0 - pm.sup_norm;
  } else {
    if (pm.sup_norm >= 1.0) throw InvertibilityError("sup of the transform reaches 1 on the disc boundary");
    pm.value = 1.0 - pm.sup_norm / (1.0 - pm.sup_norm);
  }
  return pm;
}

std::optional<double> analytic_margin_bound(const MaterialLaw& m, double nu) {
  if (!m.block_diagonal()) return std::nullopt;
  const int nf = static_cast<int>(m.fields().size());
  std::vector<int> count(nf, 0);
  for (const auto& e : m.entries()) ++count[e.row];
  double bound = std::numeric_limits<double>::infinity();
  for (const auto& e : m.entries()) {
    if (count[e.row] != 1) return std::nullopt;
    const BlockTerm& t = e.term;
    if (t.left || t.right) return std::nullopt;
    double b = 0.0;
    switch (t.kind) {
      case BlockTerm::Kind::constant:
      case BlockTerm::Kind::static_z: {
        if (!symmetric(t.matrix)) return std::nullopt;
        double lmin = lambda_min_hermitian(t.matrix.cast<Complex>());
        b = t.kind == BlockTerm::Kind::constant ? nu * lmin : lmin;
        break;
      }
      case BlockTerm::Kind::hyp0:
      case BlockTerm::Kind::hyp1: {
        const OperatorKernel& k = *t.kernel;
        auto h = check_hypotheses(k, nu);
        if (!h.pass()) return std::nullopt;
        if (t.kind == BlockTerm::Kind::hyp0) {
          b = hyp_C_bound(k, h.d, nu);
        } else {
          if (h.l1_at_nu0 >= 1.0) return std::nullopt;
          b = hyp_B_bound(k, h.d, nu, nu);
        }
        break;
      }
      case BlockTerm::Kind::par2:
      case BlockTerm::Kind::par3:
        try {
          b = parabolic_margin(t, 1.0 / (2.0 * nu)).value;
        } catch (const InvertibilityError&) {
          return std::nullopt;
        }
        break;
    }
    bound = std::min(bound, b);
  }
  for (int f = 0; f < nf; ++f)
    if (count[f] == 0) bound = std::min(bound, 0.0);
  return bound;
}

}  // namespace ide
