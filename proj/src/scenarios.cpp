#include "ide/scenarios.hpp"

#include <algorithm>
#include <cmath>

namespace ide {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec node_profile(int cells, double h, double length) {
  Vec s(cells - 1);
  for (int i = 1; i < cells; ++i) s(i - 1) = std::sin(kPi * i * h / length);
  return s;
}

WeightedSignal map_rows(const Mat& m, const WeightedSignal& s) {
  return WeightedSignal(s.grid(), Mat(s.values() * m.transpose()), s.nu());
}

void require_grid_config(int cells, double length, double nu, double dt, double tmax) {
  if (cells < 2) throw ConfigError("cells must be at least 2");
  if (!(length > 0.0) || !(nu > 0.0) || !(dt > 0.0) || !(tmax > dt)) throw ConfigError("grid parameters must be positive");
}

}  // namespace

double Pulse::value(double t) const {
  double x = (t - center) / width;
  return amplitude * std::exp(-x * x);
}

double Pulse::integral(double t) const {
  return amplitude * width * 0.5 * std::sqrt(kPi) * (std::erf((t - center) / width) + 1.0);
}

ViscoSetup build_visco(const ViscoConfig& cfg) {
  require_grid_config(cfg.cells, cfg.length, cfg.nu, cfg.dt, cfg.tmax);
  const int cells = cfg.cells;
  const double h = cfg.length / cells;
  std::vector<double> rho(cells - 1), c(cells);
  for (int i = 1; i < cells; ++i) rho[i - 1] = cfg.rho0 + cfg.rho1 * (i * h / cfg.length);
  for (int k = 0; k < cells; ++k) c[k] = cfg.c0 + cfg.c1 * (1.0 - (k + 0.5) * h / cfg.length);

  ViscoSetup s{cfg, build_elasticity_1d(cells, h, rho, c),
               OperatorKernel::exponential(cfg.kernel_decay, cfg.kernel_beta * Mat::Identity(cells, cells)),
               OperatorKernel::zero(cells), {}};
  const Mat& cinv = s.elasticity.c_root.inv_sqrt;
  s.conjugated = s.relaxation.sandwiched(cinv, cinv);

  MaterialLaw law({{"v", cells - 1}, {"T", cells}}, 1.0 / (2.0 * cfg.nu));
  law.add_diagonal(0, BlockTerm::constant(s.elasticity.rho));
  law.add_diagonal(1, BlockTerm::hyp1(s.conjugated).sandwich(cinv, cinv));

  TimeGrid grid = TimeGrid::covering(0.0, cfg.tmax, cfg.dt);
  Vec shape = node_profile(cells, h, cfg.length);
  WeightedSignal f(grid, 2 * cells - 1, cfg.nu);
  for (int j = 0; j < grid.n; ++j) f.values().row(j).head(cells - 1) = cfg.source.value(grid.t(j)) * shape.transpose();
  s.problem = LinearProblem{std::move(law), s.elasticity.a, std::move(f), cfg.nu};
  return s;
}

std::vector<double> visco_energy(const ViscoSetup& s, const WeightedSignal& u) {
  const int cells = s.config.cells;
  const double h = s.elasticity.gradient.h;
  Vec rho = s.elasticity.rho.diagonal();
  Vec cinv = s.elasticity.c.diagonal().cwiseInverse();
  std::vector<double> e(u.size());
  for (int j = 0; j < u.size(); ++j) {
    Vec x = u.at(j);
    Vec v = x.head(cells - 1), t = x.tail(cells);
    e[j] = 0.5 * h * (rho.dot(v.cwiseProduct(v)) + cinv.dot(t.cwiseProduct(t)));
  }
  return e;
}

ViscoReport run_visco(const ViscoSetup& s, const SolveOptions& options, bool cross_validate) {
  ViscoReport r;
  const double nu = s.config.nu;
  r.relaxation_check = check_hypotheses(s.relaxation, nu);
  r.conjugated_check = check_hypotheses(s.conjugated, nu);
  if (!r.relaxation_check.pass() || !r.conjugated_check.pass())
    throw PreconditionError("relaxation kernel fails the selfadjointness/commutation hypotheses");
  const Mat& cinv = s.elasticity.c_root.inv_sqrt;
  double cn = op_norm(cinv);
  r.conjugated_d_bound = r.relaxation_check.d * cn * cn;
  r.conjugated_d_ok = r.conjugated_check.d <= r.conjugated_d_bound + 1e-12;

  r.margin = margin_gate(s.problem.law, nu, options);
  SolveOptions inner = options;
  inner.check_margin = false;
  r.time = solve_inclusion_time(InclusionProblem::from_linear(s.problem), inner);
  r.time.margin = r.margin;
  if (cross_validate) {
    r.frequency = solve_linear_frequency(s.problem, inner);
    r.cross_error = relative_weighted_error(r.time.u, r.frequency->u);
  }
  r.energy = visco_energy(s, r.time.u);
  return r;
}

PhaseSetup build_phase(const PhaseConfig& cfg) {
  require_grid_config(cfg.cells, cfg.length, cfg.nu, cfg.dt, cfg.tmax);
  if (!(cfg.alpha > 0.0) || !(cfg.lambda >= 0.0)) throw ConfigError("alpha must be positive and lambda nonnegative");
  const int cells = cfg.cells;
  const int nodes = cells - 1;
  const double h = cfg.length / cells;
  Gradient1D g = build_grad_dirichlet_1d(cells, h);
  Mat in = Mat::Identity(nodes, nodes);
  OperatorKernel c = OperatorKernel::exponential(cfg.c_decay, cfg.c_beta * in);
  OperatorKernel d = OperatorKernel::exponential(cfg.d_decay, cfg.d_beta * in);
  OperatorKernel k = OperatorKernel::exponential(cfg.k_decay, cfg.k_beta * Mat::Identity(cells, cells));

  MaterialLaw law({{"theta", nodes}, {"chi", nodes}, {"q", cells}}, 1.0 / (2.0 * cfg.nu));
  law.add(0, 0, BlockTerm::par2(c));
  law.add(0, 1, BlockTerm::par2(d));
  law.add(1, 0, BlockTerm::z_linear(-cfg.lambda * in));
  law.add(1, 1, BlockTerm::constant(cfg.alpha * in));
  law.add(2, 2, BlockTerm::hyp1(k));

  const int m = 2 * nodes + cells;
  Mat a = Mat::Zero(m, m);
  a.block(0, 2 * nodes, nodes, cells) = -g.grad.transpose();
  a.block(2 * nodes, 0, cells, nodes) = g.grad;
  BlockOperator skew(std::move(a), BlockOperator::Structure::skew, {{"theta", nodes}, {"chi", nodes}, {"q", cells}});

  TimeGrid grid = TimeGrid::covering(0.0, cfg.tmax, cfg.dt);
  Vec shape = node_profile(cells, h, cfg.length);
  WeightedSignal rhs(grid, m, cfg.nu);
  WeightedSignal heat(grid, nodes, cfg.nu);
  for (int j = 0; j < grid.n; ++j) {
    rhs.values().row(j).head(nodes) = cfg.source.integral(grid.t(j)) * shape.transpose();
    heat.values().row(j) = cfg.source.value(grid.t(j)) * shape.transpose();
  }
  std::vector<int> chi(nodes);
  for (int i = 0; i < nodes; ++i) chi[i] = nodes + i;
  MonotonePart mono{make_relation(cfg.relation, nodes), chi};

  return PhaseSetup{cfg, g, c, d, k, InclusionProblem{std::move(law), std::move(skew), std::move(mono), std::move(rhs), cfg.nu},
                    std::move(heat)};
}

double phase_epsilon_bound(const OperatorKernel& c, const OperatorKernel& d, double alpha, double lambda, double nu) {
  double a1 = 1.0 - l1_weighted_norm(c, nu);
  double a2 = nu * alpha;
  double b = std::pow(1.0 + l1_weighted_norm(d, nu) + lambda, 2);
  double x = (a1 - a2) + std::sqrt((a1 - a2) * (a1 - a2) + b);  // x = eps^2 balancing both terms
  return std::min(a1 - 0.5 * x, a2 - b / (2.0 * x));
}

double phase_heat_residual(const PhaseSetup& s, const WeightedSignal& u) {
  const int nodes = s.config.cells - 1;
  WeightedSignal theta = u.component_slice(0, nodes);
  WeightedSignal chi = u.component_slice(nodes, nodes);
  WeightedSignal gt = map_rows(s.gradient.grad, theta);
  WeightedSignal flux = gt - convolve_trapezoid(s.k, gt);
  WeightedSignal lhs = theta + convolve_trapezoid(s.c, theta) + chi + convolve_trapezoid(s.d, chi) +
                       map_rows(s.gradient.grad.transpose(), antiderivative_trapezoid(flux));
  WeightedSignal rhs = antiderivative_trapezoid(s.heat_source);
  return relative_weighted_error(lhs, rhs);
}

double phase_flux_residual(const PhaseSetup& s, const WeightedSignal& u) {
  const int nodes = s.config.cells - 1;
  WeightedSignal theta = u.component_slice(0, nodes);
  WeightedSignal q = u.component_slice(2 * nodes, s.config.cells);
  WeightedSignal gt = map_rows(s.gradient.grad, theta);
  WeightedSignal expected = -1.0 * antiderivative_trapezoid(gt - convolve_trapezoid(s.k, gt));
  return relative_weighted_error(q, expected);
}

PhaseReport run_phase(const PhaseSetup& s, const SolveOptions& options) {
  PhaseReport r;
  const auto& cfg = s.config;
  r.k_check = check_hypotheses(s.k, cfg.nu);
  if (!r.k_check.pass()) throw PreconditionError("flux kernel fails the selfadjointness/commutation hypotheses");

  r.margin = margin_gate(s.problem.law, cfg.nu, options);
  const double r1 = 1.0 / (2.0 * cfg.nu);
  MarginGrid grid = options.margin_grid ? *options.margin_grid : default_margin_grid(r1);
  r.coupling_margin = solvability_margin(s.problem.law.restricted({0, 1}), r1, grid, options.exec);
  for (size_t i = 0; i < grid.nu.size(); ++i) {
    double bound = phase_epsilon_bound(s.c, s.d, cfg.alpha, cfg.lambda, grid.nu[i]);
    r.epsilon_bounds.push_back(bound);
    if (r.coupling_margin.row_minima[i] < bound - 1e-6) r.epsilon_bound_ok = false;
  }

  SolveOptions inner = options;
  inner.check_margin = false;
  r.time = solve_inclusion_time(s.problem, inner);
  r.time.margin = r.margin;
  const int nodes = cfg.cells - 1;
  const Mat chi = r.time.u.values().middleCols(nodes, nodes);
  r.chi_min = chi.minCoeff();
  r.chi_max = chi.maxCoeff();
  r.heat_residual = phase_heat_residual(s, r.time.u);
  r.flux_residual = phase_flux_residual(s, r.time.u);
  return r;
}

}  // namespace ide
