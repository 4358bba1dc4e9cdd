#include <gtest/gtest.h>

#include "ide/solver.hpp"
#include "oracles.hpp"

using namespace ide;

namespace {

const Mat I1 = Mat::Identity(1, 1);

MaterialLaw unit_law(int dim = 1) {
  MaterialLaw m({{"u", dim}}, std::numeric_limits<double>::infinity());
  m.add_diagonal(0, BlockTerm::constant(Mat::Identity(dim, dim)));
  return m;
}

BlockOperator scalar_op(double a) {
  return BlockOperator(a * I1, a == 0.0 ? BlockOperator::Structure::general : BlockOperator::Structure::symmetric_positive,
                       {{"u", 1}});
}

WeightedSignal indicator(const TimeGrid& g, double lo, double hi, double nu) {
  return WeightedSignal::sample(g, 1, nu, [&](double t) { return Vec::Constant(1, (t >= lo && t < hi) ? 1.0 : 0.0); });
}

WeightedSignal solve_time(const MaterialLaw& law, const BlockOperator& a, const WeightedSignal& f, double nu) {
  return solve_inclusion_time({law, a, std::nullopt, f, nu}).u;
}

double max_abs_error(const WeightedSignal& u, const std::function<double(double)>& exact) {
  double e = 0.0;
  for (int j = 0; j < u.size(); ++j) e = std::max(e, std::abs(u.values()(j, 0) - exact(u.grid().t(j))));
  return e;
}

// Law with memory: 1 + exponential relaxation, plus a small z-scaled term.
MaterialLaw memory_law() {
  MaterialLaw m({{"u", 2}}, 10.0);
  Mat s(2, 2);
  s << 1.0, 0.2, 0.2, 0.5;
  m.add_diagonal(0, BlockTerm::constant(Mat::Identity(2, 2)));
  m.add_diagonal(0, BlockTerm::hyp0(OperatorKernel::exponential(1.5, 0.3 * s)));
  m.add_diagonal(0, BlockTerm::z_linear(0.5 * s));
  return m;
}

}  // namespace

TEST(TimeSolver, IndicatorSourceGivesRamp) {
  std::vector<double> err;
  for (int per_unit : {64, 128, 256}) {
    TimeGrid g(0.0, 1.0 / per_unit, 3 * per_unit);
    WeightedSignal u = solve_time(unit_law(), scalar_op(0.0), indicator(g, 0.0, 1.0, 1.0), 1.0);
    double e = max_abs_error(u, [](double t) { return std::clamp(t, 0.0, 1.0); });
    EXPECT_LE(e, g.dt * (1.0 + 1e-9));
    err.push_back(e);
  }
  for (double r : oracle::ratios(err)) EXPECT_NEAR(r, 2.0, 0.05);
}

TEST(TimeSolver, RelaxationTowardsSteadyState) {
  const double a = 2.0;
  std::vector<double> err;
  for (int per_unit : {64, 128, 256, 512}) {
    TimeGrid g(0.0, 1.0 / per_unit, 4 * per_unit);
    WeightedSignal f = indicator(g, 0.0, 100.0, 1.0);
    WeightedSignal u = solve_time(unit_law(), scalar_op(a), f, 1.0);
    err.push_back(max_abs_error(u, [&](double t) { return (1.0 - std::exp(-a * t)) / a; }));
  }
  EXPECT_LT(err.back(), 2e-3);
  for (double r : oracle::ratios(err)) EXPECT_NEAR(r, 2.0, 0.15);
}

TEST(TimeSolver, ZeroSourceGivesZero) {
  TimeGrid g(0.0, 0.01, 300);
  WeightedSignal u = solve_time(memory_law(), BlockOperator::zero({{"u", 2}}), WeightedSignal(g, 2, 1.0), 1.0);
  EXPECT_EQ(weighted_norm(u), 0.0);
}

TEST(TimeSolver, ObstacleCapsTheRamp) {
  TimeGrid g(0.0, 1.0 / 128, 384);
  WeightedSignal f = indicator(g, 0.0, 100.0, 1.0);
  auto below_one = MonotoneRelation::box(1, -std::numeric_limits<double>::infinity(), 1.0);
  auto sol = solve_inclusion_time({unit_law(), scalar_op(0.0), MonotonePart{below_one, {0}}, f, 1.0});
  for (int j = 0; j < g.n; ++j) EXPECT_NEAR(sol.u.values()(j, 0), std::min(g.t(j) + g.dt, 1.0), 1e-12);
}

TEST(TimeSolver, StepResidualIsSmall) {
  oracle::Rng rng(61);
  TimeGrid g(0.0, 0.01, 400);
  WeightedSignal f = oracle::smooth_pulses(rng, g, 2, 1.0);
  auto sol = solve_inclusion_time({memory_law(), BlockOperator::zero({{"u", 2}}), std::nullopt, f, 1.0});
  EXPECT_LT(sol.max_step_residual, 1e-12);
  ASSERT_TRUE(sol.margin.has_value());
  EXPECT_GT(sol.margin->c_est, 0.0);
}

TEST(FrequencySolver, AgreesWithTimeSolverToFirstOrder) {
  std::vector<double> err;
  const double nu = 2.0;
  for (int per_unit : {64, 128, 256}) {
    TimeGrid g(0.0, 1.0 / per_unit, 10 * per_unit);
    WeightedSignal f = WeightedSignal::sample(g, 2, nu, [](double t) {
      Vec v(2);
      v << std::exp(-std::pow((t - 2.0) / 0.4, 2)), std::exp(-std::pow((t - 3.0) / 0.5, 2));
      return v;
    });
    LinearProblem p{memory_law(), BlockOperator::zero({{"u", 2}}), f, nu};
    FrequencySolution fs = solve_linear_frequency(p);
    EXPECT_LT(fs.residual, 1e-10);
    err.push_back(relative_weighted_error(solve_time(p.law, p.a, f, nu), fs.u));
  }
  EXPECT_LT(err.back(), 2e-2);
  for (double r : oracle::ratios(err)) EXPECT_NEAR(r, 2.0, 0.3);
}

TEST(FrequencySolver, ScalarOdeMatchesExactTransform) {
  // d0 u + a u = f: frequency solution is exact up to wrap-around, here e^{-nu T} tiny.
  const double a = 1.0, nu = 1.0;
  TimeGrid g(0.0, 0.01, 3000);
  WeightedSignal f = WeightedSignal::sample(g, 1, nu, [](double t) { return Vec::Constant(1, std::exp(-std::pow(t - 3.0, 2))); });
  LinearProblem p{unit_law(), scalar_op(a), f, nu};
  WeightedSignal u = solve_linear_frequency(p).u;
  // u = e^{-a t} * f, computed with a fine Simpson quadrature.
  for (double t : {2.0, 3.0, 5.0, 8.0}) {
    double exact = oracle::simpson([&](double s) { return Mat::Constant(1, 1, std::exp(-a * (t - s)) * std::exp(-std::pow(s - 3.0, 2))); }, 0.0, t, 4000)(0, 0);
    EXPECT_NEAR(u.values()(g.index_at_or_after(t), 0), exact, 1e-3);
  }
}

TEST(InitialValue, ZeroStateLeavesSource) {
  oracle::Rng rng(67);
  TimeGrid g(0.0, 0.01, 200);
  WeightedSignal f = oracle::smooth_pulses(rng, g, 2, 1.0);
  EXPECT_EQ(build_ivp_rhs(memory_law(), Vec::Zero(2), f).values(), f.values());
}

TEST(InitialValue, UnitStateWithoutDynamicsStaysPut) {
  TimeGrid g(0.0, 0.01, 200);
  WeightedSignal rhs = build_ivp_rhs(unit_law(), Vec::Ones(1), WeightedSignal(g, 1, 1.0));
  EXPECT_NEAR(rhs.values()(0, 0), 1.0 / g.dt, 1e-9);
  EXPECT_EQ(rhs.values().bottomRows(g.n - 1).norm(), 0.0);
  WeightedSignal u = solve_time(unit_law(), scalar_op(0.0), rhs, 1.0);
  for (int j = 0; j < g.n; ++j) EXPECT_NEAR(u.values()(j, 0), 1.0, 1e-12);
}

TEST(InitialValue, DampedStateDecaysExponentially) {
  const double a = 1.5;
  std::vector<double> err;
  for (int per_unit : {100, 200, 400}) {
    TimeGrid g(0.0, 1.0 / per_unit, 3 * per_unit);
    WeightedSignal rhs = build_ivp_rhs(unit_law(), Vec::Ones(1), WeightedSignal(g, 1, 1.0));
    WeightedSignal u = solve_time(unit_law(), scalar_op(a), rhs, 1.0);
    for (int j = 0; j < g.n; ++j) ASSERT_NEAR(u.values()(j, 0), std::pow(1.0 + a * g.dt, -(j + 1)), 1e-12);
    err.push_back(max_abs_error(u, [&](double t) { return std::exp(-a * t); }));
  }
  for (double r : oracle::ratios(err)) EXPECT_NEAR(r, 2.0, 0.15);
}

TEST(InitialValue, RejectsSourcesBeforeZero) {
  TimeGrid g(-1.0, 0.01, 200);
  EXPECT_THROW(build_ivp_rhs(unit_law(), Vec::Ones(1), WeightedSignal(g, 1, 1.0)), PreconditionError);
}

TEST(History, ConstantHistoryMatchesInitialValue) {
  MaterialLaw m({{"u", 2}}, 10.0);
  Mat s(2, 2), n(2, 2);
  s << 2.0, 0.5, 0.5, 1.0;
  n << 0.3, 0.0, 0.0, 0.7;
  m.add_diagonal(0, BlockTerm::constant(s));
  m.add_diagonal(0, BlockTerm::z_linear(n));
  Vec c(2);
  c << 0.4, -1.2;
  TimeGrid gf(0.0, 0.01, 300);
  TimeGrid gh(-1.0, 0.01, 100);
  WeightedSignal hist = WeightedSignal::sample(gh, 2, 1.0, [&](double) { return c; });
  oracle::Rng rng(71);
  WeightedSignal f = oracle::smooth_pulses(rng, gf, 2, 1.0);
  WeightedSignal a = build_history_rhs(m, hist, f);
  WeightedSignal b = build_ivp_rhs(m, c, f);
  EXPECT_LT((a.values() - b.values()).norm(), 1e-9 * b.values().norm());
}

TEST(History, ZeroHistoryLeavesSource) {
  oracle::Rng rng(73);
  TimeGrid gf(0.0, 0.01, 300);
  WeightedSignal f = oracle::smooth_pulses(rng, gf, 2, 1.0);
  WeightedSignal hist(TimeGrid(-1.0, 0.01, 100), 2, 1.0);
  EXPECT_EQ(build_history_rhs(memory_law(), hist, f).values(), f.values());
}

TEST(History, SupportOnPositiveTimesIsRejected) {
  TimeGrid gf(0.0, 0.01, 100);
  WeightedSignal hist = WeightedSignal::sample(TimeGrid(-0.5, 0.01, 100), 1, 1.0, [](double) { return Vec::Ones(1); });
  EXPECT_THROW(build_history_rhs(unit_law(), hist, WeightedSignal(gf, 1, 1.0)), PreconditionError);
}

TEST(Causality, TruncatedSourceLeavesEarlySolution) {
  oracle::Rng rng(79);
  TimeGrid g(0.0, 0.01, 600);
  WeightedSignal f = oracle::smooth_pulses(rng, g, 2, 1.0, 5);
  SolveFn solve = [](const WeightedSignal& src) {
    return solve_time(memory_law(), BlockOperator::zero({{"u", 2}}), src, 1.0);
  };
  for (double a : {1.0, 2.5, 4.0}) {
    auto r = causality_check(solve, f, a);
    EXPECT_TRUE(r.pass) << a;
    EXPECT_LE(r.leakage, 1e-10);
  }
}

TEST(Lipschitz, UnitLawRatioBelowInverseWeight) {
  oracle::Rng rng(83);
  for (double nu : {0.5, 1.0, 3.0}) {
    TimeGrid g(0.0, 1.0 / 256, 2048);
    WeightedSignal f1 = oracle::smooth_pulses(rng, g, 1, nu, 4);
    WeightedSignal f2 = oracle::smooth_pulses(rng, g, 1, nu, 4);
    SolveFn solve = [&](const WeightedSignal& src) { return solve_time(unit_law(), scalar_op(0.0), src, nu); };
    // Backward differences shift the margin by O(nu dt).
    auto r = lipschitz_check(solve, f1, f2, nu, nu * g.dt);
    EXPECT_TRUE(r.pass) << nu << " ratio " << r.ratio << " bound " << r.bound;
    EXPECT_NEAR(r.bound, 1.0 / nu, 1e-15);
  }
}

TEST(MarginGate, NegativeLawIsRejectedUnlessForced) {
  MaterialLaw m({{"u", 1}}, std::numeric_limits<double>::infinity());
  m.add_diagonal(0, BlockTerm::constant(-I1));
  TimeGrid g(0.0, 0.01, 100);
  WeightedSignal f = indicator(g, 0.0, 0.5, 1.0);
  EXPECT_THROW(solve_inclusion_time({m, scalar_op(0.0), std::nullopt, f, 1.0}), MarginGateError);
  SolveOptions force;
  force.force = true;
  auto sol = solve_inclusion_time({m, scalar_op(0.0), std::nullopt, f, 1.0}, force);
  ASSERT_TRUE(sol.margin.has_value());
  EXPECT_LT(sol.margin->c_est, 0.0);
  EXPECT_NEAR(sol.u.values()(10, 0), -11 * g.dt, 1e-12);
}

TEST(MarginGate, UnitLawMarginEqualsWeight) {
  for (double nu : {0.5, 2.0}) EXPECT_NEAR(margin_gate(unit_law(), nu, {}).c_est, nu, 1e-12);
}

TEST(Reduction, ParabolicResidualVanishesOnExactSolution) {
  const double g0 = 1.5;
  Mat g = g0 * I1;
  std::vector<double> res;
  for (int per_unit : {64, 128, 256}) {
    TimeGrid grid(0.0, 1.0 / per_unit, 10 * per_unit);
    auto u = WeightedSignal::sample(grid, 1, 1.0, [](double t) { return Vec::Constant(1, std::exp(-std::pow(t - 5.0, 2))); });
    auto f = WeightedSignal::sample(grid, 1, 1.0, [&](double t) {
      double e = std::exp(-std::pow(t - 5.0, 2));
      return Vec::Constant(1, -2.0 * (t - 5.0) * e + g0 * g0 * e);
    });
    res.push_back(parabolic_reduction_residual(OperatorKernel::zero(1), OperatorKernel::zero(1), g, u, f));
  }
  EXPECT_LT(res.back(), 1e-4);
  for (double r : oracle::ratios(res)) EXPECT_GT(r, 3.0);
  TimeGrid grid(0.0, 1.0 / 128, 1280);
  auto u = WeightedSignal::sample(grid, 1, 1.0, [](double t) { return Vec::Constant(1, std::exp(-std::pow(t - 5.0, 2))); });
  EXPECT_GT(parabolic_reduction_residual(OperatorKernel::zero(1), OperatorKernel::zero(1), g, u, u), 0.1);
}

TEST(Reduction, HyperbolicResidualVanishesOnExactSolution) {
  const double g0 = 2.0;
  TimeGrid grid(0.0, 1.0 / 256, 2048);
  auto bump = [](double t) { return std::exp(-std::pow(t - 5.0, 2)); };
  auto v = WeightedSignal::sample(grid, 1, 1.0, [&](double t) { return Vec::Constant(1, -2.0 * (t - 5.0) * bump(t)); });
  auto f = WeightedSignal::sample(grid, 1, 1.0, [&](double t) {
    double x = t - 5.0;
    return Vec::Constant(1, (4.0 * x * x - 2.0) * bump(t) + g0 * g0 * bump(t));
  });
  EXPECT_LT(hyperbolic_reduction_residual(OperatorKernel::zero(1), OperatorKernel::zero(1), g0 * I1, v, f), 1e-4);
}

TEST(TrapezoidConvolution, ExponentialOnConstant) {
  TimeGrid g(0.0, 1.0 / 512, 1024);
  auto one = WeightedSignal::sample(g, 1, 1.0, [](double) { return Vec::Ones(1); });
  WeightedSignal c = convolve_trapezoid(OperatorKernel::exponential(1.0, I1), one);
  EXPECT_LT(max_abs_error(c, [](double t) { return 1.0 - std::exp(-t); }), 1e-6);
  WeightedSignal s = antiderivative_trapezoid(one);
  EXPECT_LT(max_abs_error(s, [](double t) { return t; }), 1e-12);
}
