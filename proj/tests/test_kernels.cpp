#include <gtest/gtest.h>

#include "ide/kernels.hpp"
#include "oracles.hpp"

using namespace ide;

namespace {

const Mat I1 = Mat::Identity(1, 1);
const Mat I2 = Mat::Identity(2, 2);

WeightedSignal ones_from_zero(const TimeGrid& g, double nu) {
  return WeightedSignal::sample(g, 1, nu, [](double t) { return Vec::Constant(1, t >= 0.0 ? 1.0 : 0.0); });
}

OperatorKernel switching_kernel(const Mat& a1, const Mat& a2) {
  return OperatorKernel::from_terms({{make_profile("exponential_window", {1.0, 0.0, 1.0}), a1},
                                     {make_profile("exponential_window", {1.0, 1.0, 60.0}), a2}},
                                    0.0);
}

}  // namespace

TEST(WeightedL1Norm, ClosedForms) {
  EXPECT_EQ(l1_weighted_norm(OperatorKernel::zero(2), 1.0), 0.0);
  EXPECT_NEAR(l1_weighted_norm(OperatorKernel::exponential(1.0, I2), 1.0), 0.5, 1e-15);
  EXPECT_NEAR(l1_weighted_norm(OperatorKernel::boxcar(1.0, I1), 0.0), 1.0, 1e-15);
}

TEST(WeightedL1Norm, QuadratureAgreesWithClosedFormForSums) {
  // Two terms force the quadrature path; |e^{-t} I + 0.5 e^{-3t} I| = e^{-t} + 0.5 e^{-3t}.
  auto k = OperatorKernel::from_terms({{make_profile("exponential", {1.0}), I2},
                                       {make_profile("exponential", {3.0}), 0.5 * I2}},
                                      0.0);
  double nu = 0.7;
  EXPECT_NEAR(l1_weighted_norm(k, nu), 1.0 / (1.0 + nu) + 0.5 / (3.0 + nu), 1e-10);
}

TEST(WeightedL1Norm, DecreasesAlongWeightLadder) {
  for (const auto& k : {OperatorKernel::exponential(0.5, I2), OperatorKernel::damped_sine(3.0, 0.2, I1),
                        OperatorKernel::boxcar(2.0, 2.0 * I1)}) {
    double mu = k.mu(), prev = l1_weighted_norm(k, mu);
    for (int i = 0; i < 6; ++i) {
      mu = 2.0 * mu + 1.0;
      double cur = l1_weighted_norm(k, mu);
      EXPECT_LT(cur, prev);
      prev = cur;
    }
    EXPECT_LT(prev, 0.05);
  }
}

TEST(WeightedL1Norm, WeightBelowDecayParameterIsRejected) {
  auto k = OperatorKernel::exponential(-1.0, I1);  // grows like e^t
  EXPECT_GT(k.mu(), 1.0);
  EXPECT_NEAR(l1_weighted_norm(k, k.mu()), 1.0 / (k.mu() - 1.0), 1e-14);
  EXPECT_THROW(l1_weighted_norm(k, 0.5 * k.mu()), DivergenceRisk);
  EXPECT_THROW(OperatorKernel::from_terms({{make_profile("exponential", {-1.0}), I1}}, 1.0), PreconditionError);
}

TEST(KernelTransform, ZeroKernel) {
  EXPECT_EQ(kernel_transform(OperatorKernel::zero(3), 1.0, 1.0).norm(), 0.0);
}

TEST(KernelTransform, ExponentialClosedForm) {
  auto k = OperatorKernel::exponential(1.0, I2);
  for (double xi : {-5.0, 0.0, 0.3, 40.0})
    for (double nu : {0.1, 2.0}) {
      CMat b = kernel_transform(k, xi, nu);
      Complex expected = oracle::exponential_transform(1.0, 1.0, xi, nu);
      EXPECT_LT(std::abs(b(0, 0) - expected), 1e-15);
      EXPECT_LT(std::abs(b(0, 1)), 1e-15);
    }
}

TEST(KernelTransform, BoxcarClosedForm) {
  auto k = OperatorKernel::boxcar(1.0, I1);
  for (double xi : {-3.0, 0.0, 7.0}) {
    Complex s(1.5, xi);
    Complex expected = (1.0 - std::exp(-s)) / (s * oracle::kRoot2Pi);
    EXPECT_LT(std::abs(kernel_transform(k, xi, 1.5)(0, 0) - expected), 1e-14);
  }
}

TEST(KernelTransform, QuadratureMatchesClosedForms) {
  Mat m(2, 2);
  m << 2, 1, 1, 3;
  for (const auto& k : {OperatorKernel::exponential(1.0, m), OperatorKernel::boxcar(0.7, m),
                        OperatorKernel::damped_sine(4.0, 1.0, m)})
    for (double xi : {-10.0, -0.5, 0.0, 2.0, 25.0}) {
      CMat exact = kernel_transform(k, xi, 0.8);
      CMat quad = kernel_transform_quadrature(k, xi, 0.8);
      EXPECT_LT((exact - quad).norm(), 1e-9 * std::max(1.0, exact.norm()));
    }
}

TEST(KernelTransform, BoundedByWeightedNorm) {
  oracle::Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    Mat m = rng.symmetric(3, 1.0);
    auto k = trial % 2 ? OperatorKernel::exponential(rng.uniform(0.1, 3.0), m)
                       : OperatorKernel::damped_sine(rng.uniform(1.0, 8.0), rng.uniform(0.1, 2.0), m);
    double nu = rng.uniform(0.1, 3.0);
    double bound = l1_weighted_norm(k, nu) / oracle::kRoot2Pi;
    for (double xi : log_frequency_grid(1e-2, 1e3, 40))
      for (double s : {-1.0, 1.0}) EXPECT_LE(op_norm(kernel_transform(k, s * xi, nu)), bound + 1e-10);
  }
}

TEST(Convolve, ZeroKernelGivesZero) {
  TimeGrid g(0.0, 0.1, 20);
  EXPECT_EQ(weighted_norm(convolve(OperatorKernel::zero(1), ones_from_zero(g, 1.0))), 0.0);
}

TEST(Convolve, BoxcarWithIndicatorIsHat) {
  TimeGrid g(0.0, 1.0 / 64, 256);
  WeightedSignal u = WeightedSignal::sample(g, 1, 1.0, [](double t) { return Vec::Constant(1, t < 1.0 ? 1.0 : 0.0); });
  WeightedSignal w = convolve(OperatorKernel::boxcar(1.0, I1), u);
  for (int j = 0; j < g.n; ++j) {
    double t = g.t(j);
    double hat = t <= 1.0 ? t : std::max(0.0, 2.0 - t);
    EXPECT_NEAR(w.values()(j, 0), hat, 1e-12);
  }
}

TEST(Convolve, ExponentialWithStepIsSaturatingExponential) {
  TimeGrid g(0.0, 0.01, 500);
  WeightedSignal w = convolve(OperatorKernel::exponential(1.0, I1), ones_from_zero(g, 1.0));
  for (int j = 0; j < g.n; ++j) EXPECT_NEAR(w.values()(j, 0), 1.0 - std::exp(-g.t(j)), 1e-13);
}

TEST(Convolve, MatchesCellQuadratureOracle) {
  oracle::Rng rng(4);
  Mat m = rng.symmetric(2, 1.0);
  auto k = OperatorKernel::from_terms({{make_profile("damped_sine", {5.0, 0.5}), m},
                                       {make_profile("exponential", {2.0}), I2}},
                                      0.0);
  TimeGrid g(0.0, 0.02, 150);
  WeightedSignal u = oracle::smooth_pulses(rng, g, 2, 1.0);
  WeightedSignal lib = convolve(k, u);
  WeightedSignal ref = oracle::cell_convolution(k, u, 256);
  EXPECT_LT(relative_weighted_error(lib, ref), 1e-10);
}

TEST(Convolve, SampledKernelIsPiecewiseConstant) {
  TimeGrid kg(0.0, 0.25, 4);
  std::vector<Mat> s{I1 * 1.0, I1 * 2.0, I1 * 3.0, I1 * 4.0};
  auto k = OperatorKernel::sampled(kg, s, 0.0);
  EXPECT_DOUBLE_EQ(k.evaluate(0.3)(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(k.evaluate(1.5)(0, 0), 0.0);
  EXPECT_NEAR(k.integral(0.0, 1.0)(0, 0), 2.5, 1e-15);
  EXPECT_NEAR(l1_weighted_norm(k, 1e-9), 2.5, 1e-8);
  // Cells of width 0.125 see half a sample cell each: W_k = 0.125 s_{(k-1)/2}.
  TimeGrid g(0.0, 0.125, 16);
  WeightedSignal w = convolve(k, ones_from_zero(g, 1.0));
  double acc = 0.0;
  for (int j = 0; j < g.n; ++j) {
    EXPECT_NEAR(w.values()(j, 0), acc, 1e-14);
    if (j < 8) acc += 0.125 * s[j / 2](0, 0);
  }
}

TEST(Convolve, OutputVanishesBeforeInputSupport) {
  oracle::Rng rng(8);
  TimeGrid g(0.0, 0.01, 400);
  WeightedSignal u = oracle::smooth_pulses(rng, g, 2, 1.0);
  const double a = 1.7;
  for (int j = 0; j < g.n; ++j)
    if (g.t(j) < a) u.values().row(j).setZero();
  WeightedSignal w = convolve(OperatorKernel::exponential(0.5, rng.symmetric(2, 1.0)), u);
  for (int j = 0; j < g.n && g.t(j) <= a; ++j) EXPECT_EQ(w.values().row(j).norm(), 0.0);
}

TEST(ResolventConvolve, InvertsOneMinusConvolution) {
  oracle::Rng rng(12);
  TimeGrid g(0.0, 0.02, 200);
  auto k = OperatorKernel::exponential(1.0, 0.5 * I2);
  WeightedSignal s = oracle::smooth_pulses(rng, g, 2, 1.0);
  WeightedSignal w = resolvent_convolve(k, s);
  EXPECT_LT(relative_weighted_error(w - convolve(k, w), s), 1e-13);
}

TEST(Selfadjointness, ExamplesFromTheCorpus) {
  auto times = default_sample_times(OperatorKernel::exponential(1.0, I2));
  auto id = check_selfadjoint(OperatorKernel::exponential(1.0, I2), times);
  EXPECT_TRUE(id.pass);
  EXPECT_EQ(id.value, 0.0);

  Mat nil(2, 2);
  nil << 0, 1, 0, 0;
  EXPECT_FALSE(check_selfadjoint(OperatorKernel::exponential(1.0, nil), times).pass);

  Mat sym(2, 2);
  sym << 2, 1, 1, 3;
  EXPECT_TRUE(check_selfadjoint(OperatorKernel::exponential(1.0, sym), times).pass);
}

TEST(Commutation, FixedMatrixProfilesCommute) {
  oracle::Rng rng(2);
  auto k = OperatorKernel::damped_sine(3.0, 1.0, rng.symmetric(3, 1.0));
  EXPECT_TRUE(check_commuting(k, all_pairs(default_sample_times(k, 30))).pass);
  EXPECT_TRUE(check_commuting(OperatorKernel::zero(2), all_pairs({0.0, 1.0})).pass);
}

TEST(Commutation, SwitchingBetweenNonCommutingMatricesFails) {
  Mat a1(2, 2), a2(2, 2);
  a1 << 1, 0, 0, 2;
  a2 << 0, 1, 1, 0;
  auto k = switching_kernel(a1, a2);
  EXPECT_TRUE(check_selfadjoint(k, default_sample_times(k)).pass);
  auto c = check_commuting(k, all_pairs(default_sample_times(k, 30)));
  EXPECT_FALSE(c.pass);
  // sup ||[B(t), B(s)]|| = e^{-1} ||[A1, A2]|| = e^{-1}, attained at t = 0, s = 1
  EXPECT_NEAR(c.value, std::exp(-1.0), 1e-12);
  EXPECT_FALSE(check_hypotheses(k, 1.0).pass());
}

TEST(ImBound, ZeroKernel) {
  EXPECT_EQ(estimate_im_bound(OperatorKernel::zero(2), 1.0, default_frequency_grid()).d_est, 0.0);
}

TEST(ImBound, NonIncreasingNonNegativeKernelHasNonPositiveBound) {
  auto r = estimate_im_bound(OperatorKernel::exponential(1.0, I2), 0.0, default_frequency_grid());
  EXPECT_LE(r.d_est, 0.0);
  auto h = check_hypotheses(OperatorKernel::exponential(1.0, I2), 0.0);
  EXPECT_TRUE(h.pass());
  EXPECT_EQ(h.d, 0.0);
}

TEST(ImBound, DampedSineHasNonPositiveBound) {
  // xi Im B^ = -(xi / sqrt(2 pi)) int sin(xi s) sin(4 s) e^{-s} ds, and the integral is
  // (1/2)[1/(1 + (xi-4)^2) - 1/(1 + (xi+4)^2)] > 0 for xi > 0.
  auto k = OperatorKernel::damped_sine(4.0, 1.0, I1);
  auto r = estimate_im_bound(k, 0.0, default_frequency_grid());
  EXPECT_LE(r.d_est, 0.0);
  for (double xi : {0.5, 4.0, 30.0}) {
    double integral = 0.5 * (1.0 / (1.0 + std::pow(xi - 4.0, 2)) - 1.0 / (1.0 + std::pow(xi + 4.0, 2)));
    EXPECT_NEAR(kernel_transform(k, xi, 0.0)(0, 0).imag(), -integral / oracle::kRoot2Pi, 1e-14);
  }
}

TEST(ImBound, DampedCosineHasPositiveBound) {
  auto k = OperatorKernel::damped_cosine(4.0, 1.0, I1);
  auto r = estimate_im_bound(k, 0.0, default_frequency_grid());
  EXPECT_GT(r.d_est, 0.0);
  // Im B^ = -(1/sqrt 2pi) (1/2)[(xi+4)/(1+(xi+4)^2) + (xi-4)/(1+(xi-4)^2)] at the worst frequency.
  double xi = r.worst_xi;
  double integral = 0.5 * ((xi + 4.0) / (1.0 + std::pow(xi + 4.0, 2)) + (xi - 4.0) / (1.0 + std::pow(xi - 4.0, 2)));
  EXPECT_NEAR(r.d_est, -xi * integral / oracle::kRoot2Pi, 1e-12);
}

TEST(Propagation, ExponentialPassesOnLadder) {
  auto k = OperatorKernel::exponential(1.0, I1);
  auto p = verify_4d_propagation(k, 0.0, 0.0, {0.5, 1.0, 2.0, 5.0}, default_frequency_grid());
  EXPECT_TRUE(p.pass);
  // xi Im = -xi^2 / (sqrt(2 pi) ((1 + nu)^2 + xi^2)) <= 0
  EXPECT_LE(p.worst_value, 0.0);
  EXPECT_TRUE(verify_4d_propagation(OperatorKernel::zero(2), 1.0, 0.0, {1.0, 3.0}, default_frequency_grid()).pass);
}

TEST(Propagation, OscillatoryKernelPassesWithMeasuredBound) {
  auto k = OperatorKernel::damped_cosine(4.0, 1.0, I2);
  double nu0 = 0.5;
  double d = std::max(0.0, estimate_im_bound(k, nu0, default_frequency_grid()).d_est);
  auto p = verify_4d_propagation(k, nu0, d, {nu0, 2 * nu0 + 1, 5 * nu0 + 2}, default_frequency_grid());
  EXPECT_GT(d, 0.0);
  EXPECT_TRUE(p.pass);
  EXPECT_GT(p.margin, 0.0);
}

TEST(ProfileRegistry, CustomFamilyIsUsable) {
  register_profile_family("gaussian_tail", [](const std::vector<double>& p) {
    if (p.size() != 1) throw ConfigError("gaussian_tail takes {s}");
    Profile g;
    g.family = "gaussian_tail";
    g.params = p;
    double s = p[0];
    g.value = [s](double t) { return t < 0.0 ? 0.0 : std::exp(-t * t / (s * s)); };
    g.decay = 1.0 / s;
    g.peak = 3.0;
    g.abscissa = -std::numeric_limits<double>::infinity();
    return g;
  });
  auto k = OperatorKernel::from_terms({{make_profile("gaussian_tail", {1.0}), I1}}, 0.0);
  EXPECT_FALSE(k.has_closed_form_transform());
  // int_0^inf e^{-t^2} dt = sqrt(pi)/2 (nu -> 0 limit is approached by small nu)
  EXPECT_NEAR(l1_weighted_norm(k, 1e-12), std::sqrt(oracle::kPi) / 2.0, 1e-8);
  EXPECT_THROW(make_profile("no_such_family", {}), ConfigError);
  EXPECT_THROW(make_profile("exponential", {1.0, 2.0}), ConfigError);
}

TEST(KernelAlgebra, SandwichAndScale) {
  Mat l(2, 2), r(2, 2);
  l << 1, 2, 0, 1;
  r << 3, 0, 1, 1;
  auto k = OperatorKernel::exponential(2.0, I2).sandwiched(l, r).scaled(0.5);
  EXPECT_TRUE(k.has_closed_form_transform());
  EXPECT_LT((k.evaluate(0.4) - 0.5 * std::exp(-0.8) * l * r).norm(), 1e-14);
  EXPECT_THROW(OperatorKernel::exponential(1.0, I1).sandwiched(l, r), DimensionMismatch);
}
