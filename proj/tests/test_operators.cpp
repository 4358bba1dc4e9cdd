#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "ide/operators.hpp"
#include "oracles.hpp"

using namespace ide;

TEST(Gradient, HandComputedFourCellStencil) {
  // Nodes x_1..x_3 interior, h = 1/4, u = 1 at interior nodes, 0 on the boundary.
  auto g = build_grad_dirichlet_1d(4, 0.25);
  ASSERT_EQ(g.grad.rows(), 4);
  ASSERT_EQ(g.grad.cols(), 3);
  Vec gu = g.grad * Vec::Ones(3);
  Vec expected(4);
  expected << 4.0, 0.0, 0.0, -4.0;
  EXPECT_LT((gu - expected).norm(), 1e-14);
  EXPECT_EQ(g.div, -g.grad.transpose());
}

TEST(Gradient, LinearProfileHasUnitSlopeInTheInterior) {
  const int cells = 10;
  const double h = 0.1;
  auto g = build_grad_dirichlet_1d(cells, h);
  Vec u(cells - 1);
  for (int i = 0; i < cells - 1; ++i) u(i) = (i + 1) * h;
  Vec gu = g.grad * u;
  for (int c = 1; c < cells - 1; ++c) EXPECT_NEAR(gu(c), 1.0, 1e-12);
}

TEST(Gradient, DiscreteAdjointness) {
  oracle::Rng rng(41);
  auto g = build_grad_dirichlet_1d(17, 1.0 / 17);
  for (int trial = 0; trial < 20; ++trial) {
    Vec u = Vec::NullaryExpr(16, [&] { return rng.normal(); });
    Vec q = Vec::NullaryExpr(17, [&] { return rng.normal(); });
    EXPECT_NEAR((g.grad * u).dot(q) + u.dot(g.div * q), 0.0, 1e-12);
  }
}

TEST(Gradient, FirstOrderConvergenceOnSmoothData) {
  std::vector<double> err;
  for (int cells : {16, 32, 64, 128}) {
    double h = 1.0 / cells;
    auto g = build_grad_dirichlet_1d(cells, h);
    Vec u(cells - 1);
    for (int i = 0; i < cells - 1; ++i) u(i) = std::sin(oracle::kPi * (i + 1) * h);
    Vec gu = g.grad * u;
    // compare against the derivative at the left node of each cell
    double e = 0.0;
    for (int c = 0; c < cells; ++c) e = std::max(e, std::abs(gu(c) - oracle::kPi * std::cos(oracle::kPi * c * h)));
    err.push_back(e);
  }
  for (double r : oracle::ratios(err)) {
    EXPECT_GT(r, 1.6);
    EXPECT_LT(r, 2.5);
  }
}

TEST(BlockSkew, ZeroGradientGivesZeroOperator) {
  auto a = assemble_block_skew(Mat::Zero(3, 2), {{"u", 2}, {"q", 3}});
  EXPECT_EQ(a.matrix().norm(), 0.0);
  EXPECT_EQ(skew_defect(a.matrix()), 0.0);
}

TEST(BlockSkew, FourCellAssemblyIsSkewWithImaginarySpectrum) {
  auto g = build_grad_dirichlet_1d(4, 0.25);
  for (auto conv : {SkewConvention::gradient_adjoint, SkewConvention::divergence_gradient}) {
    auto a = assemble_block_skew(g.grad, {{"u", 3}, {"q", 4}}, conv);
    ASSERT_EQ(a.dim(), 7);
    EXPECT_EQ((a.matrix() + a.matrix().transpose()).norm(), 0.0);
    Eigen::EigenSolver<Mat> es(a.matrix());
    for (int i = 0; i < 7; ++i) EXPECT_NEAR(es.eigenvalues()(i).real(), 0.0, 1e-12);
  }
}

TEST(BlockSkew, ConventionsDifferBySign) {
  auto g = build_grad_dirichlet_1d(3, 1.0 / 3);
  Mat a = assemble_block_skew(g.grad, {{"u", 2}, {"q", 3}}, SkewConvention::gradient_adjoint).matrix();
  Mat b = assemble_block_skew(g.grad, {{"u", 2}, {"q", 3}}, SkewConvention::divergence_gradient).matrix();
  EXPECT_EQ(a, -b);
  EXPECT_EQ(Mat(a.topRightCorner(2, 3)), Mat(g.grad.transpose()));
}

TEST(BlockSkew, QuadraticFormVanishes) {
  oracle::Rng rng(43);
  auto g = build_grad_dirichlet_1d(12, 1.0 / 12);
  auto a = assemble_block_skew(g.grad, {{"u", 11}, {"q", 12}});
  for (int trial = 0; trial < 20; ++trial) {
    Vec x = Vec::NullaryExpr(23, [&] { return rng.normal(); });
    EXPECT_NEAR(x.dot(a.apply(x)), 0.0, 1e-12 * x.squaredNorm() * a.matrix().norm());
  }
}

TEST(BlockOperator, DeclaredStructureIsVerified) {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  EXPECT_THROW(BlockOperator(m, BlockOperator::Structure::skew, {{"x", 2}}), StructureError);
  Mat s(2, 2);
  s << 2, 1, 1, 2;
  EXPECT_NO_THROW(BlockOperator(s, BlockOperator::Structure::symmetric_positive, {{"x", 2}}));
  EXPECT_THROW(BlockOperator(-s, BlockOperator::Structure::symmetric_positive, {{"x", 2}}), StructureError);
}

TEST(SpdRoot, SquareRootSquaresBack) {
  oracle::Rng rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    Mat c = rng.spd(5, 0.1);
    SpdRoot r = spd_sqrt(c);
    EXPECT_LT((r.sqrt * r.sqrt - c).norm(), 1e-12 * c.norm());
    EXPECT_LT((r.inv_sqrt * r.sqrt - Mat::Identity(5, 5)).norm(), 1e-10);
    EXPECT_LT((r.sqrt - r.sqrt.transpose()).norm(), 1e-12 * c.norm());
  }
  Mat bad(2, 2);
  bad << 1, 0, 0, -1;
  EXPECT_THROW(spd_sqrt(bad), PreconditionError);
}

TEST(Elasticity, UnitCoefficientsGiveScalarWaveBlock) {
  const int cells = 6;
  auto e = build_elasticity_1d(cells, 1.0 / cells, std::vector<double>(cells - 1, 1.0), std::vector<double>(cells, 1.0));
  EXPECT_EQ(e.rho, Mat::Identity(cells - 1, cells - 1));
  EXPECT_LT((e.c_root.sqrt - Mat::Identity(cells, cells)).norm(), 1e-14);
  Mat expected = assemble_block_skew(e.gradient.grad, {{"v", cells - 1}, {"T", cells}}).matrix();
  EXPECT_EQ(e.a.matrix(), expected);
}

TEST(Elasticity, SkewnessIndependentOfCoefficients) {
  oracle::Rng rng(53);
  const int cells = 8;
  std::vector<double> rho(cells - 1), c(cells);
  for (auto& x : rho) x = rng.uniform(0.5, 3.0);
  for (auto& x : c) x = rng.uniform(0.5, 3.0);
  auto e = build_elasticity_1d(cells, 1.0 / cells, rho, c);
  EXPECT_EQ(skew_defect(e.a.matrix()), 0.0);
  EXPECT_THROW(build_elasticity_1d(cells, 1.0 / cells, std::vector<double>(cells - 1, -1.0), c), PreconditionError);
}
