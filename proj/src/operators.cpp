#include "ide/operators.hpp"

#include <Eigen/Eigenvalues>

namespace ide {

namespace {

int layout_dim(const BlockOperator::Layout& layout) {
  int d = 0;
  for (const auto& [name, n] : layout) d += n;
  return d;
}

}  // namespace

BlockOperator::BlockOperator(Mat matrix, Structure structure, Layout layout)
    : matrix_(std::move(matrix)), structure_(structure), layout_(std::move(layout)) {
  if (matrix_.rows() != matrix_.cols()) throw DimensionMismatch("block operator must be square");
  if (!layout_.empty() && layout_dim(layout_) != matrix_.rows())
    throw DimensionMismatch("layout does not add up to the operator size");
  const double scale = matrix_.norm();
  if (structure_ == Structure::skew) {
    if ((matrix_ + matrix_.transpose()).norm() > 1e-12 * scale) throw StructureError("operator is not skew");
  } else if (structure_ == Structure::symmetric_positive) {
    if ((matrix_ - matrix_.transpose()).norm() > 1e-12 * scale) throw StructureError("operator is not symmetric");
    if (matrix_.rows() > 0) {
      Eigen::SelfAdjointEigenSolver<Mat> es(matrix_, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-12 * scale) throw StructureError("operator is not positive");
    }
  }
}

BlockOperator BlockOperator::zero(Layout layout) {
  int d = layout_dim(layout);
  return BlockOperator(Mat::Zero(d, d), Structure::skew, std::move(layout));
}

Gradient1D build_grad_dirichlet_1d(int cells, double h) {
  if (cells < 2) throw PreconditionError("gradient needs at least two cells");
  if (!(h > 0.0)) throw PreconditionError("mesh width must be positive");
  Gradient1D g;
  g.cells = cells;
  g.h = h;
  g.grad = Mat::Zero(cells, cells - 1);
  for (int c = 0; c < cells; ++c) {
    if (c < cells - 1) g.grad(c, c) = 1.0 / h;  // u_{c+1}, interior node c+1 -> column c
    if (c > 0) g.grad(c, c - 1) = -1.0 / h;     // u_c
  }
  g.div = -g.grad.transpose();
  return g;
}

BlockOperator assemble_block_skew(const Mat& g, const BlockOperator::Layout& layout, SkewConvention convention) {
  if (layout.size() != 2) throw DimensionMismatch("skew block operator needs a two-field layout");
  const int n0 = layout[0].second, n1 = layout[1].second;
  if (g.cols() != n0 || g.rows() != n1) throw DimensionMismatch("G does not map field 0 to field 1");
  Mat a = Mat::Zero(n0 + n1, n0 + n1);
  double s = convention == SkewConvention::gradient_adjoint ? 1.0 : -1.0;
  a.topRightCorner(n0, n1) = s * g.transpose();
  a.bottomLeftCorner(n1, n0) = -s * g;
  return BlockOperator(std::move(a), BlockOperator::Structure::skew, layout);
}

SpdRoot spd_sqrt(const Mat& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw PreconditionError("square root needs a square matrix");
  if ((m - m.transpose()).norm() > 1e-12 * std::max(1.0, m.norm())) throw PreconditionError("matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  const Vec& ev = es.eigenvalues();
  if (ev.minCoeff() <= 0.0) throw PreconditionError("matrix is not positive definite");
  const Mat& q = es.eigenvectors();
  return {q * ev.cwiseSqrt().asDiagonal() * q.transpose(), q * ev.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose()};
}

Elasticity1D build_elasticity_1d(int cells, double h, const std::vector<double>& rho_profile,
                                 const std::vector<double>& c_profile) {
  if (static_cast<int>(rho_profile.size()) != cells - 1) throw DimensionMismatch("rho needs one value per interior node");
  if (static_cast<int>(c_profile.size()) != cells) throw DimensionMismatch("C needs one value per cell");
  for (double r : rho_profile)
    if (!(r > 0.0)) throw PreconditionError("rho must be positive");
  for (double c : c_profile)
    if (!(c > 0.0)) throw PreconditionError("C must be positive");
  Elasticity1D e;
  e.gradient = build_grad_dirichlet_1d(cells, h);
  e.rho = Eigen::Map<const Vec>(rho_profile.data(), cells - 1).asDiagonal();
  e.c = Eigen::Map<const Vec>(c_profile.data(), cells).asDiagonal();
  e.c_root = spd_sqrt(e.c);
  e.a = assemble_block_skew(e.gradient.grad, {{"v", cells - 1}, {"T", cells}}, SkewConvention::gradient_adjoint);
  return e;
}

double skew_defect(const Mat& a) {
  double n = a.norm();
  return n > 0.0 ? (a + a.transpose()).norm() / n : 0.0;
}

}  // namespace ide
