#include "ide/common.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace ide {

double op_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

double op_norm(const CMat& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  return Eigen::JacobiSVD<CMat>(m).singularValues()(0);
}

CMat imag_part(const CMat& m) { return (m - m.adjoint()) / Complex(0.0, 2.0); }

CMat hermitian_part(const CMat& m) { return (m + m.adjoint()) * 0.5; }

double lambda_max_hermitian(const CMat& h) {
  if (h.rows() == 1) return h(0, 0).real();
  Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double lambda_min_hermitian(const CMat& h) {
  if (h.rows() == 1) return h(0, 0).real();
  Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace ide
