#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ide {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline const double kSqrt2Pi = 2.5066282746310002;  // sqrt(2*pi)

// Error hierarchy. Every failure the library reports derives from ide::Error.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct RangeError : Error {
  using Error::Error;
};
// nu below the kernel's decay parameter mu: weighted integrals may diverge.
struct DivergenceRisk : Error {
  using Error::Error;
};
// (1 - sqrt(2pi) B^) is not certified invertible by the Neumann series.
struct InvertibilityError : Error {
  using Error::Error;
};
struct PreconditionError : Error {
  using Error::Error;
};
struct EvaluationError : Error {
  using Error::Error;
};
struct SingularSystem : Error {
  using Error::Error;
};
struct StructureError : Error {
  using Error::Error;
};
struct MarginGateError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

// Execution policy for the data-parallel kernels. `serial` runs the same
// code path on one thread; bit-identical results are guaranteed because all
// reductions happen in index order after the parallel section.
enum class Exec { serial, parallel };

// Largest singular value.
double op_norm(const Mat& m);
double op_norm(const CMat& m);

// (M - M*) / (2i) and (M + M*) / 2; both Hermitian.
CMat imag_part(const CMat& m);
CMat hermitian_part(const CMat& m);

double lambda_max_hermitian(const CMat& h);
double lambda_min_hermitian(const CMat& h);

}  // namespace ide
