#pragma once

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ide/common.hpp"
#include "ide/weighted_space.hpp"

namespace ide {

/// Scalar time profile g on [0, inf). A closed-form kernel is a finite sum of
/// profiles times constant matrices, B(t) = sum_k g_k(t) M_k.
///
/// Optional callbacks supply closed forms; an empty callback falls back to
/// quadrature. `laplace(sigma)` is  int_0^inf e^{-sigma t} g(t) dt  (no 1/sqrt(2 pi)).
struct Profile {
  std::string family;
  std::vector<double> params;

  std::function<double(double)> value;
  std::function<Complex(Complex)> laplace;
  std::function<double(double)> weighted_l1;           // int e^{-nu t} |g(t)| dt
  std::function<double(double, double)> integral;      // int_a^b g(t) dt

  std::vector<double> breakpoints;  // discontinuities of g or g'
  double decay = 0.0;               // |g(t)| <= peak * e^{-decay t}
  double peak = 1.0;
  double support_end = std::numeric_limits<double>::infinity();
  double abscissa = 0.0;            // weighted integrals converge for nu > abscissa
};

using ProfileFactory = std::function<Profile(const std::vector<double>&)>;

// Registry of named profile families addressed from kernel description files.
// Built in: "exponential" {a}, "boxcar" {T}, "damped_sine" {omega, a}, "damped_cosine" {omega, a},
// "exponential_window" {a, t_begin, t_end}.
void register_profile_family(const std::string& name, ProfileFactory factory);
Profile make_profile(const std::string& name, const std::vector<double>& params);
std::vector<std::string> registered_profile_families();

// Matrix-valued memory kernel B: R>=0 -> R^{m x m} with finite weighted L1 norm
// for nu >= mu. Immutable after construction.
class OperatorKernel {
 public:
  struct Term {
    Profile profile;
    Mat matrix;
  };

  static OperatorKernel zero(int dim);
  static OperatorKernel exponential(double a, Mat m0);
  static OperatorKernel boxcar(double length, Mat m0);
  static OperatorKernel damped_sine(double omega, double a, Mat m0);
  static OperatorKernel damped_cosine(double omega, double a, Mat m0);
  static OperatorKernel from_terms(std::vector<Term> terms, double mu);
  // Piecewise-constant samples: B(t) = samples[j] on [t_j, t_j + dt); zero elsewhere.
  static OperatorKernel sampled(TimeGrid grid, std::vector<Mat> samples, double mu);

  int dim() const { return dim_; }
  double mu() const { return mu_; }
  bool is_sampled() const { return !samples_.empty(); }
  bool is_zero() const;
  const std::vector<Term>& terms() const { return terms_; }
  const TimeGrid& sample_grid() const { return sample_grid_; }
  const std::vector<Mat>& samples() const { return samples_; }

  Mat evaluate(double t) const;
  Mat integral(double a, double b) const;  // int_a^b B(t) dt, B = 0 for t < 0

  // Every term has a closed-form Laplace transform (sampled kernels count).
  bool has_closed_form_transform() const;

  // t -> L B(t) R. Closed-form terms stay closed-form.
  OperatorKernel sandwiched(const Mat& left, const Mat& right) const;
  OperatorKernel scaled(double s) const;

  // Union of term breakpoints (or sample cell edges), sorted.
  std::vector<double> breakpoints() const;
  // Time beyond which e^{-nu t} ||B(t)|| integrates to less than tol.
  double horizon(double nu, double tol) const;

 private:
  int dim_ = 0;
  double mu_ = 0.0;
  std::vector<Term> terms_;
  TimeGrid sample_grid_;
  std::vector<Mat> samples_;
};

// int_0^inf e^{-nu t} ||B(t)|| dt. Throws DivergenceRisk if nu < mu.
double l1_weighted_norm(const OperatorKernel& b, double nu);

// B^(xi - i nu) = (1/sqrt(2 pi)) int_0^inf e^{-i xi s} e^{-nu s} B(s) ds.
CMat kernel_transform(const OperatorKernel& b, double xi, double nu);
// The same integral by composite Gauss-Legendre quadrature, ignoring closed forms.
CMat kernel_transform_quadrature(const OperatorKernel& b, double xi, double nu);

// Evaluation handle for B^ on the lower half plane.
struct KernelTransform {
  const OperatorKernel* kernel = nullptr;
  bool closed_form = false;

  explicit KernelTransform(const OperatorKernel& k)
      : kernel(&k), closed_form(k.has_closed_form_transform()) {}
  CMat operator()(double xi, double nu) const { return kernel_transform(*kernel, xi, nu); }
};

/// Cell-integrated kernel weights W_k = int_{(k-1)dt}^{k dt} B, k = 1..n.
/// Convolution with a left-endpoint signal uses (B*u)_j = sum_{k>=1} W_k u_{j-k},
/// so the output at t_j depends on u_i for i < j only.
class ConvolutionWeights {
 public:
  ConvolutionWeights() = default;
  ConvolutionWeights(const OperatorKernel& b, double dt, int n);

  int dim() const { return dim_; }
  int size() const { return n_; }
  bool empty() const { return n_ == 0 || zero_; }

  // sum_{k=1}^{j} W_k x_{j-k} with x_i = past.row(i), i < j.
  Vec history(const Mat& past, int j) const;
  Mat weight(int k) const;  // W_k

 private:
  int dim_ = 0;
  int n_ = 0;
  bool zero_ = true;
  std::vector<Vec> scalar_;  // per term: w(k-1) = int over cell k of g
  std::vector<Mat> matrices_;
  std::vector<Mat> full_;    // sampled kernels: W_k as full matrices
};

// Causal discrete convolution on u's grid. Throws DivergenceRisk if u.nu < mu.
WeightedSignal convolve(const OperatorKernel& b, const WeightedSignal& u,
                        Exec exec = Exec::parallel);
// Solves w - B*w = s by forward recursion (the discrete (1 - B*)^{-1}).
WeightedSignal resolvent_convolve(const OperatorKernel& b, const WeightedSignal& s);

struct HypothesisCheck {
  bool pass = true;
  double value = 0.0;  // max asymmetry / commutator norm
  double scale = 0.0;  // max ||B(t)|| (or its square)
  double worst_t = 0.0;
  double worst_s = 0.0;
};

// Hypothesis (i): max ||B(t) - B(t)^T|| <= 1e-12 max ||B(t)||.
HypothesisCheck check_selfadjoint(const OperatorKernel& b, const std::vector<double>& times);
// Hypothesis (ii): max ||B(t)B(s) - B(s)B(t)|| <= 1e-12 max ||B(t)||^2.
HypothesisCheck check_commuting(const OperatorKernel& b,
                                const std::vector<std::pair<double, double>>& pairs);

std::vector<double> default_sample_times(const OperatorKernel& b, int count = 96);
std::vector<std::pair<double, double>> all_pairs(const std::vector<double>& times);

// Positive frequencies, log-spaced on [xi_min, xi_max]. `refine` multiplies the count.
std::vector<double> log_frequency_grid(double xi_min, double xi_max, int count, int refine = 1);
std::vector<double> default_frequency_grid(int refine = 1);

struct ImBoundEstimate {
  double d_est = 0.0;   // sup over grid of lambda_max(xi Im B^(xi - i nu0))
  double worst_xi = 0.0;
  double tail_transform_bound = 0.0;  // ||B^|| <= |B|_{L1,nu0}/sqrt(2 pi) beyond the grid
};

// Hypothesis (iii) estimate on a frequency grid. Only xi > 0 are scanned; with (i)
// the map xi -> xi Im B^(xi - i nu0) is even.
ImBoundEstimate estimate_im_bound(const OperatorKernel& b, double nu0,
                                  const std::vector<double>& freq_grid,
                                  Exec exec = Exec::parallel);

struct PropagationReport {
  bool pass = true;
  double bound = 0.0;        // 4d
  double worst_value = -std::numeric_limits<double>::infinity();
  double worst_xi = 0.0;
  double worst_nu = 0.0;
  double margin = 0.0;       // bound - worst_value
};

// Checks xi * lambda_max(Im B^(xi - i nu)) <= 4d + tol for every nu in nu_list.
PropagationReport verify_4d_propagation(const OperatorKernel& b, double nu0, double d,
                                        const std::vector<double>& nu_list,
                                        const std::vector<double>& freq_grid,
                                        double tol = 1e-10);

struct KernelHypothesisReport {
  HypothesisCheck selfadjoint;
  HypothesisCheck commuting;
  ImBoundEstimate im_bound;
  double d = 0.0;  // max(0, d_est)
  double l1_at_nu0 = 0.0;
  bool pass() const { return selfadjoint.pass && commuting.pass; }
};

KernelHypothesisReport check_hypotheses(const OperatorKernel& b, double nu0, int refine = 1);

}  // namespace ide
