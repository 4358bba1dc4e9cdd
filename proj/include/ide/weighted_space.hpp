#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ide/common.hpp"

namespace ide {

// Uniform sampling t_j = t0 + j*dt, j = 0..n-1, of the window [t0, t0 + n*dt).
struct TimeGrid {
  double t0 = 0.0;
  double dt = 1.0;
  int n = 2;

  TimeGrid() = default;
  TimeGrid(double t0_, double dt_, int n_);

  // Grid of n = ceil((t_end - t0)/dt) points starting at t0.
  static TimeGrid covering(double t0, double t_end, double dt);

  double t(int j) const { return t0 + j * dt; }
  double t_end() const { return t0 + n * dt; }
  // Index of the first grid point with t_j >= t (n if none).
  int index_at_or_after(double t) const;

  // Signed DFT frequency of bin k, 2*pi*k'/(n*dt) with k' in [-n/2, n/2).
  double frequency(int k) const;
  double frequency_step() const;

  bool operator==(const TimeGrid& o) const;
  bool operator!=(const TimeGrid& o) const { return !(*this == o); }
};

// Samples of an R^m-valued function on a TimeGrid, element of H_{nu,0}(R;R^m).
// values(j, c) is component c at time t_j.
class WeightedSignal {
 public:
  WeightedSignal() : values_(Mat::Zero(grid_.n, 0)), nu_(1.0) {}  // empty placeholder
  WeightedSignal(TimeGrid grid, int dim, double nu);
  WeightedSignal(TimeGrid grid, Mat values, double nu);

  template <class F>
  static WeightedSignal sample(const TimeGrid& grid, int dim, double nu, F&& f) {
    WeightedSignal s(grid, dim, nu);
    for (int j = 0; j < grid.n; ++j) s.values_.row(j) = Vec(f(grid.t(j))).transpose();
    return s;
  }

  const TimeGrid& grid() const { return grid_; }
  double nu() const { return nu_; }
  int dim() const { return static_cast<int>(values_.cols()); }
  int size() const { return grid_.n; }

  const Mat& values() const { return values_; }
  Mat& values() { return values_; }
  Vec at(int j) const { return values_.row(j).transpose(); }
  void set(int j, const Vec& x) { values_.row(j) = x.transpose(); }

  // Restriction helpers used by the causality harness.
  WeightedSignal truncated_after(double a) const;  // chi_{t <= a} f
  WeightedSignal component_slice(int first, int count) const;

  // e^{-2 nu t_end} |f(t_last)|^2; signals are assumed negligible past the window.
  double truncation_diagnostic() const;

  WeightedSignal& operator+=(const WeightedSignal& o);
  WeightedSignal& operator-=(const WeightedSignal& o);
  WeightedSignal& operator*=(double s);

 private:
  TimeGrid grid_;
  Mat values_;
  double nu_;
};

WeightedSignal operator+(WeightedSignal a, const WeightedSignal& b);
WeightedSignal operator-(WeightedSignal a, const WeightedSignal& b);
WeightedSignal operator*(double s, WeightedSignal a);

// L_nu f sampled on the DFT dual grid. values(k, c) belongs to frequency(k).
struct Spectrum {
  TimeGrid grid;  // time grid it was produced from
  double nu = 0.0;
  Vec frequencies;
  CMat values;

  int size() const { return static_cast<int>(values.rows()); }
  int dim() const { return static_cast<int>(values.cols()); }
};

// Throws DimensionMismatch unless grid, nu and dimension agree.
void require_compatible(const WeightedSignal& f, const WeightedSignal& g, const char* what);

// Trapezoid rule for  int f(t) . g(t) e^{-2 nu t} dt  over the window.
double weighted_inner_product(const WeightedSignal& f, const WeightedSignal& g);
double weighted_norm(const WeightedSignal& f);
// |f - g|_nu / |g|_nu (|f - g|_nu if g vanishes).
double relative_weighted_error(const WeightedSignal& f, const WeightedSignal& g);

// sum_k conj(a_k) . b_k * dxi: the L2(R) pairing of two spectra.
Complex spectral_inner_product(const Spectrum& a, const Spectrum& b);

Spectrum fourier_laplace(const WeightedSignal& f, Exec exec = Exec::parallel);
WeightedSignal inverse_fourier_laplace(const Spectrum& s, const TimeGrid& grid,
                                       Exec exec = Exec::parallel);

// Spectral multiplier (i xi + nu)^p, p in {-1, +1}. Wraps around the window.
WeightedSignal apply_derivative_power(const WeightedSignal& f, int p);

// Causal antiderivative by the left-endpoint rule: F(t_j) = dt * sum_{i<j} f_i.
// Output at t_j only sees samples strictly before t_j.
WeightedSignal causal_antiderivative(const WeightedSignal& f);
// Backward difference (f_j - f_{j-1})/dt with f_{-1} = 0.
WeightedSignal backward_difference(const WeightedSignal& f);

// CSV with header t,c0,...,c{m-1}; 17 significant digits.
void write_csv(std::ostream& os, const WeightedSignal& f);
void write_csv(const std::string& path, const WeightedSignal& f);
WeightedSignal read_csv(std::istream& is, double nu);
WeightedSignal read_csv(const std::string& path, double nu);

}  // namespace ide
