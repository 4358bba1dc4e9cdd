#include "ide/weighted_space.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace ide {

namespace {

constexpr double kMaxExponent = 700.0;

void check_weight_range(const TimeGrid& g, double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw PreconditionError("weight nu must be positive and finite");
  double worst = std::max(std::abs(nu * g.t0), std::abs(nu * g.t_end()));
  if (worst > kMaxExponent) throw RangeError("exp(-nu t) leaves double range on this grid");
}

double trapezoid_weight(int j, int n) { return (j == 0 || j == n - 1) ? 0.5 : 1.0; }

}  // namespace

TimeGrid::TimeGrid(double t0_, double dt_, int n_) : t0(t0_), dt(dt_), n(n_) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw PreconditionError("time step must be positive");
  if (n < 2) throw PreconditionError("time grid needs at least two points");
}

TimeGrid TimeGrid::covering(double t0, double t_end, double dt) {
  if (!(dt > 0.0)) throw PreconditionError("time step must be positive");
  int n = static_cast<int>(std::ceil((t_end - t0) / dt - 1e-9));
  return TimeGrid(t0, dt, std::max(n, 2));
}

int TimeGrid::index_at_or_after(double t) const {
  double x = std::ceil((t - t0) / dt - 1e-9);
  if (x <= 0.0) return 0;
  if (x >= n) return n;
  return static_cast<int>(x);
}

double TimeGrid::frequency(int k) const {
  int kk = (k < n - n / 2) ? k : k - n;
  return kk * frequency_step();
}

double TimeGrid::frequency_step() const { return 2.0 * M_PI / (n * dt); }

bool TimeGrid::operator==(const TimeGrid& o) const {
  double tol = 1e-12 * std::max(1.0, std::abs(dt));
  return n == o.n && std::abs(dt - o.dt) <= tol && std::abs(t0 - o.t0) <= 1e-12 * std::max(1.0, std::abs(t0));
}

WeightedSignal::WeightedSignal(TimeGrid grid, int dim, double nu)
    : grid_(grid), values_(Mat::Zero(grid.n, dim)), nu_(nu) {
  if (dim < 1) throw PreconditionError("signal dimension must be positive");
  check_weight_range(grid_, nu_);
}

WeightedSignal::WeightedSignal(TimeGrid grid, Mat values, double nu)
    : grid_(grid), values_(std::move(values)), nu_(nu) {
  if (values_.rows() != grid_.n) throw DimensionMismatch("signal rows must equal grid size");
  if (values_.cols() < 1) throw PreconditionError("signal dimension must be positive");
  check_weight_range(grid_, nu_);
}

WeightedSignal WeightedSignal::truncated_after(double a) const {
  WeightedSignal out = *this;
  for (int j = 0; j < grid_.n; ++j)
    if (grid_.t(j) > a) out.values_.row(j).setZero();
  return out;
}

WeightedSignal WeightedSignal::component_slice(int first, int count) const {
  if (first < 0 || count < 1 || first + count > dim()) throw DimensionMismatch("component slice out of range");
  return WeightedSignal(grid_, Mat(values_.middleCols(first, count)), nu_);
}

double WeightedSignal::truncation_diagnostic() const {
  return std::exp(-2.0 * nu_ * grid_.t_end()) * values_.row(grid_.n - 1).squaredNorm();
}

WeightedSignal& WeightedSignal::operator+=(const WeightedSignal& o) {
  require_compatible(*this, o, "signal sum");
  values_ += o.values_;
  return *this;
}

WeightedSignal& WeightedSignal::operator-=(const WeightedSignal& o) {
  require_compatible(*this, o, "signal difference");
  values_ -= o.values_;
  return *this;
}

WeightedSignal& WeightedSignal::operator*=(double s) {
  values_ *= s;
  return *this;
}

WeightedSignal operator+(WeightedSignal a, const WeightedSignal& b) { return a += b; }
WeightedSignal operator-(WeightedSignal a, const WeightedSignal& b) { return a -= b; }
WeightedSignal operator*(double s, WeightedSignal a) { return a *= s; }

void require_compatible(const WeightedSignal& f, const WeightedSignal& g, const char* what) {
  if (f.grid() != g.grid()) throw DimensionMismatch(std::string(what) + ": time grids differ");
  if (f.nu() != g.nu()) throw DimensionMismatch(std::string(what) + ": weights differ");
  if (f.dim() != g.dim()) throw DimensionMismatch(std::string(what) + ": dimensions differ");
}

double weighted_inner_product(const WeightedSignal& f, const WeightedSignal& g) {
  require_compatible(f, g, "inner product");
  const auto& grid = f.grid();
  double sum = 0.0;
  for (int j = 0; j < grid.n; ++j) {
    double w = trapezoid_weight(j, grid.n) * std::exp(-2.0 * f.nu() * grid.t(j));
    sum += w * f.values().row(j).dot(g.values().row(j));
  }
  return sum * grid.dt;
}

double weighted_norm(const WeightedSignal& f) { return std::sqrt(std::max(0.0, weighted_inner_product(f, f))); }

double relative_weighted_error(const WeightedSignal& f, const WeightedSignal& g) {
  double diff = weighted_norm(f - g);
  double ref = weighted_norm(g);
  return ref > 0.0 ? diff / ref : diff;
}

Complex spectral_inner_product(const Spectrum& a, const Spectrum& b) {
  if (a.size() != b.size() || a.dim() != b.dim()) throw DimensionMismatch("spectra differ in shape");
  if (a.grid != b.grid || a.nu != b.nu) throw DimensionMismatch("spectra live on different grids");
  Complex sum = 0.0;
  for (int k = 0; k < a.size(); ++k) sum += a.values.row(k).dot(b.values.row(k));
  return sum * a.grid.frequency_step();
}

Spectrum fourier_laplace(const WeightedSignal& f, Exec exec) {
  const TimeGrid& g = f.grid();
  const int n = g.n;
  const int m = f.dim();
  Spectrum s;
  s.grid = g;
  s.nu = f.nu();
  s.frequencies.resize(n);
  for (int k = 0; k < n; ++k) s.frequencies(k) = g.frequency(k);
  s.values.resize(n, m);

  const double scale = g.dt / kSqrt2Pi;
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (int c = 0; c < m; ++c) {
    Eigen::FFT<double> fft;
    std::vector<Complex> in(n), out;
    for (int j = 0; j < n; ++j) in[j] = std::exp(-f.nu() * g.t(j)) * f.values()(j, c);
    fft.fwd(out, in);
    for (int k = 0; k < n; ++k)
      s.values(k, c) = scale * std::exp(Complex(0.0, -s.frequencies(k) * g.t0)) * out[k];
  }
  return s;
}

WeightedSignal inverse_fourier_laplace(const Spectrum& s, const TimeGrid& grid, Exec exec) {
  if (s.grid != grid || s.size() != grid.n) throw DimensionMismatch("spectrum was not produced on this grid");
  const int n = grid.n;
  const int m = s.dim();
  WeightedSignal out(grid, m, s.nu);
  const double scale = kSqrt2Pi / grid.dt;
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (int c = 0; c < m; ++c) {
    Eigen::FFT<double> fft;
    std::vector<Complex> in(n), res;
    for (int k = 0; k < n; ++k)
      in[k] = scale * std::exp(Complex(0.0, s.frequencies(k) * grid.t0)) * s.values(k, c);
    fft.inv(res, in);
    for (int j = 0; j < n; ++j) out.values()(j, c) = std::exp(s.nu * grid.t(j)) * res[j].real();
  }
  return out;
}

WeightedSignal apply_derivative_power(const WeightedSignal& f, int p) {
  if (p != 1 && p != -1) throw PreconditionError("derivative power must be +1 or -1");
  Spectrum s = fourier_laplace(f);
  for (int k = 0; k < s.size(); ++k) {
    Complex mult(f.nu(), s.frequencies(k));
    s.values.row(k) *= (p == 1) ? mult : 1.0 / mult;
  }
  return inverse_fourier_laplace(s, f.grid());
}

WeightedSignal causal_antiderivative(const WeightedSignal& f) {
  WeightedSignal out(f.grid(), f.dim(), f.nu());
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(f.dim());
  for (int j = 0; j < f.size(); ++j) {
    out.values().row(j) = acc * f.grid().dt;
    acc += f.values().row(j);
  }
  return out;
}

WeightedSignal backward_difference(const WeightedSignal& f) {
  WeightedSignal out(f.grid(), f.dim(), f.nu());
  const double inv = 1.0 / f.grid().dt;
  out.values().row(0) = f.values().row(0) * inv;
  for (int j = 1; j < f.size(); ++j) out.values().row(j) = (f.values().row(j) - f.values().row(j - 1)) * inv;
  return out;
}

void write_csv(std::ostream& os, const WeightedSignal& f) {
  os << "t";
  for (int c = 0; c < f.dim(); ++c) os << ",c" << c;
  os << '\n' << std::setprecision(17);
  for (int j = 0; j < f.size(); ++j) {
    os << f.grid().t(j);
    for (int c = 0; c < f.dim(); ++c) os << ',' << f.values()(j, c);
    os << '\n';
  }
}

void write_csv(const std::string& path, const WeightedSignal& f) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  write_csv(os, f);
}

WeightedSignal read_csv(std::istream& is, double nu) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty CSV");
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("bad CSV number: " + cell);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw ConfigError("ragged CSV row");
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2 || rows.front().size() < 2) throw ConfigError("CSV needs two rows and a value column");
  const int n = static_cast<int>(rows.size());
  const int m = static_cast<int>(rows.front().size()) - 1;
  double t0 = rows[0][0];
  double dt = rows[1][0] - rows[0][0];
  for (int j = 1; j < n; ++j)
    if (std::abs(rows[j][0] - (t0 + j * dt)) > 1e-9 * std::max(1.0, std::abs(rows[j][0])))
      throw ConfigError("CSV time column is not uniform");
  Mat v(n, m);
  for (int j = 0; j < n; ++j)
    for (int c = 0; c < m; ++c) v(j, c) = rows[j][c + 1];
  return WeightedSignal(TimeGrid(t0, dt, n), std::move(v), nu);
}

WeightedSignal read_csv(const std::string& path, double nu) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  return read_csv(is, nu);
}

}  // namespace ide
