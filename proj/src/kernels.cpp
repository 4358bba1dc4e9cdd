#include "ide/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include <boost/math/quadrature/gauss.hpp>

namespace ide {

namespace {

using GL = boost::math::quadrature::gauss<double, 20>;

Complex laplace_interval(double rate_re, double rate_im, double a, double b) {
  // int_a^b e^{-s t} dt with s = rate_re + i rate_im
  Complex s(rate_re, rate_im);
  if (std::abs(s) * (b - a) < 1e-8) return (b - a) * std::exp(-s * a);
  return (std::exp(-s * a) - std::exp(-s * b)) / s;
}

Profile exponential_profile(const std::vector<double>& p) {
  if (p.size() != 1) throw ConfigError("exponential profile takes {a}");
  double a = p[0];
  Profile g;
  g.family = "exponential";
  g.params = p;
  g.value = [a](double t) { return t < 0.0 ? 0.0 : std::exp(-a * t); };
  g.laplace = [a](Complex s) { return 1.0 / (s + a); };
  g.weighted_l1 = [a](double nu) { return 1.0 / (nu + a); };
  g.integral = [a](double lo, double hi) {
    lo = std::max(lo, 0.0);
    if (hi <= lo) return 0.0;
    return laplace_interval(a, 0.0, lo, hi).real();
  };
  g.decay = a;
  g.abscissa = -a;
  return g;
}

Profile boxcar_profile(const std::vector<double>& p) {
  if (p.size() != 1 || !(p[0] > 0.0)) throw ConfigError("boxcar profile takes {T > 0}");
  double len = p[0];
  Profile g;
  g.family = "boxcar";
  g.params = p;
  g.value = [len](double t) { return (t >= 0.0 && t < len) ? 1.0 : 0.0; };
  g.laplace = [len](Complex s) { return laplace_interval(s.real(), s.imag(), 0.0, len); };
  g.weighted_l1 = [len](double nu) { return laplace_interval(nu, 0.0, 0.0, len).real(); };
  g.integral = [len](double lo, double hi) {
    lo = std::max(lo, 0.0);
    hi = std::min(hi, len);
    return hi > lo ? hi - lo : 0.0;
  };
  g.breakpoints = {len};
  g.support_end = len;
  g.abscissa = -std::numeric_limits<double>::infinity();
  return g;
}

Profile damped_sine_profile(const std::vector<double>& p) {
  if (p.size() != 2) throw ConfigError("damped_sine profile takes {omega, a}");
  double w = p[0], a = p[1];
  Profile g;
  g.family = "damped_sine";
  g.params = p;
  g.value = [w, a](double t) { return t < 0.0 ? 0.0 : std::sin(w * t) * std::exp(-a * t); };
  g.laplace = [w, a](Complex s) { return w / ((s + a) * (s + a) + w * w); };
  g.integral = [w, a](double lo, double hi) {
    lo = std::max(lo, 0.0);
    if (hi <= lo) return 0.0;
    // Im int e^{-(a - i w) t}
    return laplace_interval(a, -w, lo, hi).imag();
  };
  g.decay = a;
  g.abscissa = -a;
  return g;
}

Profile damped_cosine_profile(const std::vector<double>& p) {
  if (p.size() != 2) throw ConfigError("damped_cosine profile takes {omega, a}");
  double w = p[0], a = p[1];
  Profile g;
  g.family = "damped_cosine";
  g.params = p;
  g.value = [w, a](double t) { return t < 0.0 ? 0.0 : std::cos(w * t) * std::exp(-a * t); };
  g.laplace = [w, a](Complex s) { return (s + a) / ((s + a) * (s + a) + w * w); };
  g.integral = [w, a](double lo, double hi) {
    lo = std::max(lo, 0.0);
    if (hi <= lo) return 0.0;
    return laplace_interval(a, -w, lo, hi).real();
  };
  g.decay = a;
  g.abscissa = -a;
  return g;
}

Profile exponential_window_profile(const std::vector<double>& p) {
  if (p.size() != 3 || !(p[2] > p[1]) || p[1] < 0.0)
    throw ConfigError("exponential_window profile takes {a, t_begin >= 0, t_end > t_begin}");
  double a = p[0], tb = p[1], te = p[2];
  Profile g;
  g.family = "exponential_window";
  g.params = p;
  g.value = [a, tb, te](double t) { return (t >= tb && t < te) ? std::exp(-a * t) : 0.0; };
  g.laplace = [a, tb, te](Complex s) { return laplace_interval((s + a).real(), s.imag(), tb, te); };
  g.weighted_l1 = [a, tb, te](double nu) { return laplace_interval(nu + a, 0.0, tb, te).real(); };
  g.integral = [a, tb, te](double lo, double hi) {
    lo = std::max(lo, tb);
    hi = std::min(hi, te);
    return hi > lo ? laplace_interval(a, 0.0, lo, hi).real() : 0.0;
  };
  g.breakpoints = {tb, te};
  g.decay = a;
  g.peak = std::exp(-a * tb);
  g.support_end = te;
  g.abscissa = -std::numeric_limits<double>::infinity();
  return g;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, ProfileFactory>& registry() {
  static std::map<std::string, ProfileFactory> r = {
      {"exponential", exponential_profile},
      {"boxcar", boxcar_profile},
      {"damped_sine", damped_sine_profile},
      {"damped_cosine", damped_cosine_profile},
      {"exponential_window", exponential_window_profile},
  };
  return r;
}

void require_square(const Mat& m, int dim) {
  if (m.rows() != m.cols()) throw DimensionMismatch("kernel matrices must be square");
  if (dim >= 0 && m.rows() != dim) throw DimensionMismatch("kernel matrices differ in size");
}

void require_weight(const OperatorKernel& b, double nu) {
  if (nu < b.mu()) throw DivergenceRisk("weight below the kernel decay parameter");
}

double oscillation_scale(const Profile& g) {
  return (g.family == "damped_sine" || g.family == "damped_cosine") ? std::abs(g.params[0]) : 0.0;
}

// Integration nodes: [0, horizon] split at breakpoints, chopped so each piece
// spans a bounded number of oscillations and decay lengths.
std::vector<double> quadrature_nodes(std::vector<double> breaks, double horizon, double rate, double osc) {
  breaks.push_back(0.0);
  breaks.push_back(horizon);
  std::sort(breaks.begin(), breaks.end());
  double piece = std::min({1.0, 8.0 / (osc + 1.0), 4.0 / std::max(rate, 1e-12)});
  std::vector<double> nodes;
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    double a = std::max(breaks[i], 0.0), b = std::min(breaks[i + 1], horizon);
    if (b <= a) continue;
    int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / piece)));
    for (int k = 0; k < pieces; ++k) nodes.push_back(a + (b - a) * k / pieces);
  }
  nodes.push_back(horizon);
  return nodes;
}

template <class F>
auto integrate_nodes(const std::vector<double>& nodes, F f) {
  decltype(f(0.0)) sum{};
  for (size_t i = 0; i + 1 < nodes.size(); ++i) sum += GL::integrate(f, nodes[i], nodes[i + 1]);
  return sum;
}

double term_horizon(const Profile& g, double mnorm, double nu, double tol) {
  if (std::isfinite(g.support_end)) return g.support_end;
  double rate = g.decay + nu;
  if (!(rate > 0.0)) throw DivergenceRisk("kernel term does not decay at this weight");
  double scale = std::max(g.peak * mnorm / (rate * tol), 1.0);
  double t = std::log(scale) / rate;
  for (double b : g.breakpoints) t = std::max(t, b);
  return std::max(t, 1.0 / rate);
}

Complex term_laplace_quadrature(const Profile& g, double mnorm, double xi, double nu) {
  double h = term_horizon(g, mnorm, nu, 1e-16);
  auto nodes = quadrature_nodes(g.breakpoints, h, g.decay + nu, std::abs(xi) + oscillation_scale(g));
  Complex s(nu, xi);
  return integrate_nodes(nodes, [&](double t) { return std::exp(-s * t) * g.value(t); });
}

double profile_integral(const Profile& g, double a, double b) {
  a = std::max(a, 0.0);
  if (b <= a) return 0.0;
  if (g.integral) return g.integral(a, b);
  std::vector<double> br{a, b};
  for (double x : g.breakpoints)
    if (x > a && x < b) br.push_back(x);
  std::sort(br.begin(), br.end());
  double w = 0.0;
  for (size_t i = 0; i + 1 < br.size(); ++i) w += GL::integrate(g.value, br[i], br[i + 1]);
  return w;
}

}  // namespace

void register_profile_family(const std::string& name, ProfileFactory factory) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  registry()[name] = std::move(factory);
}

Profile make_profile(const std::string& name, const std::vector<double>& params) {
  ProfileFactory f;
  {
    std::lock_guard<std::mutex> lock(registry_mutex());
    auto it = registry().find(name);
    if (it == registry().end()) throw ConfigError("unknown kernel family '" + name + "'");
    f = it->second;
  }
  Profile g = f(params);
  if (!g.value) throw ConfigError("kernel family '" + name + "' has no value callback");
  return g;
}

std::vector<std::string> registered_profile_families() {
  std::lock_guard<std::mutex> lock(registry_mutex());
  std::vector<std::string> names;
  for (const auto& [k, v] : registry()) names.push_back(k);
  return names;
}

// ---------------------------------------------------------------------------

OperatorKernel OperatorKernel::zero(int dim) {
  if (dim < 1) throw PreconditionError("kernel dimension must be positive");
  OperatorKernel k;
  k.dim_ = dim;
  return k;
}

namespace {

// Smallest convenient mu with a finite weighted norm: 0 for decaying profiles.
double default_mu(double decay) { return decay > 0.0 ? 0.0 : 1.0 - decay; }

}  // namespace

OperatorKernel OperatorKernel::exponential(double a, Mat m0) {
  return from_terms({{exponential_profile({a}), std::move(m0)}}, default_mu(a));
}

OperatorKernel OperatorKernel::boxcar(double length, Mat m0) {
  return from_terms({{boxcar_profile({length}), std::move(m0)}}, 0.0);
}

OperatorKernel OperatorKernel::damped_sine(double omega, double a, Mat m0) {
  return from_terms({{damped_sine_profile({omega, a}), std::move(m0)}}, default_mu(a));
}

OperatorKernel OperatorKernel::damped_cosine(double omega, double a, Mat m0) {
  return from_terms({{damped_cosine_profile({omega, a}), std::move(m0)}}, default_mu(a));
}

OperatorKernel OperatorKernel::from_terms(std::vector<Term> terms, double mu) {
  if (terms.empty()) throw PreconditionError("kernel needs at least one term (use zero())");
  if (!(mu >= 0.0)) throw PreconditionError("decay parameter mu must be >= 0");
  OperatorKernel k;
  k.dim_ = static_cast<int>(terms.front().matrix.rows());
  for (const auto& t : terms) {
    require_square(t.matrix, k.dim_);
    if (!t.profile.value) throw PreconditionError("profile without value callback");
    if (mu <= t.profile.abscissa) throw PreconditionError("mu below the abscissa of a profile");
  }
  k.mu_ = mu;
  k.terms_ = std::move(terms);
  return k;
}

OperatorKernel OperatorKernel::sampled(TimeGrid grid, std::vector<Mat> samples, double mu) {
  if (samples.empty() || static_cast<int>(samples.size()) != grid.n)
    throw DimensionMismatch("one sample matrix per grid point required");
  if (grid.t0 < 0.0) throw PreconditionError("sampled kernels live on t >= 0");
  if (!(mu >= 0.0)) throw PreconditionError("decay parameter mu must be >= 0");
  OperatorKernel k;
  k.dim_ = static_cast<int>(samples.front().rows());
  for (const auto& s : samples) require_square(s, k.dim_);
  k.mu_ = mu;
  k.sample_grid_ = grid;
  k.samples_ = std::move(samples);
  return k;
}

bool OperatorKernel::is_zero() const {
  for (const auto& t : terms_)
    if (!t.matrix.isZero(0.0)) return false;
  for (const auto& s : samples_)
    if (!s.isZero(0.0)) return false;
  return true;
}

Mat OperatorKernel::evaluate(double t) const {
  Mat out = Mat::Zero(dim_, dim_);
  if (t < 0.0) return out;
  if (is_sampled()) {
    double x = (t - sample_grid_.t0) / sample_grid_.dt;
    if (x >= 0.0 && x < sample_grid_.n) out = samples_[static_cast<int>(std::floor(x))];
    return out;
  }
  for (const auto& term : terms_) out += term.profile.value(t) * term.matrix;
  return out;
}

Mat OperatorKernel::integral(double a, double b) const {
  Mat out = Mat::Zero(dim_, dim_);
  a = std::max(a, 0.0);
  if (b <= a) return out;
  if (is_sampled()) {
    const auto& g = sample_grid_;
    for (int j = 0; j < g.n; ++j) {
      double lo = std::max(a, g.t(j)), hi = std::min(b, g.t(j) + g.dt);
      if (hi > lo) out += (hi - lo) * samples_[j];
    }
    return out;
  }
  for (const auto& term : terms_) out += profile_integral(term.profile, a, b) * term.matrix;
  return out;
}

bool OperatorKernel::has_closed_form_transform() const {
  if (is_sampled()) return true;
  return std::all_of(terms_.begin(), terms_.end(), [](const Term& t) { return bool(t.profile.laplace); });
}

OperatorKernel OperatorKernel::sandwiched(const Mat& left, const Mat& right) const {
  if (left.cols() != dim_ || right.rows() != dim_ || left.rows() != right.cols())
    throw DimensionMismatch("sandwich factors do not match the kernel");
  if (is_sampled()) {
    std::vector<Mat> s;
    s.reserve(samples_.size());
    for (const auto& m : samples_) s.push_back(left * m * right);
    return sampled(sample_grid_, std::move(s), mu_);
  }
  if (terms_.empty()) return zero(static_cast<int>(left.rows()));
  std::vector<Term> t = terms_;
  for (auto& term : t) term.matrix = left * term.matrix * right;
  return from_terms(std::move(t), mu_);
}

OperatorKernel OperatorKernel::scaled(double s) const {
  OperatorKernel k = *this;
  for (auto& t : k.terms_) t.matrix *= s;
  for (auto& m : k.samples_) m *= s;
  return k;
}

std::vector<double> OperatorKernel::breakpoints() const {
  std::vector<double> out;
  if (is_sampled()) {
    for (int j = 0; j <= sample_grid_.n; ++j) out.push_back(sample_grid_.t0 + j * sample_grid_.dt);
    return out;
  }
  for (const auto& t : terms_) out.insert(out.end(), t.profile.breakpoints.begin(), t.profile.breakpoints.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double OperatorKernel::horizon(double nu, double tol) const {
  if (is_sampled()) return sample_grid_.t_end();
  double h = 0.0;
  for (const auto& t : terms_) h = std::max(h, term_horizon(t.profile, op_norm(t.matrix), nu, tol));
  return h;
}

// ---------------------------------------------------------------------------

double l1_weighted_norm(const OperatorKernel& b, double nu) {
  require_weight(b, nu);
  if (b.is_zero()) return 0.0;
  if (b.is_sampled()) {
    const auto& g = b.sample_grid();
    double cell = nu > 0.0 ? -std::expm1(-nu * g.dt) / nu : g.dt;
    double sum = 0.0;
    for (int j = 0; j < g.n; ++j) sum += op_norm(b.samples()[j]) * std::exp(-nu * g.t(j)) * cell;
    return sum;
  }
  const auto& terms = b.terms();
  if (terms.size() == 1 && terms.front().profile.weighted_l1)
    return op_norm(terms.front().matrix) * terms.front().profile.weighted_l1(nu);
  double h = b.horizon(nu, 1e-14);
  double rate = std::numeric_limits<double>::infinity(), osc = 0.0;
  for (const auto& t : terms) {
    rate = std::min(rate, t.profile.decay + nu);
    osc = std::max(osc, oscillation_scale(t.profile));
  }
  auto nodes = quadrature_nodes(b.breakpoints(), h, rate, osc);
  return integrate_nodes(nodes, [&](double t) { return std::exp(-nu * t) * op_norm(b.evaluate(t)); });
}

CMat kernel_transform(const OperatorKernel& b, double xi, double nu) {
  require_weight(b, nu);
  const int m = b.dim();
  CMat out = CMat::Zero(m, m);
  if (b.is_zero()) return out;
  Complex s(nu, xi);
  if (b.is_sampled()) {
    const auto& g = b.sample_grid();
    Complex cell = laplace_interval(nu, xi, 0.0, g.dt);
    for (int j = 0; j < g.n; ++j) out += (std::exp(-s * g.t(j)) * cell) * b.samples()[j].cast<Complex>();
    return out / kSqrt2Pi;
  }
  for (const auto& t : b.terms()) {
    Complex w = t.profile.laplace ? t.profile.laplace(s)
                                  : term_laplace_quadrature(t.profile, op_norm(t.matrix), xi, nu);
    out += w * t.matrix.cast<Complex>();
  }
  return out / kSqrt2Pi;
}

CMat kernel_transform_quadrature(const OperatorKernel& b, double xi, double nu) {
  require_weight(b, nu);
  const int m = b.dim();
  CMat out = CMat::Zero(m, m);
  if (b.is_zero()) return out;
  Complex s(nu, xi);
  if (b.is_sampled()) {
    const auto& g = b.sample_grid();
    for (int j = 0; j < g.n; ++j) {
      double a = g.t(j);
      Complex w = GL::integrate([&](double t) { return std::exp(-s * t); }, a, a + g.dt);
      out += w * b.samples()[j].cast<Complex>();
    }
    return out / kSqrt2Pi;
  }
  for (const auto& t : b.terms())
    out += term_laplace_quadrature(t.profile, op_norm(t.matrix), xi, nu) * t.matrix.cast<Complex>();
  return out / kSqrt2Pi;
}

// ---------------------------------------------------------------------------

ConvolutionWeights::ConvolutionWeights(const OperatorKernel& b, double dt, int n)
    : dim_(b.dim()), n_(n), zero_(b.is_zero()) {
  if (zero_ || n <= 0) return;
  if (b.is_sampled()) {
    full_.reserve(n);
    for (int k = 1; k <= n; ++k) full_.push_back(b.integral((k - 1) * dt, k * dt));
    return;
  }
  for (const auto& t : b.terms()) {
    Vec w(n);
    for (int k = 1; k <= n; ++k) w(k - 1) = profile_integral(t.profile, (k - 1) * dt, k * dt);
    scalar_.push_back(std::move(w));
    matrices_.push_back(t.matrix);
  }
}

Mat ConvolutionWeights::weight(int k) const {
  if (k < 1 || k > n_) throw PreconditionError("weight index out of range");
  if (zero_) return Mat::Zero(dim_, dim_);
  if (!full_.empty()) return full_[k - 1];
  Mat w = Mat::Zero(dim_, dim_);
  for (size_t i = 0; i < scalar_.size(); ++i) w += scalar_[i](k - 1) * matrices_[i];
  return w;
}

Vec ConvolutionWeights::history(const Mat& past, int j) const {
  Vec out = Vec::Zero(dim_);
  if (zero_ || j <= 0) return out;
  const int kmax = std::min(j, n_);
  if (!full_.empty()) {
    for (int k = 1; k <= kmax; ++k) out.noalias() += full_[k - 1] * past.row(j - k).transpose();
    return out;
  }
  for (size_t i = 0; i < scalar_.size(); ++i) {
    Vec acc = Vec::Zero(dim_);
    const Vec& w = scalar_[i];
    for (int k = 1; k <= kmax; ++k) acc += w(k - 1) * past.row(j - k).transpose();
    out.noalias() += matrices_[i] * acc;
  }
  return out;
}

WeightedSignal convolve(const OperatorKernel& b, const WeightedSignal& u, Exec exec) {
  if (b.dim() != u.dim()) throw DimensionMismatch("kernel and signal dimensions differ");
  require_weight(b, u.nu());
  WeightedSignal out(u.grid(), u.dim(), u.nu());
  if (b.is_zero()) return out;
  const int n = u.size();
  ConvolutionWeights w(b, u.grid().dt, n);
  const Mat& past = u.values();
  Mat& res = out.values();
#pragma omp parallel for schedule(dynamic, 16) if (exec == Exec::parallel)
  for (int j = 1; j < n; ++j) res.row(j) = w.history(past, j).transpose();
  return out;
}

WeightedSignal resolvent_convolve(const OperatorKernel& b, const WeightedSignal& s) {
  if (b.dim() != s.dim()) throw DimensionMismatch("kernel and signal dimensions differ");
  require_weight(b, s.nu());
  WeightedSignal out = s;
  if (b.is_zero()) return out;
  ConvolutionWeights w(b, s.grid().dt, s.size());
  Mat& x = out.values();
  for (int j = 1; j < s.size(); ++j) x.row(j) += w.history(x, j).transpose();
  return out;
}

// ---------------------------------------------------------------------------

HypothesisCheck check_selfadjoint(const OperatorKernel& b, const std::vector<double>& times) {
  HypothesisCheck r;
  for (double t : times) {
    Mat m = b.evaluate(t);
    double asym = op_norm(Mat(m - m.transpose()));
    r.scale = std::max(r.scale, op_norm(m));
    if (asym > r.value) {
      r.value = asym;
      r.worst_t = t;
    }
  }
  r.pass = r.value <= 1e-12 * r.scale;
  return r;
}

HypothesisCheck check_commuting(const OperatorKernel& b, const std::vector<std::pair<double, double>>& pairs) {
  HypothesisCheck r;
  std::map<double, Mat> cache;
  auto at = [&](double t) -> const Mat& {
    auto it = cache.find(t);
    if (it == cache.end()) it = cache.emplace(t, b.evaluate(t)).first;
    return it->second;
  };
  for (const auto& [t, s] : pairs) {
    const Mat& bt = at(t);
    const Mat& bs = at(s);
    double nt = op_norm(bt), ns = op_norm(bs);
    r.scale = std::max({r.scale, nt * nt, ns * ns});
    double c = op_norm(Mat(bt * bs - bs * bt));
    if (c > r.value) {
      r.value = c;
      r.worst_t = t;
      r.worst_s = s;
    }
  }
  r.pass = r.value <= 1e-12 * r.scale;
  return r;
}

std::vector<double> default_sample_times(const OperatorKernel& b, int count) {
  double h = b.is_sampled() ? b.sample_grid().t_end() : b.horizon(b.mu() + 1.0, 1e-8);
  std::vector<double> times;
  for (int i = 0; i < count; ++i) times.push_back(h * i / std::max(count - 1, 1));
  auto br = b.breakpoints();
  if (b.is_sampled() && static_cast<int>(br.size()) > count) br.clear();
  for (double x : br) {
    if (x > 0.0) times.push_back(x - 1e-9 * std::max(1.0, x));
    times.push_back(x);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

std::vector<std::pair<double, double>> all_pairs(const std::vector<double>& times) {
  std::vector<std::pair<double, double>> out;
  for (size_t i = 0; i < times.size(); ++i)
    for (size_t j = i + 1; j < times.size(); ++j) out.emplace_back(times[i], times[j]);
  return out;
}

std::vector<double> log_frequency_grid(double xi_min, double xi_max, int count, int refine) {
  if (!(xi_min > 0.0) || !(xi_max > xi_min) || count < 2 || refine < 1)
    throw PreconditionError("bad frequency grid parameters");
  int total = (count - 1) * refine + 1;
  std::vector<double> g(total);
  double ratio = std::log(xi_max / xi_min);
  for (int i = 0; i < total; ++i) g[i] = xi_min * std::exp(ratio * i / (total - 1));
  return g;
}

std::vector<double> default_frequency_grid(int refine) { return log_frequency_grid(1e-3, 1e4, 281, refine); }

namespace {

double im_peak(const OperatorKernel& b, double xi, double nu) {
  return xi * lambda_max_hermitian(imag_part(kernel_transform(b, xi, nu)));
}

}  // namespace

ImBoundEstimate estimate_im_bound(const OperatorKernel& b, double nu0, const std::vector<double>& freq_grid,
                                  Exec exec) {
  require_weight(b, nu0);
  ImBoundEstimate r;
  r.tail_transform_bound = l1_weighted_norm(b, nu0) / kSqrt2Pi;
  const int n = static_cast<int>(freq_grid.size());
  if (n == 0) return r;
  std::vector<double> vals(n);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (int i = 0; i < n; ++i) vals[i] = im_peak(b, freq_grid[i], nu0);
  r.d_est = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    if (vals[i] > r.d_est) {
      r.d_est = vals[i];
      r.worst_xi = freq_grid[i];
    }
  return r;
}

PropagationReport verify_4d_propagation(const OperatorKernel& b, double nu0, double d,
                                        const std::vector<double>& nu_list,
                                        const std::vector<double>& freq_grid, double tol) {
  PropagationReport r;
  r.bound = 4.0 * d;
  for (double nu : nu_list) {
    if (nu < nu0) throw PreconditionError("propagation check needs nu >= nu0");
    require_weight(b, nu);
    for (double xi : freq_grid) {
      double v = im_peak(b, xi, nu);
      if (v > r.worst_value) {
        r.worst_value = v;
        r.worst_xi = xi;
        r.worst_nu = nu;
      }
    }
  }
  r.margin = r.bound - r.worst_value;
  r.pass = r.worst_value <= r.bound + tol;
  return r;
}

KernelHypothesisReport check_hypotheses(const OperatorKernel& b, double nu0, int refine) {
  KernelHypothesisReport r;
  auto times = default_sample_times(b);
  r.selfadjoint = check_selfadjoint(b, times);
  r.commuting = check_commuting(b, all_pairs(default_sample_times(b, 40)));
  r.im_bound = estimate_im_bound(b, nu0, default_frequency_grid(refine));
  r.d = std::max(0.0, r.im_bound.d_est);
  r.l1_at_nu0 = l1_weighted_norm(b, nu0);
  return r;
}

}  // namespace ide
