#include "ide/solver.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/LU>

namespace ide {

namespace {

// Time-domain realization of a material law on a uniform grid. Every block term
// contributes either to X (differentiated by the backward difference) or to Y
// (static). A term's value at step j is  lead * U_j + memory_j  where memory_j
// only involves steps < j.
class DiscreteMaterial {
 public:
  DiscreteMaterial(const MaterialLaw& law, double dt, int n, double nu) : dim_(law.dim()) {
    lead_x_ = Mat::Zero(dim_, dim_);
    lead_y_ = Mat::Zero(dim_, dim_);
    for (const auto& e : law.entries()) {
      Term t;
      t.row = law.offset(e.row);
      t.col = law.offset(e.col);
      t.rows = e.term.rows();
      t.cols = e.term.cols();
      t.derivative = !e.term.is_z_scaled();
      if (e.term.kernel) {
        const OperatorKernel& k = *e.term.kernel;
        if (nu < k.mu()) throw DivergenceRisk("weight below the decay parameter of a law kernel");
        const int inner = k.dim();
        t.left = e.term.left ? *e.term.left : Mat::Identity(inner, inner);
        t.right = e.term.right ? *e.term.right : Mat::Identity(inner, inner);
        t.lead = t.left * t.right;
        t.resolvent = e.term.has_resolvent();
        if (!k.is_zero()) {
          t.weights = ConvolutionWeights(k, dt, n);
          t.store = Mat::Zero(n, inner);
          t.memory = Vec::Zero(inner);
        }
      } else {
        t.lead = e.term.matrix;
      }
      Mat& lead = t.derivative ? lead_x_ : lead_y_;
      lead.block(t.row, t.col, t.rows, t.cols) += t.lead;
      if (t.weights) terms_.push_back(std::move(t));
    }
  }

  int dim() const { return dim_; }
  const Mat& lead_x() const { return lead_x_; }
  const Mat& lead_y() const { return lead_y_; }

  // Memory parts of X_j and Y_j.
  void memory(int j, Vec& mx, Vec& my) {
    mx.setZero(dim_);
    my.setZero(dim_);
    for (auto& t : terms_) {
      t.memory = t.weights->history(t.store, j);
      Vec out = t.left * t.memory;
      (t.derivative ? mx : my).segment(t.row, t.rows) += out;
    }
  }

  // Records U_j; must follow memory(j, ...).
  void commit(int j, const Vec& u) {
    for (auto& t : terms_) {
      Vec ru = t.right * u.segment(t.col, t.cols);
      t.store.row(j) = (t.resolvent ? Vec(ru + t.memory) : ru).transpose();
    }
  }

 private:
  struct Term {
    int row = 0, col = 0, rows = 0, cols = 0;
    bool derivative = true;
    bool resolvent = false;
    Mat lead, left, right;
    std::optional<ConvolutionWeights> weights;
    Mat store;   // R U_i, or the auxiliary w_i = (1 - K*)^{-1} R U at step i
    Vec memory;  // last memory() result, in the kernel's inner space
  };

  int dim_;
  Mat lead_x_, lead_y_;
  std::vector<Term> terms_;
};

struct MaterialParts {
  WeightedSignal x, y;
};

MaterialParts material_parts(const MaterialLaw& law, const WeightedSignal& u) {
  if (law.dim() != u.dim()) throw DimensionMismatch("law and signal dimensions differ");
  const int n = u.size();
  DiscreteMaterial dm(law, u.grid().dt, n, u.nu());
  MaterialParts p{WeightedSignal(u.grid(), u.dim(), u.nu()), WeightedSignal(u.grid(), u.dim(), u.nu())};
  Vec mx, my;
  for (int j = 0; j < n; ++j) {
    Vec uj = u.at(j);
    dm.memory(j, mx, my);
    p.x.set(j, dm.lead_x() * uj + mx);
    p.y.set(j, dm.lead_y() * uj + my);
    dm.commit(j, uj);
  }
  return p;
}

void require_problem_shape(const MaterialLaw& law, const BlockOperator& a, const WeightedSignal& f, double nu) {
  if (law.dim() != a.dim() || law.dim() != f.dim()) throw DimensionMismatch("law, operator and source sizes differ");
  if (f.nu() != nu) throw DimensionMismatch("source weight differs from the problem weight");
}

double relative(double r, double scale) { return r / std::max(1.0, scale); }

// Splitting step for  T x + a(x) ∋ b  with a maximal monotone.
class MonotoneStep {
 public:
  MonotoneStep(Mat t, MonotoneRelation rel) : t_(std::move(t)), rel_(std::move(rel)) {
    const int p = static_cast<int>(t_.rows());
    const double scalar = t_.trace() / p;
    if ((t_ - scalar * Mat::Identity(p, p)).norm() <= 1e-14 * t_.norm()) {
      if (!(scalar > 0.0)) throw SingularSystem("monotone step is not coercive");
      tau_ = scalar;
      rho_ = 0.0;
    } else {
      Mat sym = 0.5 * (t_ + t_.transpose());
      double lmin = lambda_min_hermitian(sym.cast<Complex>());
      if (!(lmin > 0.0)) throw SingularSystem("monotone step is not coercive");
      double tn = op_norm(t_);
      auto rho = [&](double tau) { return op_norm(Mat(Mat::Identity(p, p) - t_ / tau)); };
      double lo = std::log(0.5 * lmin), hi = std::log(2.0 * tn * tn / lmin);
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
      double fa = rho(std::exp(a)), fb = rho(std::exp(b));
      for (int it = 0; it < 60; ++it) {
        if (fa < fb) {
          hi = b;
          b = a;
          fb = fa;
          a = hi - g * (hi - lo);
          fa = rho(std::exp(a));
        } else {
          lo = a;
          a = b;
          fa = fb;
          b = lo + g * (hi - lo);
          fb = rho(std::exp(b));
        }
      }
      tau_ = std::exp(0.5 * (lo + hi));
      rho_ = rho(tau_);
      if (!(rho_ < 1.0)) throw SingularSystem("no contractive splitting parameter found");
    }
    shifted_ = t_ - tau_ * Mat::Identity(p, p);
  }

  double contraction() const { return rho_; }

  // Warm-started at x; returns iterations and the final relative residual.
  std::pair<int, double> solve(Vec& x, const Vec& b, double tol, int max_it) const {
    const double scale = std::max(1.0, b.norm());
    for (int it = 1; it <= max_it; ++it) {
      Vec y = x - (t_ * x - b) / tau_;
      Vec next = resolve(rel_, 1.0 / tau_, y);
      double res = (shifted_ * (next - x)).norm() / scale;
      x = std::move(next);
      if (res <= tol) return {it, res};
    }
    throw EvaluationError("monotone step did not converge");
  }

 private:
  Mat t_;
  MonotoneRelation rel_;
  double tau_ = 1.0;
  double rho_ = 0.0;
  Mat shifted_;
};

Mat select(const Mat& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  Mat out(rows.size(), cols.size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

Vec select(const Vec& v, const std::vector<int>& idx) {
  Vec out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

}  // namespace

InclusionProblem InclusionProblem::from_linear(const LinearProblem& p) {
  return {p.law, p.a, std::nullopt, p.f, p.nu};
}

SolvabilityReport margin_gate(const MaterialLaw& law, double nu, const SolveOptions& options) {
  const double r1 = 1.0 / (2.0 * nu);
  MarginGrid grid = options.margin_grid ? *options.margin_grid : default_margin_grid(r1);
  SolvabilityReport r = solvability_margin(law, r1, grid, options.exec);
  if (r.c_est <= 0.0 && !options.force)
    throw MarginGateError("material-law margin c_est = " + std::to_string(r.c_est) + " <= 0 at nu = " +
                          std::to_string(nu) + " (use force to override)");
  return r;
}

FrequencySolution solve_linear_frequency(const LinearProblem& p, const SolveOptions& options) {
  require_problem_shape(p.law, p.a, p.f, p.nu);
  FrequencySolution out{WeightedSignal(p.f.grid(), p.f.dim(), p.nu), 0.0, std::nullopt};
  if (options.check_margin) out.margin = margin_gate(p.law, p.nu, options);

  Spectrum fs = fourier_laplace(p.f, options.exec);
  Spectrum us = fs;
  const int n = fs.size();
  const CMat a = p.a.matrix().cast<Complex>();
  std::vector<double> res2(n, 0.0), rhs2(n, 0.0);
  std::vector<char> singular(n, 0);
  std::vector<std::string> failure(n);

#pragma omp parallel for schedule(dynamic) if (options.exec == Exec::parallel)
  for (int k = 0; k < n; ++k) {
    try {
      CMat m = p.law.evaluate_scaled(fs.frequencies(k), p.nu) + a;
      Eigen::PartialPivLU<CMat> lu(m);
      if (!(lu.rcond() > 1e-14)) {
        singular[k] = 1;
        continue;
      }
      CVec rhs = fs.values.row(k).transpose();
      CVec x = lu.solve(rhs);
      us.values.row(k) = x.transpose();
      res2[k] = (m * x - rhs).squaredNorm();
      rhs2[k] = rhs.squaredNorm();
    } catch (const std::exception& e) {
      failure[k] = e.what();
    }
  }
  for (int k = 0; k < n; ++k) {
    if (!failure[k].empty()) throw EvaluationError("frequency " + std::to_string(fs.frequencies(k)) + ": " + failure[k]);
    if (singular[k]) throw SingularSystem("singular frequency matrix at xi = " + std::to_string(fs.frequencies(k)));
  }
  double r = 0.0, s = 0.0;
  for (int k = 0; k < n; ++k) {
    r += res2[k];
    s += rhs2[k];
  }
  out.residual = s > 0.0 ? std::sqrt(r / s) : std::sqrt(r);
  out.u = inverse_fourier_laplace(us, p.f.grid(), options.exec);
  return out;
}

TimeSolution solve_inclusion_time(const InclusionProblem& p, const SolveOptions& options) {
  require_problem_shape(p.law, p.a_skew, p.f, p.nu);
  const int m = p.law.dim();
  const int n = p.f.size();
  const double dt = p.f.grid().dt;
  TimeSolution out;
  out.u = WeightedSignal(p.f.grid(), m, p.nu);
  if (options.check_margin) out.margin = margin_gate(p.law, p.nu, options);

  DiscreteMaterial dm(p.law, dt, n, p.nu);
  const Mat s = dm.lead_x() / dt + dm.lead_y() + p.a_skew.matrix();

  std::vector<int> pidx, qidx;
  if (p.a_mono) {
    std::set<int> seen;
    for (int c : p.a_mono->components) {
      if (c < 0 || c >= m || !seen.insert(c).second) throw DimensionMismatch("bad monotone component index");
      pidx.push_back(c);
    }
    if (static_cast<int>(pidx.size()) != p.a_mono->relation.dim)
      throw DimensionMismatch("monotone relation dimension differs from its component count");
    for (int c = 0; c < m; ++c)
      if (!seen.count(c)) qidx.push_back(c);
  }

  Eigen::PartialPivLU<Mat> full_lu, qq_lu;
  Mat s_pq, k_qp;
  std::optional<MonotoneStep> mono;
  if (pidx.empty()) {
    full_lu.compute(s);
    if (!(full_lu.rcond() > 1e-14)) throw SingularSystem("step matrix is singular");
  } else {
    Mat t = select(s, pidx, pidx);
    if (!qidx.empty()) {
      qq_lu.compute(select(s, qidx, qidx));
      if (!(qq_lu.rcond() > 1e-14)) throw SingularSystem("step matrix is singular on the linear components");
      s_pq = select(s, pidx, qidx);
      k_qp = qq_lu.solve(select(s, qidx, pidx));
      t -= s_pq * k_qp;
    }
    mono.emplace(t, p.a_mono->relation);
    out.contraction = mono->contraction();
  }

  Vec x_prev = Vec::Zero(m);
  Vec mx, my;
  Vec xp = Vec::Zero(static_cast<int>(pidx.size()));
  for (int j = 0; j < n; ++j) {
    dm.memory(j, mx, my);
    Vec b = p.f.at(j) - (mx - x_prev) / dt - my;
    Vec u(m);
    if (pidx.empty()) {
      u = full_lu.solve(b);
      out.max_step_residual = std::max(out.max_step_residual, relative((s * u - b).norm(), b.norm()));
    } else {
      Vec bp = select(b, pidx);
      Vec c;
      if (!qidx.empty()) {
        c = qq_lu.solve(select(b, qidx));
        bp -= s_pq * c;
      }
      auto [iters, res] = mono->solve(xp, bp, options.tolerance, options.max_iterations);
      out.max_inner_iterations = std::max(out.max_inner_iterations, iters);
      out.max_step_residual = std::max(out.max_step_residual, res);
      for (size_t i = 0; i < pidx.size(); ++i) u(pidx[i]) = xp(i);
      if (!qidx.empty()) {
        Vec uq = c - k_qp * xp;
        for (size_t i = 0; i < qidx.size(); ++i) u(qidx[i]) = uq(i);
      }
    }
    out.u.set(j, u);
    x_prev = dm.lead_x() * u + mx;
    dm.commit(j, u);
  }
  return out;
}

WeightedSignal apply_material_dynamic(const MaterialLaw& law, const WeightedSignal& u) {
  return material_parts(law, u).x;
}

WeightedSignal apply_material_static(const MaterialLaw& law, const WeightedSignal& u) {
  return material_parts(law, u).y;
}

WeightedSignal apply_material_operator(const MaterialLaw& law, const WeightedSignal& u) {
  auto parts = material_parts(law, u);
  return backward_difference(parts.x) + parts.y;
}

WeightedSignal DeltaSource::discretize(const TimeGrid& grid, double nu) const {
  WeightedSignal d(grid, static_cast<int>(amplitude.size()), nu);
  int j = grid.index_at_or_after(0.0);
  if (j >= grid.n || std::abs(grid.t(j)) > 1e-9 * grid.dt) throw PreconditionError("grid has no point at t = 0");
  d.set(j, amplitude / grid.dt);
  return d;
}

WeightedSignal build_ivp_rhs(const MaterialLaw& law, const Vec& x0, const WeightedSignal& f) {
  if (x0.size() != f.dim() || law.dim() != f.dim()) throw DimensionMismatch("initial state size differs");
  if (f.grid().t0 < -1e-12) throw PreconditionError("IVP sources start at t = 0");
  if (!x0.allFinite()) throw PreconditionError("initial state is not finite");
  WeightedSignal step(f.grid(), f.dim(), f.nu());
  for (int j = 0; j < step.size(); ++j)
    if (step.grid().t(j) >= -1e-12) step.set(j, x0);
  // The impulse enters through the differentiated part of the law only.
  return f + backward_difference(apply_material_dynamic(law, step));
}

WeightedSignal build_history_rhs(const MaterialLaw& law, const WeightedSignal& history, const WeightedSignal& f) {
  if (history.dim() != f.dim() || law.dim() != f.dim()) throw DimensionMismatch("history size differs");
  if (history.nu() != f.nu()) throw DimensionMismatch("history weight differs");
  const TimeGrid& gf = f.grid();
  const TimeGrid& gh = history.grid();
  if (std::abs(gf.t0) > 1e-12) throw PreconditionError("the source grid must start at t = 0");
  if (std::abs(gh.dt - gf.dt) > 1e-12 * gf.dt) throw PreconditionError("history and source steps differ");
  double shift = (gh.t0 - gf.t0) / gf.dt;
  int offset = static_cast<int>(std::lround(shift));
  if (std::abs(shift - offset) > 1e-9) throw PreconditionError("history grid is not aligned with the source grid");
  for (int j = 0; j < gh.n; ++j)
    if (gh.t(j) >= -1e-12 * gf.dt && history.at(j).norm() != 0.0)
      throw PreconditionError("history is not supported on t < 0");

  const int first = std::min(offset, 0);
  const int last = std::max(offset + gh.n, gf.n);
  TimeGrid g(gf.t0 + first * gf.dt, gf.dt, last - first);
  WeightedSignal v(g, f.dim(), f.nu());
  for (int j = 0; j < gh.n; ++j) {
    int k = offset + j - first;
    if (gh.t(j) < 0.0) v.set(k, history.at(j));
  }
  WeightedSignal r = apply_material_operator(law, v);
  WeightedSignal out = f;
  for (int j = 0; j < gf.n; ++j) out.set(j, f.at(j) - r.at(j - first));
  return out;
}

CausalityReport causality_check(const SolveFn& solve, const WeightedSignal& f, double a, double tol) {
  WeightedSignal u1 = solve(f);
  WeightedSignal u2 = solve(f.truncated_after(a));
  CausalityReport r;
  r.tolerance = tol;
  r.leakage = weighted_norm((u1 - u2).truncated_after(a));
  r.pass = r.leakage <= tol;
  return r;
}

LipschitzReport lipschitz_check(const SolveFn& solve, const WeightedSignal& f1, const WeightedSignal& f2, double c_est,
                                double tol) {
  if (!(c_est > 0.0)) throw PreconditionError("Lipschitz check needs a positive margin");
  LipschitzReport r;
  r.bound = 1.0 / c_est;
  double df = weighted_norm(f1 - f2);
  if (df == 0.0) return r;
  r.ratio = weighted_norm(solve(f1) - solve(f2)) / df;
  r.pass = r.ratio <= r.bound * (1.0 + tol);
  return r;
}

WeightedSignal antiderivative_trapezoid(const WeightedSignal& f) {
  WeightedSignal out(f.grid(), f.dim(), f.nu());
  const double h = 0.5 * f.grid().dt;
  for (int j = 1; j < f.size(); ++j)
    out.values().row(j) = out.values().row(j - 1) + h * (f.values().row(j - 1) + f.values().row(j));
  return out;
}

WeightedSignal convolve_trapezoid(const OperatorKernel& b, const WeightedSignal& u) {
  if (b.dim() != u.dim()) throw DimensionMismatch("kernel and signal dimensions differ");
  WeightedSignal out(u.grid(), u.dim(), u.nu());
  if (b.is_zero()) return out;
  const int n = u.size();
  const double dt = u.grid().dt;
  const Mat& x = u.values();
  auto trapezoid = [&](auto&& weight_of_lag, int j) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(u.dim());
    for (int i = 0; i <= j; ++i) {
      double w = (i == 0 || i == j) ? 0.5 : 1.0;
      acc += w * weight_of_lag(j - i) * x.row(i);
    }
    return acc;
  };
  if (b.is_sampled()) {
    std::vector<Mat> lag(n);
    for (int k = 0; k < n; ++k) lag[k] = b.evaluate(k * dt);
    for (int j = 1; j < n; ++j) {
      Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(u.dim());
      for (int i = 0; i <= j; ++i) {
        double w = (i == 0 || i == j) ? 0.5 : 1.0;
        acc += w * x.row(i) * lag[j - i].transpose();
      }
      out.values().row(j) = dt * acc;
    }
    return out;
  }
  for (const auto& term : b.terms()) {
    Vec g(n);
    for (int k = 0; k < n; ++k) g(k) = term.profile.value(k * dt);
    for (int j = 1; j < n; ++j) {
      Eigen::RowVectorXd acc = trapezoid([&](int k) { return g(k); }, j);
      out.values().row(j) += dt * acc * term.matrix.transpose();
    }
  }
  return out;
}

namespace {

WeightedSignal map_rows(const Mat& m, const WeightedSignal& s) {
  return WeightedSignal(s.grid(), Mat(s.values() * m.transpose()), s.nu());
}

double reduction_ratio(const WeightedSignal& lhs, const WeightedSignal& rhs) {
  double ref = weighted_norm(rhs);
  double diff = weighted_norm(lhs - rhs);
  return ref > 0.0 ? diff / ref : diff;
}

}  // namespace

double hyperbolic_reduction_residual(const OperatorKernel& c, const OperatorKernel& b, const Mat& g,
                                     const WeightedSignal& v, const WeightedSignal& f) {
  require_compatible(v, f, "hyperbolic residual");
  if (g.cols() != v.dim() || c.dim() != v.dim() || b.dim() != g.rows())
    throw DimensionMismatch("reduction operands do not fit");
  // Once-integrated form: (1 + C*) v + G^T d0^{-1} (1 - B*) G d0^{-1} v = d0^{-1} f.
  WeightedSignal u = antiderivative_trapezoid(v);
  WeightedSignal gu = map_rows(g, u);
  WeightedSignal flux = gu - convolve_trapezoid(b, gu);
  WeightedSignal lhs = v + convolve_trapezoid(c, v) + map_rows(g.transpose(), antiderivative_trapezoid(flux));
  return reduction_ratio(lhs, antiderivative_trapezoid(f));
}

double parabolic_reduction_residual(const OperatorKernel& c, const OperatorKernel& b, const Mat& g,
                                    const WeightedSignal& u, const WeightedSignal& f) {
  require_compatible(u, f, "parabolic residual");
  if (g.cols() != u.dim() || c.dim() != u.dim() || b.dim() != g.rows())
    throw DimensionMismatch("reduction operands do not fit");
  // Once-integrated form: (1 + C*) u + d0^{-1} (G^T G u - G^T (B * G u)) = d0^{-1} f.
  WeightedSignal gu = map_rows(g, u);
  WeightedSignal flux = gu - convolve_trapezoid(b, gu);
  WeightedSignal lhs = u + convolve_trapezoid(c, u) + antiderivative_trapezoid(map_rows(g.transpose(), flux));
  return reduction_ratio(lhs, antiderivative_trapezoid(f));
}

}  // namespace ide
