#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ide/common.hpp"
#include "ide/kernels.hpp"
#include "ide/material_laws.hpp"
#include "ide/monotone.hpp"
#include "ide/operators.hpp"
#include "ide/weighted_space.hpp"

namespace ide {

// (d0 M(d0^{-1}) + A) U = F
struct LinearProblem {
  MaterialLaw law;
  BlockOperator a;
  WeightedSignal f;
  double nu;
};

// Monotone relation acting on a subset of the state components.
struct MonotonePart {
  MonotoneRelation relation;
  std::vector<int> components;
};

// (U, F) in d0 M(d0^{-1}) + A_skew + A_mono. The time-domain convolution terms
// are read off the law's block terms, so the frequency-domain shadow of the
// problem is `law` itself.
struct InclusionProblem {
  MaterialLaw law;
  BlockOperator a_skew;
  std::optional<MonotonePart> a_mono;
  WeightedSignal f;
  double nu;

  static InclusionProblem from_linear(const LinearProblem& p);
};

struct SolveOptions {
  bool force = false;                  // run even if the margin gate trips
  std::optional<MarginGrid> margin_grid;
  bool check_margin = true;
  Exec exec = Exec::parallel;
  double tolerance = 1e-10;            // monotone inner iteration
  int max_iterations = 20000;
};

struct FrequencySolution {
  WeightedSignal u;
  double residual = 0.0;  // |LHS U - F|_nu / |F|_nu, measured on the spectrum
  std::optional<SolvabilityReport> margin;
};

struct TimeSolution {
  WeightedSignal u;
  double max_step_residual = 0.0;
  int max_inner_iterations = 0;
  double contraction = 0.0;  // splitting factor of the monotone step (0 if linear)
  std::optional<SolvabilityReport> margin;
};

// Margin on the ladder nu, 2nu, ... (r1 = 1/(2 nu)). Throws MarginGateError when
// c_est <= 0 unless options.force.
SolvabilityReport margin_gate(const MaterialLaw& law, double nu, const SolveOptions& options);

// Per DFT frequency: ((i xi_k + nu) M(1/(i xi_k + nu)) + A) U^_k = F^_k.
FrequencySolution solve_linear_frequency(const LinearProblem& p, const SolveOptions& options = {});

// Implicit one-step scheme on F's grid: backward difference for d0, left-endpoint
// convolution quadrature for kernels, resolvent splitting for A_mono.
TimeSolution solve_inclusion_time(const InclusionProblem& p, const SolveOptions& options = {});

// Discrete material operator without the outer derivative, X(U): every term
// with its convolution, summed per block row. Static (z-scaled) terms excluded.
WeightedSignal apply_material_dynamic(const MaterialLaw& law, const WeightedSignal& u);
// Static (z-scaled) part Y(U).
WeightedSignal apply_material_static(const MaterialLaw& law, const WeightedSignal& u);
// R(U) = D_h X(U) + Y(U): the scheme's discrete d0 M(d0^{-1}).
WeightedSignal apply_material_operator(const MaterialLaw& law, const WeightedSignal& u);

// Discrete delta at t = 0: amplitude / dt on the cell starting at 0.
struct DeltaSource {
  Vec amplitude;
  WeightedSignal discretize(const TimeGrid& grid, double nu) const;
};

// F + M(d0^{-1}) d0 (chi_{t>=0} x0): the material law applied to delta (x) x0.
WeightedSignal build_ivp_rhs(const MaterialLaw& law, const Vec& x0, const WeightedSignal& f);

// F - chi_{t>0} d0 M v_hist + M_inst delta (x) v_hist(0-), with v_hist supported
// on t < 0. M_inst is the instantaneous (z -> 0) part of the law.
WeightedSignal build_history_rhs(const MaterialLaw& law, const WeightedSignal& history,
                                 const WeightedSignal& f);

using SolveFn = std::function<WeightedSignal(const WeightedSignal&)>;

struct CausalityReport {
  bool pass = true;
  double leakage = 0.0;
  double tolerance = 0.0;
};

// |chi_{<=a}(solve(F) - solve(chi_{<=a} F))|_nu <= tol.
CausalityReport causality_check(const SolveFn& solve, const WeightedSignal& f, double a,
                                double tol = 1e-10);

struct LipschitzReport {
  bool pass = true;
  double ratio = 0.0;
  double bound = 0.0;  // 1/c_est
};

LipschitzReport lipschitz_check(const SolveFn& solve, const WeightedSignal& f1,
                                const WeightedSignal& f2, double c_est, double tol = 1e-3);

// Residual of d0^2 (1 + C*) u + G^T (1 - B*) G u = f, u = d0^{-1} v, evaluated with
// trapezoid convolution and trapezoid antiderivative (independent of the scheme).
// Returns |residual|_nu / |f|_nu.
double hyperbolic_reduction_residual(const OperatorKernel& c, const OperatorKernel& b,
                                     const Mat& g, const WeightedSignal& v,
                                     const WeightedSignal& f);
// Residual of d0 u + C* d0 u + G^T G u - G^T (B* G u) = f, same conventions.
double parabolic_reduction_residual(const OperatorKernel& c, const OperatorKernel& b,
                                    const Mat& g, const WeightedSignal& u,
                                    const WeightedSignal& f);

// Trapezoid-rule causal convolution with nodal kernel samples; the test-side
// counterpart of `convolve`.
WeightedSignal convolve_trapezoid(const OperatorKernel& b, const WeightedSignal& u);
WeightedSignal antiderivative_trapezoid(const WeightedSignal& f);

}  // namespace ide
