#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ide/kernels.hpp"
#include "ide/material_laws.hpp"
#include "ide/operators.hpp"
#include "ide/solver.hpp"

namespace ide {

// Gaussian pulse in time times sin(pi x) in space.
struct Pulse {
  double amplitude = 1.0;
  double center = 0.5;
  double width = 0.1;

  double value(double t) const;
  double integral(double t) const;  // int_{-inf}^t value
};

struct ViscoConfig {
  int cells = 64;
  double length = 1.0;
  double nu = 4.0;
  double dt = 1.0 / 256.0;
  double tmax = 4.0;
  double rho0 = 1.0, rho1 = 0.5;  // rho(x) = rho0 + rho1 x
  double c0 = 1.0, c1 = 0.5;      // C(x) = c0 + c1 (1 - x)
  double kernel_decay = 2.0;      // B(t) = beta e^{-decay t} I
  double kernel_beta = 0.5;
  Pulse source;
};

struct ViscoSetup {
  ViscoConfig config;
  Elasticity1D elasticity;
  OperatorKernel relaxation;   // B
  OperatorKernel conjugated;   // C^{-1/2} B C^{-1/2}
  LinearProblem problem;       // fields (v, T)
};

ViscoSetup build_visco(const ViscoConfig& config);

struct ViscoReport {
  KernelHypothesisReport relaxation_check;
  KernelHypothesisReport conjugated_check;
  double conjugated_d_bound = 0.0;  // d ||C^{-1/2}||^2
  bool conjugated_d_ok = true;
  SolvabilityReport margin;
  TimeSolution time;
  std::optional<FrequencySolution> frequency;
  double cross_error = 0.0;  // relative weighted difference of the two solvers
  std::vector<double> energy;
};

ViscoReport run_visco(const ViscoSetup& setup, const SolveOptions& options = {}, bool cross_validate = true);

// 1/2 (rho |v|^2 + C^{-1} |T|^2) h at every grid time.
std::vector<double> visco_energy(const ViscoSetup& setup, const WeightedSignal& u);

struct PhaseConfig {
  int cells = 64;
  double length = 1.0;
  double nu = 4.0;
  double dt = 1.0 / 256.0;
  double tmax = 4.0;
  double alpha = 1.0;
  double lambda = 1.0;
  double c_decay = 1.0, c_beta = 0.5;
  double d_decay = 1.0, d_beta = 0.5;
  double k_decay = 1.0, k_beta = 0.5;
  std::string relation = "heaviside_inverse";
  Pulse source{20.0, 0.5, 0.1};
};

struct PhaseSetup {
  PhaseConfig config;
  Gradient1D gradient;
  OperatorKernel c, d, k;
  InclusionProblem problem;  // fields (theta, chi, q); source row is d0^{-1} f
  WeightedSignal heat_source;  // f itself on the theta nodes
};

PhaseSetup build_phase(const PhaseConfig& config);

// c1 = max over eps of min(1 - |C| - eps^2/2, nu alpha - (1 + |D| + lambda)^2 / (2 eps^2)).
double phase_epsilon_bound(const OperatorKernel& c, const OperatorKernel& d, double alpha, double lambda, double nu);

struct PhaseReport {
  KernelHypothesisReport k_check;
  SolvabilityReport margin;           // full law
  SolvabilityReport coupling_margin;  // (theta, chi) block N(z)
  std::vector<double> epsilon_bounds; // per nu level of coupling_margin.grid
  bool epsilon_bound_ok = true;
  TimeSolution time;
  double chi_min = 0.0, chi_max = 0.0;
  double heat_residual = 0.0;  // integrated heat equation, relative
  double flux_residual = 0.0;  // q + d0^{-1}(1 - K*) grad theta, relative
};

PhaseReport run_phase(const PhaseSetup& setup, const SolveOptions& options = {});

// Residuals recomputed with trapezoid quadrature (independent of the stepper).
double phase_heat_residual(const PhaseSetup& setup, const WeightedSignal& u);
double phase_flux_residual(const PhaseSetup& setup, const WeightedSignal& u);

}  // namespace ide
