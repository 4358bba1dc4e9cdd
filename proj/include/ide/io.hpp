#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ide/kernels.hpp"
#include "ide/material_laws.hpp"
#include "ide/scenarios.hpp"
#include "ide/solver.hpp"

namespace ide {

// Description files are INI text (key = value, [section] headers). Matrices are
// written row by row, rows separated by ';' and entries by spaces or commas, or
// as `identity` / `identity*s` for a scaled identity of the declared size.

std::vector<double> parse_list(const std::string& text);
Mat parse_matrix(const std::string& text, int dim);

// Kernel file. Single term at the root:
//   dim = 2   mu = 0   family = exponential   params = 1   matrix = identity
// several terms as [term.N] sections with family/params/matrix, or
//   samples = kernel.csv   (columns t,B00,B01,...; row-major m x m; relative to the file)
OperatorKernel load_kernel(const std::string& path);

// Material file:
//   [law]      fields = v:1, T:1   radius = 0.125
//   [block.N]  row = v  col = v  kind = constant|static_z|hyp0|hyp1|par2|par3
//              matrix = ...  (constant/static_z)   kernel = file  left = ...  right = ...
MaterialLaw load_material(const std::string& path);

struct Tolerances {
  double algebraic = 1e-10;   // linear/monotone step residuals, causality leakage
  double quadrature = 1e-6;   // relative slack on quadrature-based bounds
  double lipschitz = 1e-3;    // relative slack on the 1/c bound
};

struct Overrides {
  std::optional<double> nu, dt, tmax, r1;
  std::optional<int> cells;
};

// Problem file for solve-linear / solve-inclusion:
//   [problem]    material = law.material  nu = 4  dt = 0.01  tmax = 4
//   [operator]   type = zero | matrix | gradient   (matrix = ..., structure = skew|general|symmetric_positive;
//                gradient: cells, length, convention = gradient_adjoint|divergence_gradient)
//   [source]     type = zero | constant | pulse | csv   (values, t_end, amplitude, center, width,
//                components, file)
//   [initial]    x0 = ...                      (adds the impulse of an initial state)
//   [monotone]   relation = box  components = 0  lo = 0  hi = 1
//   [tolerances] algebraic, quadrature, lipschitz
struct ProblemSpec {
  MaterialLaw law;
  BlockOperator a;
  std::optional<MonotonePart> mono;
  WeightedSignal f;
  double nu;
  std::optional<Vec> x0;
  Tolerances tolerances;
};

ProblemSpec load_problem(const std::string& path, const Overrides& overrides = {});

// Scenario configs: [grid] cells length nu dt tmax, [material] ..., [kernel] ...,
// [source] amplitude center width, [relation] key.
ViscoConfig load_visco_config(const std::string& path, const Overrides& overrides = {});
PhaseConfig load_phase_config(const std::string& path, const Overrides& overrides = {});
void apply_overrides(ViscoConfig& c, const Overrides& o);
void apply_overrides(PhaseConfig& c, const Overrides& o);

Tolerances load_tolerances(const std::string& path);

}  // namespace ide
