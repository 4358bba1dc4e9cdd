#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ide/common.hpp"
#include "ide/kernels.hpp"

namespace ide {

/// One summand of a block entry of M(z). With s = sqrt(2 pi) and
/// K^ = K^(-i z^{-1}) the kinds evaluate to
///
///   constant  : M0                       static_z  : z N
///   hyp0      : L (1 + s K^) R           hyp1      : L (1 - s K^)^{-1} R
///   par2      : z L (1 + s K^) R         par3      : z L (1 - s K^)^{-1} R
///
/// L and R default to the identity.
struct BlockTerm {
  enum class Kind { constant, static_z, hyp0, hyp1, par2, par3 };

  Kind kind = Kind::constant;
  Mat matrix;  // constant / static_z
  std::optional<OperatorKernel> kernel;
  std::optional<Mat> left;
  std::optional<Mat> right;

  static BlockTerm constant(Mat m);
  static BlockTerm z_linear(Mat n);
  static BlockTerm hyp0(OperatorKernel c);
  static BlockTerm hyp1(OperatorKernel b);
  static BlockTerm par2(OperatorKernel c);
  static BlockTerm par3(OperatorKernel b);
  BlockTerm& sandwich(Mat l, Mat r);

  bool has_resolvent() const { return kind == Kind::hyp1 || kind == Kind::par3; }
  // Terms carrying the factor z in front become static (underived) in time.
  bool is_z_scaled() const {
    return kind == Kind::static_z || kind == Kind::par2 || kind == Kind::par3;
  }
  int rows() const;
  int cols() const;
  // Inner dimension of the kernel (cols of L, rows of R).
  int inner_dim() const;
};

std::string to_string(BlockTerm::Kind k);
BlockTerm::Kind parse_block_kind(const std::string& s);

struct BlockEntry {
  int row = 0;  // field indices into the layout
  int col = 0;
  BlockTerm term;
};

/// Block-structured material law M: B_C(r, r) -> C^{n x n}. Entries sharing a
/// (row, col) position are summed, so M(z) = M_static(z) + z * (...) is expressed
/// by listing both summands.
class MaterialLaw {
 public:
  MaterialLaw() = default;
  MaterialLaw(std::vector<std::pair<std::string, int>> fields, double radius);

  MaterialLaw& add(int row, int col, BlockTerm term);
  MaterialLaw& add_diagonal(int field, BlockTerm term) { return add(field, field, std::move(term)); }

  const std::vector<std::pair<std::string, int>>& fields() const { return fields_; }
  const std::vector<BlockEntry>& entries() const { return entries_; }
  int dim() const { return dim_; }
  int offset(int field) const { return offsets_.at(field); }
  int field_dim(int field) const { return fields_.at(field).second; }
  int field_index(const std::string& name) const;
  double radius() const { return radius_; }
  void set_radius(double r) { radius_ = r; }
  bool block_diagonal() const;

  // M(z) with z^{-1} = i xi + nu. Throws RangeError outside the disc and
  // InvertibilityError when a resolvent block fails the Neumann condition.
  CMat evaluate_at(double xi, double nu) const;
  CMat evaluate(Complex z) const;
  // z^{-1} M(z), assembled without forming z for large |z^{-1}|.
  CMat evaluate_scaled(double xi, double nu) const;

  // Entries restricted to the given fields (used for blockwise margins).
  MaterialLaw restricted(const std::vector<int>& fields) const;

 private:
  std::vector<std::pair<std::string, int>> fields_;
  std::vector<int> offsets_;
  std::vector<BlockEntry> entries_;
  int dim_ = 0;
  double radius_ = std::numeric_limits<double>::infinity();
};

// Neumann quantity sqrt(2 pi) ||L? K^(xi - i nu)|| of one resolvent term.
double neumann_norm(const BlockTerm& term, double xi, double nu);

struct MarginGrid {
  std::vector<double> xi;  // symmetric frequency grid
  std::vector<double> nu;  // ladder, all >= 1/(2 r1)
};

// xi: 0 plus +-log-spaced on [1e-2, xi_max]; nu: nu_min * growth^k, k < levels.
MarginGrid default_margin_grid(double r1, int xi_count = 64, double xi_max = 1e3,
                               int nu_levels = 6, double growth = 2.0);

struct SolvabilityReport {
  double c_est = 0.0;
  double nu_min = 0.0;
  Complex worst_z{};
  double worst_xi = 0.0;
  double worst_nu = 0.0;
  std::optional<double> analytic_bound;
  std::vector<double> row_minima;  // min over xi per nu level, same order as grid.nu
  MarginGrid grid;

  bool positive() const { return c_est > 0.0; }
  // Certified iff an analytic lower bound is available and positive.
  bool certified() const { return analytic_bound && *analytic_bound > 0.0; }
};

// min over the grid of lambda_min(Re z^{-1} M(z)). Requires r1 <= M.radius().
SolvabilityReport solvability_margin(const MaterialLaw& m, double r1, const MarginGrid& grid,
                                     Exec exec = Exec::parallel);
SolvabilityReport solvability_margin(const MaterialLaw& m, double r1);

// nu (1 - |C|_{L1,nu}) - 4 sqrt(2 pi) d
double hyp_C_bound(const OperatorKernel& c, double d, double nu);
// (nu (1 - |B|_{L1,nu0}) - 4 sqrt(2 pi) d) / (1 + |B|_{L1,nu0})^2; needs |B|_{L1,nu0} < 1.
double hyp_B_bound(const OperatorKernel& b, double d, double nu0, double nu);
// nu - (|B'|_{L1,nu} + ||B(0)||) / (1 - |B|_{L1,nu}); needs |B|_{L1,nu} < 1.
double abs_cont_bound(const OperatorKernel& b, const OperatorKernel& b_prime, const Mat& b0,
                      double nu);

// Lower bound for the margin at weight nu, assembled blockwise from the analytic
// bounds (constant, hyp0, hyp1, par2, par3 diagonal blocks with one unsandwiched
// term each). Empty when the law has another shape or a kernel fails (i)/(ii).
std::optional<double> analytic_margin_bound(const MaterialLaw& m, double nu);

struct ParabolicMargin {
  double value = 0.0;
  double sup_norm = 0.0;  // s = sup over the disc boundary of ||sqrt(2 pi) K^||
  double worst_xi = 0.0;
};

// 1 - s for par2, 1 - s/(1 - s) for par3, s sampled on Re z^{-1} = 1/(2r).
ParabolicMargin parabolic_margin(const BlockTerm& term, double r,
                                 const std::vector<double>& xi_grid = {});

}  // namespace ide
