#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ide/common.hpp"

namespace ide {

/// Dense spatial operator with a declared, verified structure.
class BlockOperator {
 public:
  enum class Structure { skew, symmetric_positive, general };
  using Layout = std::vector<std::pair<std::string, int>>;

  BlockOperator() = default;
  // Throws StructureError if the declared structure does not hold.
  BlockOperator(Mat matrix, Structure structure, Layout layout);

  static BlockOperator zero(Layout layout);

  const Mat& matrix() const { return matrix_; }
  Structure structure() const { return structure_; }
  const Layout& layout() const { return layout_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }

  Vec apply(const Vec& x) const { return matrix_ * x; }

 private:
  Mat matrix_;
  Structure structure_ = Structure::general;
  Layout layout_;
};

struct Gradient1D {
  Mat grad;  // cells x (cells - 1): interior nodes -> cells
  Mat div;   // -grad^T
  int cells = 0;
  double h = 0.0;
};

/// Staggered first-order gradient with homogeneous Dirichlet values at both
/// ends: (G u)_c = (u_{c+1} - u_c)/h over nodes 0..cells with u_0 = u_cells = 0.
Gradient1D build_grad_dirichlet_1d(int cells, double h);

enum class SkewConvention {
  gradient_adjoint,    // [[0, G^T], [-G, 0]]  =  [[0, -Div], [-Grad, 0]]
  divergence_gradient  // [[0, div], [grad, 0]] = [[0, -G^T], [G, 0]]
};

// Two-field skew block operator built from a rectangular G (fields: rows of the
// layout are (domain of G, range of G)).
BlockOperator assemble_block_skew(const Mat& g, const BlockOperator::Layout& layout,
                                  SkewConvention convention = SkewConvention::gradient_adjoint);

struct SpdRoot {
  Mat sqrt;
  Mat inv_sqrt;
};
// Symmetric square root and its inverse by eigendecomposition. Throws
// PreconditionError unless m is symmetric positive definite.
SpdRoot spd_sqrt(const Mat& m);

struct Elasticity1D {
  Gradient1D gradient;
  Mat rho;  // diagonal, nodes
  Mat c;    // stiffness, cells
  SpdRoot c_root;
  BlockOperator a;  // [[0, -Div], [-Grad, 0]] on (v, T)
};

// rho sampled at interior nodes (cells - 1 values), C per cell (cells values).
Elasticity1D build_elasticity_1d(int cells, double h, const std::vector<double>& rho_profile,
                                 const std::vector<double>& c_profile);

double skew_defect(const Mat& a);  // ||A + A^T|| / ||A||

}  // namespace ide
