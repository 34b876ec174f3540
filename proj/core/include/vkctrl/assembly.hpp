#pragma once

#include "vkctrl/bfs_element.hpp"
#include "vkctrl/mesh.hpp"
#include "vkctrl/sparse.hpp"

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace vkctrl {

/// BFS degree-of-freedom numbering with clamped boundary nodes eliminated.
///
/// Every node carries (v, v_x, v_y, v_xy); all four are constrained to zero at
/// boundary nodes. Free DOFs are numbered node by node in mesh node order.
class DofMap {
 public:
  explicit DofMap(const RectMesh& mesh);

  int n_free() const { return n_free_; }
  /// Global free index of a node's DOF, or -1 when constrained.
  int global(int node, DofKind kind) const { return node_dofs_[kDofsPerNode * node + static_cast<int>(kind)]; }
  bool constrained(int node) const { return global(node, DofKind::Value) < 0; }
  /// Local -> global map of a cell; constrained slots are -1.
  const std::array<int, kLocalDofs>& cell_dofs(int cell) const { return cell_dofs_[cell]; }
  int node_of(int dof) const { return dof_node_[dof]; }
  DofKind kind_of_dof(int dof) const { return static_cast<DofKind>(dof % kDofsPerNode); }

 private:
  int n_free_ = 0;
  std::vector<int> node_dofs_;
  std::vector<int> dof_node_;
  std::vector<std::array<int, kLocalDofs>> cell_dofs_;
};

/// Pair of scalar fields on one DofMap, e.g. (psi1, psi2) or (theta1, theta2).
struct PairField {
  Vector first;
  Vector second;

  static PairField zero(int n_free) { return {Vector::Zero(n_free), Vector::Zero(n_free)}; }
  /// Block vector [first; second].
  Vector stacked() const;
  static PairField from_stacked(const Vector& v);
  int n_free() const { return static_cast<int>(first.size()); }
};

/// Nodal data (v, v_x, v_y, v_xy) of a smooth function at a point.
using NodalData = std::array<double, 4>;

/// Values and derivatives of a discrete field at a point.
struct FieldValues {
  double v = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double dxx = 0.0;
  double dxy = 0.0;
  double dyy = 0.0;
};

/// Mesh, DOF map, tabulated basis and sparsity pattern for one refinement
/// level. All cells are congruent, so one physical table serves every cell.
class Discretization {
 public:
  explicit Discretization(RectMesh mesh, int quad_assembly = 5, int quad_error = 7);
  Discretization(const Discretization&) = delete;
  Discretization& operator=(const Discretization&) = delete;

  const RectMesh& mesh() const { return mesh_; }
  const DofMap& dofmap() const { return dofmap_; }
  int n_free() const { return dofmap_.n_free(); }

  /// Table used for bilinear/trilinear forms (exact for their integrands).
  const ShapeTable& assembly_table() const { return assembly_table_; }
  /// Table used for loads and error norms with non-polynomial data.
  const ShapeTable& error_table() const { return error_table_; }

  /// Zero-valued matrix with the scalar (n x n) pattern.
  SparseMatrix scalar_pattern() const;
  /// Zero-valued matrix with the 2 x 2 block (2n x 2n) pattern.
  SparseMatrix block_pattern() const;

  /// Position in the scalar value array of local entry (p, q) of a cell, or -1.
  int scalar_position(int cell, int p, int q) const { return cell_positions_[cell * 256 + p * 16 + q]; }
  /// Position in the block value array of entry (p, q) in block (r, c).
  int block_position(int cell, int r, int c, int p, int q) const;

  /// Local coefficients of a field on a cell (zeros for constrained slots).
  std::array<double, kLocalDofs> local_coefficients(const Vector& field, int cell) const;

  /// BFS nodal interpolant of a function given its nodal data.
  Vector interpolate(const std::function<NodalData(Point)>& f) const;

  /// Evaluate a discrete field at a point of a given cell.
  FieldValues evaluate(const Vector& field, int cell, Point p) const;
  /// Evaluate at a point anywhere in the closed domain.
  FieldValues evaluate(const Vector& field, Point p) const;

 private:
  RectMesh mesh_;
  DofMap dofmap_;
  ShapeTable assembly_table_;
  ShapeTable error_table_;
  std::vector<int> row_ptr_;
  std::vector<int> col_idx_;
  std::vector<int> cell_positions_;
};

/// Field values at a quadrature point from local coefficients.
FieldValues combine(const BasisValues& basis, const std::array<double, kLocalDofs>& coeffs);

/// a(eta, chi) = int D^2 eta : D^2 chi on free DOFs (SPD).
SparseMatrix assemble_a(const Discretization& disc);
/// L2 mass matrix on free DOFs (SPD).
SparseMatrix assemble_mass(const Discretization& disc);

/// Block matrix of <B'(Psi) xi, Phi> = B(Psi, xi, Phi) + B(xi, Psi, Phi),
/// rows indexed by the test function Phi, columns by xi.
SparseMatrix assemble_b_jacobian(const Discretization& disc, const PairField& psi);
/// Block matrix of <B'(Psi)^* xi, Phi> = B(Psi, Phi, xi) + B(Phi, Psi, xi).
SparseMatrix assemble_b_adjoint(const Discretization& disc, const PairField& psi);

/// Block vector of B(Psi, Psi, Phi_i) over all test functions.
Vector assemble_b_residual(const Discretization& disc, const PairField& psi);

/// b(eta, chi, phi) = 1/2 int cof(D^2 eta) D chi . D phi.
double eval_b(const Discretization& disc, const Vector& eta, const Vector& chi, const Vector& phi);

/// The two sides of int [eta, chi] phi = -int cof(D^2 eta) D chi . D phi.
struct BracketIdentity {
  double lhs = 0.0;  // int [eta, chi] phi
  double rhs = 0.0;  // -2 b(eta, chi, phi)
};
BracketIdentity eval_bracket_identity(const Discretization& disc, const Vector& eta, const Vector& chi,
                                      const Vector& phi);

/// von Karman bracket [eta, chi] from second derivatives.
inline double bracket(const FieldValues& eta, const FieldValues& chi) {
  return eta.dxx * chi.dyy + eta.dyy * chi.dxx - 2.0 * eta.dxy * chi.dxy;
}

/// Load vector int g phi_i over free DOFs of one scalar field, using the
/// error table. Throws std::domain_error naming the cell if g is not finite.
Vector assemble_load(const Discretization& disc, const std::function<double(Point)>& g);
Vector assemble_load(const Discretization& disc, const std::function<double(Point)>& g, const ShapeTable& table);

/// Load vector from precomputed samples of g, cell-major over the points of
/// the table.
Vector assemble_load(const Discretization& disc, std::span<const double> samples, const ShapeTable& table);

/// int_omega u phi_i for a cellwise-constant u on the listed cells.
Vector control_load(const Discretization& disc, std::span<const int> cells, std::span<const double> values);

/// H^2 seminorm |phi|_2 of a discrete field (exact quadrature).
double h2_seminorm(const Discretization& disc, const Vector& field);

}  // namespace vkctrl
