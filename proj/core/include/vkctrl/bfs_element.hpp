#pragma once

#include <array>
#include <vector>

namespace vkctrl {

/// Cubic Hermite basis on [0,1] ordered (value-left, slope-left, value-right,
/// slope-right), with first and second derivatives.
struct Hermite1d {
  std::array<double, 4> value;
  std::array<double, 4> d1;
  std::array<double, 4> d2;
};

Hermite1d hermite1d(double t);

/// Tensor Gauss-Legendre rule on the reference cell [0,1]^2.
struct QuadratureRule {
  int n = 0;  // points per direction
  std::vector<std::array<double, 2>> points;
  std::vector<double> weights;  // sum to 1

  int size() const { return static_cast<int>(weights.size()); }
};

/// Gauss-Legendre rule with n points per direction, 1 <= n <= 12.
QuadratureRule gauss_rule(int n);

/// 1-D Gauss-Legendre nodes and weights on [0,1].
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Degree-of-freedom kinds at each vertex, in local order.
enum class DofKind : int { Value = 0, Dx = 1, Dy = 2, Dxy = 3 };

inline constexpr int kDofsPerNode = 4;
inline constexpr int kLocalDofs = 16;

/// Local basis index = 4 * vertex + kind; vertices counterclockwise from (0,0).
constexpr int local_index(int vertex, DofKind kind) { return kDofsPerNode * vertex + static_cast<int>(kind); }
constexpr int vertex_of(int local) { return local / kDofsPerNode; }
constexpr DofKind kind_of(int local) { return static_cast<DofKind>(local % kDofsPerNode); }

/// Values and derivatives through second order of all 16 basis functions.
struct BasisValues {
  std::array<double, kLocalDofs> v{};
  std::array<double, kLocalDofs> dx{};
  std::array<double, kLocalDofs> dy{};
  std::array<double, kLocalDofs> dxx{};
  std::array<double, kLocalDofs> dxy{};
  std::array<double, kLocalDofs> dyy{};
};

/// Bogner-Fox-Schmit basis on the reference square at (s, t).
BasisValues reference_basis(double s, double t);

/// Basis of a physical hx-by-hy cell at reference coordinates (s, t).
///
/// Functions are scaled so that their nodal functionals are the physical
/// (v, v_x, v_y, v_xy): derivative-kind functions carry factors hx, hy and
/// hx*hy, and derivatives carry the chain-rule factors 1/hx, 1/hy.
BasisValues physical_basis(double s, double t, double hx, double hy);

/// Basis tabulated at the points of a quadrature rule.
struct ShapeTable {
  QuadratureRule rule;
  double hx = 1.0;
  double hy = 1.0;
  std::vector<BasisValues> at;  // one entry per quadrature point

  /// Physical quadrature weight of point q (reference weight times cell area).
  double weight(int q) const { return rule.weights[q] * hx * hy; }
  int size() const { return rule.size(); }
};

/// Reference-cell table (hx = hy = 1).
ShapeTable tabulate(const QuadratureRule& rule);
/// Table for a physical cell of size hx by hy.
ShapeTable tabulate(const QuadratureRule& rule, double hx, double hy);

}  // namespace vkctrl
