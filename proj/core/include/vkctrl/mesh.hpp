#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vkctrl {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class DomainKind {
  UnitSquare,  // (0,1)^2
  LShape       // (-1,1)^2 minus [0,1) x (-1,0]
};

std::string to_string(DomainKind kind);

/// Largest refinement level accepted by RectMesh::build.
inline constexpr int kMaxLevel = 8;

/// Structured mesh of congruent axis-aligned square cells.
///
/// Both domains are carved out of a background grid of 2^(level+1) cells per
/// side; nodes and cells are numbered lexicographically by (y, x). Cells are
/// stored as node quadruples counterclockwise from the lower-left corner.
class RectMesh {
 public:
  static RectMesh build(DomainKind domain, int level);

  DomainKind domain() const { return domain_; }
  int level() const { return level_; }

  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<std::array<int, 4>>& cells() const { return cells_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }

  double hx() const { return hx_; }
  double hy() const { return hy_; }
  /// Cell diagonal.
  double h() const;
  /// Mesh size relative to the level-0 mesh of the same domain (= 2^-level).
  double h_over_h0() const;
  double cell_area() const { return hx_ * hy_; }

  bool is_boundary(int node) const { return boundary_[node] != 0; }
  const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }
  int num_interior_nodes() const { return num_nodes() - static_cast<int>(boundary_nodes_.size()); }

  /// Lower-left corner of a cell.
  Point cell_origin(int cell) const { return nodes_[cells_[cell][0]]; }
  Point cell_centroid(int cell) const;

  /// Cell containing p (closed cells; ties resolve to the lower-left
  /// neighbour that exists). Empty if p lies outside the closed domain.
  std::optional<int> locate(Point p) const;

  /// Lower-left corner and extent of the background grid.
  Point grid_origin() const { return origin_; }
  int cells_per_side() const { return n_; }
  /// Cell index of background grid slot (i, j), or -1 if the slot is carved out.
  int cell_at(int i, int j) const;

 private:
  DomainKind domain_ = DomainKind::UnitSquare;
  int level_ = 0;
  int n_ = 0;
  Point origin_;
  double hx_ = 0.0;
  double hy_ = 0.0;
  std::vector<Point> nodes_;
  std::vector<std::array<int, 4>> cells_;
  std::vector<char> boundary_;
  std::vector<int> boundary_nodes_;
  std::vector<int> grid_cell_;
};

/// Control subdomain: either the whole domain or an axis-aligned rectangle
/// whose corners are mesh vertices.
struct OmegaSpec {
  bool whole = true;
  Point lower;
  Point upper;

  static OmegaSpec whole_domain() { return {}; }
  static OmegaSpec rectangle(Point lower, Point upper);
  /// "whole" or "x0,y0,x1,y1".
  static OmegaSpec parse(const std::string& text);
  std::string to_string() const;
};

/// Cells tiling omega. Throws std::invalid_argument when the rectangle
/// corners do not fall on mesh grid lines or omega is empty.
std::vector<int> cells_in_omega(const RectMesh& mesh, const OmegaSpec& omega);

/// Plain-text dump: "n x y b" per node, then "c i0 i1 i2 i3" per cell.
void write_mesh(std::ostream& out, const RectMesh& mesh);

}  // namespace vkctrl
