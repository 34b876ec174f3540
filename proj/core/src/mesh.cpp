#include "vkctrl/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace vkctrl {

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::UnitSquare:
      return "unit_square";
    case DomainKind::LShape:
      return "l_shape";
  }
  return "unknown";
}

namespace {

// Background-grid slot (i, j) belongs to the domain?
bool slot_in_domain(DomainKind domain, int i, int j, int n) {
  if (i < 0 || j < 0 || i >= n || j >= n) return false;
  if (domain == DomainKind::UnitSquare) return true;
  // LShape: the removed quadrant is x >= 0, y <= 0, i.e. i >= n/2 and j < n/2.
  return !(i >= n / 2 && j < n / 2);
}

}  // namespace

RectMesh RectMesh::build(DomainKind domain, int level) {
  if (level < 1 || level > kMaxLevel) {
    throw std::invalid_argument("build_mesh: unsupported level " + std::to_string(level) +
                                " (expected 1.." + std::to_string(kMaxLevel) + ")");
  }
  RectMesh mesh;
  mesh.domain_ = domain;
  mesh.level_ = level;
  mesh.n_ = 1 << (level + 1);
  const int n = mesh.n_;
  const double extent = domain == DomainKind::UnitSquare ? 1.0 : 2.0;
  mesh.origin_ = domain == DomainKind::UnitSquare ? Point{0.0, 0.0} : Point{-1.0, -1.0};
  mesh.hx_ = extent / n;
  mesh.hy_ = extent / n;

  // A grid node exists if any of its four surrounding slots is a cell; it is
  // a boundary node if not all four are.
  std::vector<int> node_id(static_cast<std::size_t>((n + 1) * (n + 1)), -1);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      int owners = 0;
      for (int dj = -1; dj <= 0; ++dj)
        for (int di = -1; di <= 0; ++di) owners += slot_in_domain(domain, i + di, j + dj, n) ? 1 : 0;
      if (owners == 0) continue;
      node_id[j * (n + 1) + i] = static_cast<int>(mesh.nodes_.size());
      mesh.nodes_.push_back({mesh.origin_.x + extent * i / n, mesh.origin_.y + extent * j / n});
      mesh.boundary_.push_back(owners < 4 ? 1 : 0);
    }
  }

  mesh.grid_cell_.assign(static_cast<std::size_t>(n * n), -1);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (!slot_in_domain(domain, i, j, n)) continue;
      mesh.grid_cell_[j * n + i] = static_cast<int>(mesh.cells_.size());
      mesh.cells_.push_back({node_id[j * (n + 1) + i], node_id[j * (n + 1) + i + 1],
                             node_id[(j + 1) * (n + 1) + i + 1], node_id[(j + 1) * (n + 1) + i]});
    }
  }

  for (int v = 0; v < mesh.num_nodes(); ++v)
    if (mesh.boundary_[v]) mesh.boundary_nodes_.push_back(v);
  return mesh;
}

double RectMesh::h() const { return std::hypot(hx_, hy_); }

double RectMesh::h_over_h0() const { return std::ldexp(1.0, -level_); }

Point RectMesh::cell_centroid(int cell) const {
  const Point o = cell_origin(cell);
  return {o.x + 0.5 * hx_, o.y + 0.5 * hy_};
}

int RectMesh::cell_at(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) return -1;
  return grid_cell_[j * n_ + i];
}

std::optional<int> RectMesh::locate(Point p) const {
  const double s = (p.x - origin_.x) / hx_;
  const double t = (p.y - origin_.y) / hy_;
  constexpr double kSlack = 1e-12;
  if (s < -kSlack || t < -kSlack || s > n_ + kSlack || t > n_ + kSlack) return std::nullopt;
  const int i0 = std::clamp(static_cast<int>(std::floor(s)), 0, n_ - 1);
  const int j0 = std::clamp(static_cast<int>(std::floor(t)), 0, n_ - 1);
  // Points on (or within rounding of) grid lines may belong to a neighbouring
  // slot when the natural one is carved out.
  for (const int dj : {0, -1, 1}) {
    for (const int di : {0, -1, 1}) {
      const int i = i0 + di;
      const int j = j0 + dj;
      const int c = cell_at(i, j);
      if (c < 0) continue;
      if (s >= i - kSlack && s <= i + 1 + kSlack && t >= j - kSlack && t <= j + 1 + kSlack) return c;
    }
  }
  return std::nullopt;
}

OmegaSpec OmegaSpec::rectangle(Point lower, Point upper) {
  if (!(lower.x < upper.x) || !(lower.y < upper.y))
    throw std::invalid_argument("omega: empty rectangle");
  OmegaSpec spec;
  spec.whole = false;
  spec.lower = lower;
  spec.upper = upper;
  return spec;
}

OmegaSpec OmegaSpec::parse(const std::string& text) {
  if (text.empty() || text == "whole" || text == "all") return whole_domain();
  std::string buf = text;
  std::replace(buf.begin(), buf.end(), ',', ' ');
  std::istringstream in(buf);
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  if (!(in >> x0 >> y0 >> x1 >> y1))
    throw std::invalid_argument("omega: expected 'whole' or 'x0,y0,x1,y1', got '" + text + "'");
  std::string rest;
  if (in >> rest) throw std::invalid_argument("omega: trailing input in '" + text + "'");
  return rectangle({x0, y0}, {x1, y1});
}

std::string OmegaSpec::to_string() const {
  if (whole) return "whole";
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g", lower.x, lower.y, upper.x, upper.y);
  return buf;
}

std::vector<int> cells_in_omega(const RectMesh& mesh, const OmegaSpec& omega) {
  std::vector<int> out;
  if (omega.whole) {
    out.resize(mesh.num_cells());
    for (int c = 0; c < mesh.num_cells(); ++c) out[c] = c;
    return out;
  }
  const Point o = mesh.grid_origin();
  auto grid_index = [](double coord, double origin, double h, const char* what) {
    const double s = (coord - origin) / h;
    const double r = std::round(s);
    if (std::abs(s - r) > 1e-9)
      throw std::invalid_argument(std::string("cells_in_omega: omega ") + what +
                                  " coordinate does not lie on a mesh grid line");
    return static_cast<int>(r);
  };
  const int i0 = grid_index(omega.lower.x, o.x, mesh.hx(), "x");
  const int i1 = grid_index(omega.upper.x, o.x, mesh.hx(), "x");
  const int j0 = grid_index(omega.lower.y, o.y, mesh.hy(), "y");
  const int j1 = grid_index(omega.upper.y, o.y, mesh.hy(), "y");
  for (int j = j0; j < j1; ++j) {
    for (int i = i0; i < i1; ++i) {
      const int c = mesh.cell_at(i, j);
      if (c < 0) throw std::invalid_argument("cells_in_omega: omega extends outside the domain");
      out.push_back(c);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_mesh(std::ostream& out, const RectMesh& mesh) {
  char buf[96];
  for (int v = 0; v < mesh.num_nodes(); ++v) {
    const Point p = mesh.nodes()[v];
    std::snprintf(buf, sizeof buf, "n %.17g %.17g %d\n", p.x, p.y, mesh.is_boundary(v) ? 1 : 0);
    out << buf;
  }
  for (const auto& c : mesh.cells()) out << "c " << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << c[3] << '\n';
}

}  // namespace vkctrl
