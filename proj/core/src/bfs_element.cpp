#include "vkctrl/bfs_element.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vkctrl {

Hermite1d hermite1d(double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  Hermite1d h;
  h.value = {1.0 - 3.0 * t2 + 2.0 * t3, t - 2.0 * t2 + t3, 3.0 * t2 - 2.0 * t3, t3 - t2};
  h.d1 = {6.0 * t2 - 6.0 * t, 1.0 - 4.0 * t + 3.0 * t2, 6.0 * t - 6.0 * t2, 3.0 * t2 - 2.0 * t};
  h.d2 = {12.0 * t - 6.0, 6.0 * t - 4.0, 6.0 - 12.0 * t, 6.0 * t - 2.0};
  return h;
}

void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1 || n > 12) throw std::invalid_argument("gauss_rule: n = " + std::to_string(n) + " outside 1..12");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  // P_n(x) and P_n'(x) by the three-term recurrence.
  auto legendre = [n](double x) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    return std::array<double, 2>{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(x);
      const double step = p / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const double dp = legendre(x)[1];
    // Map [-1,1] -> [0,1], ascending order.
    nodes[n - 1 - i] = 0.5 * (1.0 + x);
    weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

QuadratureRule gauss_rule(int n) {
  std::vector<double> x;
  std::vector<double> w;
  gauss_legendre_01(n, x, w);
  QuadratureRule rule;
  rule.n = n;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      rule.points.push_back({x[i], x[j]});
      rule.weights.push_back(w[i] * w[j]);
    }
  }
  return rule;
}

namespace {

// Hermite 1-D index of (vertex coordinate c in {0,1}, slope flag).
constexpr int hermite_slot(int corner, bool slope) { return 2 * corner + (slope ? 1 : 0); }

constexpr std::array<std::array<int, 2>, 4> kCorners = {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};

}  // namespace

BasisValues physical_basis(double s, double t, double hx, double hy) {
  const Hermite1d hs = hermite1d(s);
  const Hermite1d ht = hermite1d(t);
  BasisValues b;
  for (int a = 0; a < 4; ++a) {
    for (int k = 0; k < kDofsPerNode; ++k) {
      const bool slope_x = k == 1 || k == 3;
      const bool slope_y = k == 2 || k == 3;
      const int ix = hermite_slot(kCorners[a][0], slope_x);
      const int iy = hermite_slot(kCorners[a][1], slope_y);
      const double scale = (slope_x ? hx : 1.0) * (slope_y ? hy : 1.0);
      const int l = local_index(a, static_cast<DofKind>(k));
      b.v[l] = scale * hs.value[ix] * ht.value[iy];
      b.dx[l] = scale * hs.d1[ix] * ht.value[iy] / hx;
      b.dy[l] = scale * hs.value[ix] * ht.d1[iy] / hy;
      b.dxx[l] = scale * hs.d2[ix] * ht.value[iy] / (hx * hx);
      b.dxy[l] = scale * hs.d1[ix] * ht.d1[iy] / (hx * hy);
      b.dyy[l] = scale * hs.value[ix] * ht.d2[iy] / (hy * hy);
    }
  }
  return b;
}

BasisValues reference_basis(double s, double t) { return physical_basis(s, t, 1.0, 1.0); }

ShapeTable tabulate(const QuadratureRule& rule, double hx, double hy) {
  ShapeTable table;
  table.rule = rule;
  table.hx = hx;
  table.hy = hy;
  table.at.reserve(rule.points.size());
  for (const auto& p : rule.points) table.at.push_back(physical_basis(p[0], p[1], hx, hy));
  return table;
}

ShapeTable tabulate(const QuadratureRule& rule) { return tabulate(rule, 1.0, 1.0); }

}  // namespace vkctrl
