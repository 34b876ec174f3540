#include "vkctrl/jet.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vkctrl {

namespace {

constexpr double kFactorial[] = {1.0, 1.0, 2.0, 6.0, 24.0};

struct ProductTerm {
  int out;
  int a;
  int b;
};

// All (a, b) index pairs whose degrees add up to at most 4.
constexpr auto make_product_table() {
  std::array<ProductTerm, 70> table{};
  int n = 0;
  for (int i1 = 0; i1 <= 4; ++i1)
    for (int j1 = 0; i1 + j1 <= 4; ++j1)
      for (int i2 = 0; i1 + j1 + i2 <= 4; ++i2)
        for (int j2 = 0; i1 + j1 + i2 + j2 <= 4; ++j2)
          table[n++] = {Jet4::index(i1 + i2, j1 + j2), Jet4::index(i1, j1), Jet4::index(i2, j2)};
  return table;
}

constexpr auto kProducts = make_product_table();

}  // namespace

Jet4 Jet4::x(double x0) {
  Jet4 j(x0);
  j.coeff(1, 0) = 1.0;
  return j;
}

Jet4 Jet4::y(double y0) {
  Jet4 j(y0);
  j.coeff(0, 1) = 1.0;
  return j;
}

double Jet4::derivative(int i, int j) const {
  if (i < 0 || j < 0 || i + j > kOrder) throw std::out_of_range("Jet4::derivative: order exceeds 4");
  return coeff(i, j) * kFactorial[i] * kFactorial[j];
}

double Jet4::bilaplacian() const { return 24.0 * coeff(4, 0) + 8.0 * coeff(2, 2) + 24.0 * coeff(0, 4); }

Jet4& Jet4::operator+=(const Jet4& o) {
  for (int k = 0; k < kSize; ++k) c_[k] += o.c_[k];
  return *this;
}

Jet4& Jet4::operator-=(const Jet4& o) {
  for (int k = 0; k < kSize; ++k) c_[k] -= o.c_[k];
  return *this;
}

Jet4& Jet4::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

Jet4& Jet4::operator*=(const Jet4& o) {
  std::array<double, kSize> out{};
  for (const auto& t : kProducts) out[t.out] += c_[t.a] * o.c_[t.b];
  c_ = out;
  return *this;
}

Jet4& Jet4::operator/=(const Jet4& o) {
  const double v = o.value();
  if (v == 0.0) throw std::domain_error("Jet4: division by a jet with zero value");
  const double r = 1.0 / v;
  return *this *= o.compose({r, -r * r, r * r * r, -r * r * r * r, r * r * r * r * r});
}

Jet4 Jet4::compose(const std::array<double, 5>& taylor) const {
  Jet4 d = *this;
  d.c_[0] = 0.0;
  Jet4 out(taylor[0]);
  Jet4 power = d;
  for (int k = 1; k <= kOrder; ++k) {
    out += power * taylor[k];
    if (k < kOrder) power *= d;
  }
  return out;
}

Jet4 sin(const Jet4& a) {
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  return a.compose({s, c, -s / 2.0, -c / 6.0, s / 24.0});
}

Jet4 cos(const Jet4& a) {
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  return a.compose({c, -s, -c / 2.0, s / 6.0, c / 24.0});
}

Jet4 exp(const Jet4& a) {
  const double e = std::exp(a.value());
  return a.compose({e, e, e / 2.0, e / 6.0, e / 24.0});
}

Jet4 log(const Jet4& a) {
  const double v = a.value();
  if (!(v > 0.0)) throw std::domain_error("Jet4 log: nonpositive argument " + std::to_string(v));
  const double r = 1.0 / v;
  return a.compose({std::log(v), r, -r * r / 2.0, r * r * r / 3.0, -r * r * r * r / 4.0});
}

Jet4 pow(const Jet4& a, double p) {
  const double v = a.value();
  if (!(v > 0.0)) throw std::domain_error("Jet4 pow: nonpositive base " + std::to_string(v));
  std::array<double, 5> t{};
  double falling = 1.0;
  for (int k = 0; k <= 4; ++k) {
    t[k] = falling * std::pow(v, p - k) / kFactorial[k];
    falling *= p - k;
  }
  return a.compose(t);
}

Jet4 sqrt(const Jet4& a) { return pow(a, 0.5); }

Jet4 atan2(const Jet4& y, const Jet4& x) {
  const double x0 = x.value();
  const double y0 = y.value();
  if (x0 == 0.0 && y0 == 0.0) throw std::domain_error("Jet4 atan2: undefined at the origin");
  // atan2(y, x) - atan2(y0, x0) = atan(z) with z = (x0 y - y0 x) / (x0 x + y0 y), z(0) = 0.
  const Jet4 z = (x0 * y - y0 * x) / (x0 * x + y0 * y);
  const Jet4 z3 = z * z * z;
  return Jet4(std::atan2(y0, x0)) + z - z3 * (1.0 / 3.0);
}

double bracket(const Jet4& a, const Jet4& b) {
  return a.dxx() * b.dyy() + a.dyy() * b.dxx() - 2.0 * a.dxy() * b.dxy();
}

}  // namespace vkctrl
