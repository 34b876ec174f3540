#pragma once

#include <array>
#include <cstddef>

namespace vkctrl {

/// Truncated bivariate Taylor expansion to total order 4.
///
/// Coefficient (i, j) holds d^{i+j} f / dx^i dy^j / (i! j!) at the expansion
/// point; products and compositions drop every term of total degree > 4.
class Jet4 {
 public:
  static constexpr int kOrder = 4;
  static constexpr int kSize = 15;

  constexpr Jet4() = default;
  /// Constant jet.
  constexpr Jet4(double value) { c_[0] = value; }  // NOLINT(google-explicit-constructor)

  /// Jets of the coordinate functions at (x0, y0).
  static Jet4 x(double x0);
  static Jet4 y(double y0);

  static constexpr int index(int i, int j) {
    // Ordered by total degree, then by descending power of x.
    const int d = i + j;
    return d * (d + 1) / 2 + j;
  }

  double coeff(int i, int j) const { return c_[index(i, j)]; }
  double& coeff(int i, int j) { return c_[index(i, j)]; }
  const std::array<double, kSize>& coefficients() const { return c_; }

  double value() const { return c_[0]; }
  /// Partial derivative d^{i+j} f / dx^i dy^j.
  double derivative(int i, int j) const;

  double dx() const { return coeff(1, 0); }
  double dy() const { return coeff(0, 1); }
  double dxx() const { return 2.0 * coeff(2, 0); }
  double dxy() const { return coeff(1, 1); }
  double dyy() const { return 2.0 * coeff(0, 2); }
  /// f_xxxx + 2 f_xxyy + f_yyyy.
  double bilaplacian() const;

  Jet4& operator+=(const Jet4& o);
  Jet4& operator-=(const Jet4& o);
  Jet4& operator*=(const Jet4& o);
  Jet4& operator*=(double s);
  Jet4& operator/=(const Jet4& o);

  friend Jet4 operator+(Jet4 a, const Jet4& b) { return a += b; }
  friend Jet4 operator-(Jet4 a, const Jet4& b) { return a -= b; }
  friend Jet4 operator*(Jet4 a, const Jet4& b) { return a *= b; }
  friend Jet4 operator*(Jet4 a, double s) { return a *= s; }
  friend Jet4 operator*(double s, Jet4 a) { return a *= s; }
  friend Jet4 operator/(Jet4 a, const Jet4& b) { return a /= b; }
  friend Jet4 operator-(Jet4 a) { return a *= -1.0; }

  /// Compose with a univariate function given its first five Taylor
  /// coefficients f^(k)(value())/k!, k = 0..4.
  Jet4 compose(const std::array<double, 5>& taylor) const;

 private:
  std::array<double, kSize> c_{};
};

Jet4 sin(const Jet4& a);
Jet4 cos(const Jet4& a);
Jet4 exp(const Jet4& a);
/// Natural log; throws std::domain_error for a nonpositive value.
Jet4 log(const Jet4& a);
/// a^p for real p; throws std::domain_error for a nonpositive base value.
Jet4 pow(const Jet4& a, double p);
Jet4 sqrt(const Jet4& a);
/// Two-argument arctangent; value in (-pi, pi]. Throws at the origin.
Jet4 atan2(const Jet4& y, const Jet4& x);

/// von Karman bracket [a, b] at the expansion point.
double bracket(const Jet4& a, const Jet4& b);

}  // namespace vkctrl
