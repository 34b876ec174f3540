#include "vkctrl/manufactured.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vkctrl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kReentrantAngle = 1.5 * std::numbers::pi;

FieldJets ex1_fields(Point p) {
  const Jet4 sx = sin(kPi * Jet4::x(p.x));
  const Jet4 sy = sin(kPi * Jet4::y(p.y));
  const Jet4 psi = (sx * sx) * (sy * sy);
  const Jet4 x = Jet4::x(p.x);
  const Jet4 y = Jet4::y(p.y);
  const Jet4 bx = x * (1.0 - x);
  const Jet4 by = y * (1.0 - y);
  const Jet4 theta = (bx * bx) * (by * by);
  return {psi, psi, theta, theta};
}

FieldJets ex2_fields(Point p, double gamma) {
  if (p.x == 0.0 && p.y == 0.0) throw std::domain_error("exact_eval: singular at the re-entrant corner");
  if (p.x > 0.0 && p.y < 0.0) throw std::domain_error("exact_eval: point outside the L-shaped domain");
  const Jet4 x = Jet4::x(p.x);
  const Jet4 y = Jet4::y(p.y);
  const Jet4 r2 = x * x + y * y;
  Jet4 theta = atan2(y, x);
  if (theta.value() < 0.0) theta += Jet4(2.0 * kPi);
  // (r^2 cos^2 theta - 1)^2 (r^2 sin^2 theta - 1)^2 = (x^2 - 1)^2 (y^2 - 1)^2
  const Jet4 cx = x * x - 1.0;
  const Jet4 cy = y * y - 1.0;
  const Jet4 cutoff = (cx * cx) * (cy * cy);
  const Jet4 radial = exp((0.5 * (1.0 + gamma)) * log(r2));
  const Jet4 u = cutoff * radial * corner_angular(theta, gamma, kReentrantAngle);
  return {u, u, u, u};
}

}  // namespace

double gamma_residual(double gamma, double omega_angle) {
  const double s = std::sin(gamma * omega_angle);
  const double so = std::sin(omega_angle);
  return s * s - gamma * gamma * so * so;
}

double gamma_root(double omega_angle, double lo, double hi) {
  double f_lo = gamma_residual(lo, omega_angle);
  const double f_hi = gamma_residual(hi, omega_angle);
  if (f_lo * f_hi > 0.0) throw std::invalid_argument("gamma_root: residual has no sign change on the bracket");
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = gamma_residual(mid, omega_angle);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Jet4 corner_angular(const Jet4& theta, double gamma, double w) {
  const double gm = gamma - 1.0;
  const double gp = gamma + 1.0;
  const double a = std::sin(gm * w) / gm - std::sin(gp * w) / gp;
  const double b = std::cos(gm * w) - std::cos(gp * w);
  return a * (cos(gm * theta) - cos(gp * theta)) - b * (sin(gm * theta) * (1.0 / gm) - sin(gp * theta) * (1.0 / gp));
}

CaseSpec make_case(CaseId id) {
  CaseSpec spec;
  spec.id = id;
  switch (id) {
    case CaseId::Ex1:
      spec.name = "ex1";
      spec.domain = DomainKind::UnitSquare;
      spec.bounds = {-750.0, -50.0, 1e-5};
      spec.gamma = 1.0;
      spec.fields = ex1_fields;
      return spec;
    case CaseId::Ex2: {
      spec.name = "ex2";
      spec.domain = DomainKind::LShape;
      spec.bounds = {-600.0, -50.0, 1e-3};
      const double gamma = gamma_root(kReentrantAngle);
      spec.gamma = gamma;
      spec.fields = [gamma](Point p) { return ex2_fields(p, gamma); };
      return spec;
    }
    case CaseId::Custom:
      break;
  }
  throw std::invalid_argument("make_case: custom cases must be assembled by the caller");
}

CaseSpec make_case(std::string_view name) {
  if (name == "ex1") return make_case(CaseId::Ex1);
  if (name == "ex2") return make_case(CaseId::Ex2);
  throw std::invalid_argument("unknown case '" + std::string(name) + "' (expected ex1 or ex2)");
}

Jet4 exact_eval(const CaseSpec& spec, ExactField field, Point p) {
  return spec.fields(p)[static_cast<int>(field)];
}

ManufacturedData sources_and_observations(const CaseSpec& spec, const FieldJets& jets, bool in_omega) {
  const Jet4& psi1 = jets[0];
  const Jet4& psi2 = jets[1];
  const Jet4& theta1 = jets[2];
  const Jet4& theta2 = jets[3];
  ManufacturedData d;
  d.u_bar = spec.bounds.project_adjoint(theta1.value());
  // Delta^2 psi1 = [psi1, psi2] + f + C u,   Delta^2 psi2 = -1/2 [psi1, psi1] + f_tilde
  d.f = psi1.bilaplacian() - bracket(psi1, psi2) - (in_omega ? d.u_bar : 0.0);
  d.f_tilde = psi2.bilaplacian() + 0.5 * bracket(psi1, psi1);
  // Delta^2 theta1 - [psi2, theta1] + [psi1, theta2] = psi1 - psi1d
  // Delta^2 theta2 - [psi1, theta1]                  = psi2 - psi2d
  d.psi1d = psi1.value() - theta1.bilaplacian() + bracket(psi2, theta1) - bracket(psi1, theta2);
  d.psi2d = psi2.value() - theta2.bilaplacian() + bracket(psi1, theta1);
  return d;
}

ManufacturedData sources_and_observations(const CaseSpec& spec, Point p, bool in_omega) {
  return sources_and_observations(spec, spec.fields(p), in_omega);
}

}  // namespace vkctrl
