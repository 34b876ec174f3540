#pragma once

#include "vkctrl/assembly.hpp"
#include "vkctrl/bounds.hpp"
#include "vkctrl/jet.hpp"
#include "vkctrl/mesh.hpp"

#include <array>
#include <functional>
#include <string>
#include <string_view>

namespace vkctrl {

enum class CaseId { Ex1, Ex2, Custom };

enum class ExactField { Psi1 = 0, Psi2 = 1, Theta1 = 2, Theta2 = 3 };

/// Jets of (psi1, psi2, theta1, theta2) at a point.
using FieldJets = std::array<Jet4, 4>;

/// A manufactured optimal-control problem: exact state and adjoint fields
/// from which sources, observations and the exact control are derived.
struct CaseSpec {
  CaseId id = CaseId::Custom;
  std::string name;
  DomainKind domain = DomainKind::UnitSquare;
  Bounds bounds;
  double gamma = 1.0;  // elliptic regularity index of the exact fields
  std::function<FieldJets(Point)> fields;
};

/// Example 1 (unit square, smooth) or Example 2 (L-shape, corner singularity).
CaseSpec make_case(CaseId id);
/// "ex1" or "ex2"; throws std::invalid_argument otherwise.
CaseSpec make_case(std::string_view name);

/// Root of sin^2(gamma w) = gamma^2 sin^2(w) in (lo, hi) by bisection.
/// Throws std::invalid_argument if the residual does not change sign.
double gamma_root(double omega_angle, double lo = 0.5, double hi = 0.6);
double gamma_residual(double gamma, double omega_angle);

/// Angular part g_{gamma,omega}(theta) of the corner singular function.
Jet4 corner_angular(const Jet4& theta, double gamma, double omega_angle);

Jet4 exact_eval(const CaseSpec& spec, ExactField field, Point p);

/// Sources, observations and exact control at a point.
struct ManufacturedData {
  double f = 0.0;        // load of the first state equation
  double f_tilde = 0.0;  // load of the second state equation
  double psi1d = 0.0;
  double psi2d = 0.0;
  double u_bar = 0.0;  // clamp(-theta1 / alpha)
};

ManufacturedData sources_and_observations(const CaseSpec& spec, Point p, bool in_omega = true);
ManufacturedData sources_and_observations(const CaseSpec& spec, const FieldJets& jets, bool in_omega = true);

/// (v, v_x, v_y, v_xy) of a jet, for nodal interpolation.
inline NodalData nodal_data(const Jet4& j) { return {j.value(), j.dx(), j.dy(), j.dxy()}; }

}  // namespace vkctrl
