#pragma once

#include "vkctrl/assembly.hpp"
#include "vkctrl/control.hpp"
#include "vkctrl/jet.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

/// Fast self-checks of the discretization, derivatives and optimizer.
namespace vkctrl::verify {

struct Result {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Options {
  /// Run derivative checks against an adjoint with a flipped bracket sign.
  bool adjoint_sign_fault = false;
  std::uint64_t seed = 20240531;
};

std::vector<std::string> property_names();
/// Throws std::invalid_argument for an unknown name.
Result run(const std::string& name, const Options& opts = {});
std::vector<Result> run_all(const Options& opts = {});

/// Errors of a finite-difference sequence and the order fitted between the
/// last two step sizes.
struct OrderCheck {
  std::vector<double> eps;
  std::vector<double> errors;
  double order = 0.0;
};

/// Taylor remainder |R(Psi + e xi) - R(Psi) - e J xi| for the state residual.
OrderCheck jacobian_taylor(const VonKarmanSystem& sys, const PairField& psi, const PairField& xi,
                           const std::vector<double>& eps);
/// max over eps of |[R(Psi + e xi) - R(Psi - e xi)] / 2e - J xi| / |J xi|.
double jacobian_central_defect(const VonKarmanSystem& sys, const PairField& psi, const PairField& xi,
                               const std::vector<double>& eps);

/// |[j(u + e e_k) - j(u - e e_k)] / 2e - g_k| with full nonlinear re-solves.
OrderCheck reduced_gradient_fd(const ControlProblem& problem, const ControlField& u, int k,
                               const std::vector<double>& eps, const NewtonOptions& newton);

/// Quadratic-convergence fit of a Newton residual history.
struct NewtonFit {
  double order = 0.0;        // log(r_n / r_{n-1}) / log(r_{n-1} / r_{n-2})
  double constant_spread = 0.0;  // ratio of the two fitted C in r_{k+1} = C r_k^2
};
NewtonFit fit_newton(const std::vector<double>& residuals);

/// d^{i+j} f / dx^i dy^j at p by central differences with Richardson
/// extrapolation over steps h, h/2, h/4, h/8.
double richardson_partial(const std::function<double(double, double)>& f, Point p, int i, int j, double h);

/// Largest relative deviation between the partials of a jet-valued function
/// and Richardson finite differences of its value.
double jet_fd_deviation(const std::function<Jet4(Point)>& f, Point p);

/// Random field in V_h with entries in (-1, 1).
Vector random_field(int n, std::uint64_t seed);

}  // namespace vkctrl::verify
