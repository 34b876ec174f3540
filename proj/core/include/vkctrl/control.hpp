#pragma once

#include "vkctrl/assembly.hpp"
#include "vkctrl/bounds.hpp"
#include "vkctrl/manufactured.hpp"
#include "vkctrl/mesh.hpp"
#include "vkctrl/solvers.hpp"

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace vkctrl {

/// Cellwise constant control on the cells of omega. Values are clamped to
/// the bounds on construction and on every update.
class ControlField {
 public:
  ControlField(std::vector<int> cells, std::vector<double> values, Bounds bounds);
  static ControlField constant(std::vector<int> cells, double value, Bounds bounds);

  const std::vector<int>& cells() const { return cells_; }
  const std::vector<double>& values() const { return values_; }
  const Bounds& bounds() const { return bounds_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int k) const { return values_[k]; }
  void set(int k, double v) { values_[k] = bounds_.clamp(v); }

  bool at_lower(int k) const { return values_[k] == bounds_.u_a; }
  bool at_upper(int k) const { return values_[k] == bounds_.u_b; }

 private:
  std::vector<int> cells_;
  std::vector<double> values_;
  Bounds bounds_;
};

struct PdasOptions {
  double tol_u = 1e-9;  // absolute, on the max cellwise change
  /// Roundoff exit: with the active set fixed, also stop once the change is
  /// below tol_floor * max(1, |u|_inf) and has not halved over two updates.
  double tol_floor = 1e-9;
  int max_outer = 60;
  double relaxation = 1.0;  // in (0, 1]
  NewtonOptions newton;

  void validate() const;
};

struct ActiveSetCounts {
  int lower = 0;
  int upper = 0;
  int inactive = 0;
  friend bool operator==(const ActiveSetCounts&, const ActiveSetCounts&) = default;
};

ActiveSetCounts count_active(const ControlField& u);

struct OcpSolution {
  ControlField control;
  PairField state;
  PairField adjoint;
  double cost = 0.0;
  int outer_iterations = 0;
  std::vector<ActiveSetCounts> active_set_history;
  std::vector<double> cost_history;    // J at each outer iterate
  std::vector<double> change_history;  // max cellwise change proposed by each update
  std::vector<int> newton_iterations;
  /// Stopped by the roundoff exit rather than tol_u.
  bool stagnated = false;
  /// Factorized tangent at the final state, reusable by callers.
  std::shared_ptr<const Factorization> tangent;
};

class PdasFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sources and observations sampled at the error-table points of every
/// cell (cell-major). f already contains -chi_omega u_bar where applicable.
struct ProblemSamples {
  std::vector<double> f;
  std::vector<double> f_tilde;
  std::vector<double> psi1d;
  std::vector<double> psi2d;
};

ProblemSamples sample_case(const Discretization& disc, const CaseSpec& spec, std::span<const int> omega_cells);

/// Discrete optimal control problem on one discretization:
/// minimize 1/2 |Psi_h - Psi_d|^2 + alpha/2 |u|^2 subject to the state system
/// and u_a <= u <= u_b on omega.
class ControlProblem {
 public:
  ControlProblem(const Discretization& disc, const ProblemSamples& samples, Bounds bounds, OmegaSpec omega);
  /// Manufactured problem of a case, with the case's bounds.
  ControlProblem(const Discretization& disc, const CaseSpec& spec, OmegaSpec omega);

  const Discretization& discretization() const { return disc_; }
  const VonKarmanSystem& system() const { return system_; }
  VonKarmanSystem& system() { return system_; }
  const Bounds& bounds() const { return bounds_; }
  const OmegaSpec& omega() const { return omega_; }
  const std::vector<int>& omega_cells() const { return omega_cells_; }

  ControlField constant_control(double value) const;
  Vector control_load(const ControlField& u) const;

  StateSolution solve_state(const ControlField& u, const NewtonOptions& opts, const PairField* guess = nullptr,
                            std::shared_ptr<const Factorization> tangent_at_guess = nullptr) const;
  /// Adjoint with right-hand side M Psi_h - (Psi_d, .).
  PairField solve_adjoint(const PairField& psi, const Factorization* tangent_at_psi = nullptr) const;
  Vector adjoint_rhs(const PairField& psi) const;

  /// 1/2 int |Psi_h - Psi_d|^2 (exact Psi_d at quadrature points) + alpha/2 sum |T| u_T^2.
  double cost(const PairField& psi, const ControlField& u) const;
  /// Reduced cost j(u) = J(G(u), u) with a full nonlinear state solve.
  double reduced_cost(const ControlField& u, const NewtonOptions& opts, const PairField* guess = nullptr) const;

  /// (1/|T|) int_T theta1_h.
  double cell_mean_adjoint(const PairField& theta, int cell) const;
  /// g_T = |T| (alpha u_T + mean_T theta1_h) for the cells of u.
  std::vector<double> reduced_gradient(const ControlField& u, const PairField& theta) const;
  /// Cellwise clamp(-mean_T theta1_h / alpha).
  ControlField projected_control(const PairField& theta) const;

  /// Fixed-point active-set iteration on the cellwise projection formula.
  /// Starts from clamp(0) unless an initial control (and state guess) is given.
  OcpSolution pdas_solve(const PdasOptions& opts, const ControlField* initial = nullptr,
                         const PairField* state_guess = nullptr) const;

 private:
  const Discretization& disc_;
  Bounds bounds_;
  OmegaSpec omega_;
  std::vector<int> omega_cells_;
  std::vector<double> psi1d_;
  std::vector<double> psi2d_;
  VonKarmanSystem system_;
  SparseMatrix mass_;
  Vector observation_load_;  // [(psi1d, .); (psi2d, .)]
  std::array<double, kLocalDofs> cell_integrals_{};
};

/// max_T |u_T - clamp(-mean_T theta1_h / alpha)|.
double projection_defect(const ControlProblem& problem, const ControlField& u, const PairField& theta);

/// Largest violation of the cellwise variational-inequality sign conditions,
/// scaled by alpha |T|: cells above u_a need g_T <= 0, cells below u_b need
/// g_T >= 0.
double sign_condition_defect(const ControlField& u, std::span<const double> gradient, double cell_area);

/// x -> clamp(-theta1_h(x) / alpha) on the closure of omega.
class PostProcessedControl {
 public:
  PostProcessedControl(const Discretization& disc, Vector theta1, Bounds bounds, OmegaSpec omega);

  /// Throws std::out_of_range for points outside omega.
  double operator()(Point p) const;
  /// Evaluation inside a known cell (no location search, no omega check).
  double in_cell(int cell, Point p) const;

 private:
  const Discretization& disc_;
  Vector theta1_;
  Bounds bounds_;
  OmegaSpec omega_;
};

/// Cellwise values g(centroid of T).
std::vector<double> centroid_project(const std::function<double(Point)>& g, const RectMesh& mesh,
                                     std::span<const int> cells);

}  // namespace vkctrl
