#pragma once

#include "vkctrl/assembly.hpp"
#include "vkctrl/sparse.hpp"

#include <memory>
#include <stdexcept>
#include <vector>

namespace vkctrl {

struct NewtonOptions {
  double tol_abs = 1e-11;
  double tol_rel = 1e-10;
  /// Also accept when the update is below tol_step * max(1, |Psi|_inf); the
  /// residual of fine meshes cannot reach tol_abs in double precision.
  double tol_step = 1e-8;
  int max_iter = 25;
  /// Solve Newton systems by GMRES preconditioned with an earlier tangent
  /// factorization; false factorizes the tangent at every step.
  bool reuse_factorization = true;

  void validate() const;
};

struct SolveReport {
  int iterations = 0;  // Newton updates applied
  std::vector<double> residual_history;
  std::vector<double> step_history;  // max-norm of each update
  int factorizations = 0;
  bool converged = false;
};

class NewtonFailure : public std::runtime_error {
 public:
  NewtonFailure(const std::string& what, SolveReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

/// Converged state together with a factorized tangent at that state or at
/// an earlier iterate, good enough to precondition solves at the state.
struct StateSolution {
  PairField psi;
  SolveReport report;
  std::shared_ptr<const Factorization> tangent;
};

/// Discrete von Karman state system
///   A(Psi, Phi) + B(Psi, Psi, Phi) = (f + C u, phi1) + (f_tilde, phi2)
/// on one discretization, with f and f_tilde given as load vectors.
class VonKarmanSystem {
 public:
  VonKarmanSystem(const Discretization& disc, Vector load_f, Vector load_f_tilde);

  const Discretization& discretization() const { return disc_; }
  int n_free() const { return disc_.n_free(); }
  const SparseMatrix& stiffness() const { return a_; }

  /// R(Psi) = A Psi + B(Psi, Psi, .) - [f + C u; f_tilde].
  Vector residual(const PairField& psi, const Vector& control_load) const;
  /// Block matrix A + B'(Psi).
  SparseMatrix tangent(const PairField& psi) const;

  /// Newton's method from the initial guess (zero if null). Each linear
  /// system is solved by GMRES preconditioned with the most recent tangent
  /// factorization, which is renewed only when GMRES stalls. A factorization
  /// at or near the guess may be passed in. Throws NewtonFailure carrying the
  /// residual history.
  StateSolution solve_state(const Vector& control_load, const NewtonOptions& opts,
                            const PairField* initial_guess = nullptr,
                            std::shared_ptr<const Factorization> tangent_at_guess = nullptr) const;

  /// Solves [A + B'(Psi)]^T Theta = rhs, preconditioned with the given
  /// factorization of a nearby tangent when available.
  PairField solve_adjoint(const PairField& psi, const Vector& rhs, const Factorization* near_tangent = nullptr) const;

  /// Flip the sign of the bracket coupling in the adjoint operator only.
  /// Used to check that derivative tests detect an inconsistent adjoint.
  void inject_adjoint_sign_fault(bool on) { adjoint_fault_ = on; }

 private:
  const Discretization& disc_;
  SparseMatrix a_;
  Vector load_f_;
  Vector load_f_tilde_;
  bool adjoint_fault_ = false;
};

/// Adds a scalar matrix to both diagonal blocks of a block matrix built on
/// Discretization::block_pattern().
void add_to_diagonal_blocks(SparseMatrix& block, const SparseMatrix& scalar);

}  // namespace vkctrl
