#include "vkctrl/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vkctrl {

void NewtonOptions::validate() const {
  if (!(tol_abs > 0.0) || !(tol_rel > 0.0) || !(tol_step > 0.0))
    throw std::invalid_argument("NewtonOptions: tolerances must be positive");
  if (max_iter < 1) throw std::invalid_argument("NewtonOptions: max_iter must be >= 1");
}

void add_to_diagonal_blocks(SparseMatrix& block, const SparseMatrix& scalar) {
  const int n = scalar.rows();
  if (block.rows() != 2 * n) throw std::invalid_argument("add_to_diagonal_blocks: size mismatch");
  const auto& srp = scalar.row_ptr();
  const auto& brp = block.row_ptr();
  const auto& sv = scalar.values();
  auto& bv = block.values();
  for (int r = 0; r < 2; ++r) {
    for (int i = 0; i < n; ++i) {
      const int len = srp[i + 1] - srp[i];
      if (brp[r * n + i + 1] - brp[r * n + i] != 2 * len)
        throw std::invalid_argument("add_to_diagonal_blocks: block pattern mismatch");
      const int dst = brp[r * n + i] + r * len;
      for (int k = 0; k < len; ++k) bv[dst + k] += sv[srp[i] + k];
    }
  }
}

VonKarmanSystem::VonKarmanSystem(const Discretization& disc, Vector load_f, Vector load_f_tilde)
    : disc_(disc), a_(assemble_a(disc)), load_f_(std::move(load_f)), load_f_tilde_(std::move(load_f_tilde)) {
  if (load_f_.size() != disc.n_free() || load_f_tilde_.size() != disc.n_free())
    throw std::invalid_argument("VonKarmanSystem: load vector size mismatch");
}

Vector VonKarmanSystem::residual(const PairField& psi, const Vector& control_load) const {
  const int n = n_free();
  Vector r = assemble_b_residual(disc_, psi);
  r.head(n) += a_ * psi.first - load_f_ - control_load;
  r.tail(n) += a_ * psi.second - load_f_tilde_;
  return r;
}

SparseMatrix VonKarmanSystem::tangent(const PairField& psi) const {
  SparseMatrix j = assemble_b_jacobian(disc_, psi);
  add_to_diagonal_blocks(j, a_);
  return j;
}

namespace {

constexpr double kKrylovTol = 1e-12;
constexpr int kKrylovMaxIter = 30;

/// J x = b (or J^T x = b) by GMRES preconditioned with lu. When GMRES stalls,
/// J is factorized and replaces lu.
Vector tangent_solve(const SparseMatrix& j, std::shared_ptr<const Factorization>& lu, const Vector& b,
                     bool transposed, bool reuse, SolveReport* report) {
  if (lu && reuse) {
    KrylovReport k;
    Vector x = preconditioned_gmres(j, *lu, b, transposed, kKrylovTol, kKrylovMaxIter, k);
    if (k.converged) return x;
  }
  lu = std::make_shared<Factorization>(Factorization::factorize(j));
  if (report) ++report->factorizations;
  return transposed ? lu->solve_transposed(b) : lu->solve(b);
}

}  // namespace

StateSolution VonKarmanSystem::solve_state(const Vector& control_load, const NewtonOptions& opts,
                                           const PairField* initial_guess,
                                           std::shared_ptr<const Factorization> tangent_at_guess) const {
  opts.validate();
  StateSolution out;
  out.psi = initial_guess ? *initial_guess : PairField::zero(n_free());
  out.tangent = std::move(tangent_at_guess);

  double r0 = -1.0;
  for (int it = 0;; ++it) {
    const Vector r = residual(out.psi, control_load);
    const double rn = r.norm();
    out.report.residual_history.push_back(rn);
    if (r0 < 0.0) r0 = rn;
    if (!std::isfinite(rn)) break;
    if (rn <= std::max(opts.tol_abs, opts.tol_rel * r0)) {
      out.report.converged = true;
      break;
    }
    if (it == opts.max_iter) break;

    const PairField step = PairField::from_stacked(
        tangent_solve(tangent(out.psi), out.tangent, r, false, opts.reuse_factorization, &out.report));
    out.psi.first -= step.first;
    out.psi.second -= step.second;
    ++out.report.iterations;

    const double step_norm = std::max(step.first.lpNorm<Eigen::Infinity>(), step.second.lpNorm<Eigen::Infinity>());
    out.report.step_history.push_back(step_norm);
    const double scale = std::max(
        {1.0, out.psi.first.lpNorm<Eigen::Infinity>(), out.psi.second.lpNorm<Eigen::Infinity>()});
    if (step_norm <= opts.tol_step * scale) {
      out.report.residual_history.push_back(residual(out.psi, control_load).norm());
      out.report.converged = true;
      break;
    }
  }
  if (out.report.converged) {
    if (!out.tangent) {
      out.tangent = std::make_shared<Factorization>(Factorization::factorize(tangent(out.psi)));
      ++out.report.factorizations;
    }
    return out;
  }
  std::ostringstream msg;
  msg << "solve_state: Newton did not converge in " << out.report.iterations << " iterations; residuals:";
  for (double v : out.report.residual_history) msg << ' ' << v;
  msg << "; steps:";
  for (double v : out.report.step_history) msg << ' ' << v;
  throw NewtonFailure(msg.str(), out.report);
}

PairField VonKarmanSystem::solve_adjoint(const PairField& psi, const Vector& rhs,
                                         const Factorization* near_tangent) const {
  if (rhs.size() != 2 * n_free()) throw std::invalid_argument("solve_adjoint: rhs size mismatch");
  if (adjoint_fault_) {
    SparseMatrix t = assemble_b_adjoint(disc_, psi);
    t *= -1.0;
    add_to_diagonal_blocks(t, a_);
    return PairField::from_stacked(Factorization::factorize(t).solve(rhs));
  }
  const SparseMatrix j = tangent(psi);
  if (near_tangent) {
    KrylovReport k;
    const Vector x = preconditioned_gmres(j, *near_tangent, rhs, true, kKrylovTol, kKrylovMaxIter, k);
    if (k.converged) return PairField::from_stacked(x);
  }
  try {
    return PairField::from_stacked(Factorization::factorize(j).solve_transposed(rhs));
  } catch (const FactorizationError& e) {
    throw FactorizationError(std::string("solve_adjoint: linearized operator is singular: ") + e.what());
  }
}

}  // namespace vkctrl
