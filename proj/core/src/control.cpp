#include "vkctrl/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vkctrl {

namespace {

enum class CellState : char { Lower, Inactive, Upper };

std::vector<CellState> active_set(const ControlField& u) {
  std::vector<CellState> s(u.size());
  for (int k = 0; k < u.size(); ++k)
    s[k] = u.at_lower(k) ? CellState::Lower : (u.at_upper(k) ? CellState::Upper : CellState::Inactive);
  return s;
}

bool inside_omega(const OmegaSpec& omega, Point p) {
  constexpr double slack = 1e-12;
  return p.x >= omega.lower.x - slack && p.x <= omega.upper.x + slack && p.y >= omega.lower.y - slack &&
         p.y <= omega.upper.y + slack;
}

}  // namespace

ControlField::ControlField(std::vector<int> cells, std::vector<double> values, Bounds bounds)
    : cells_(std::move(cells)), values_(std::move(values)), bounds_(bounds) {
  bounds_.validate();
  if (cells_.size() != values_.size()) throw std::invalid_argument("ControlField: cells and values differ in size");
  for (double& v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("ControlField: non-finite value");
    v = bounds_.clamp(v);
  }
}

ControlField ControlField::constant(std::vector<int> cells, double value, Bounds bounds) {
  std::vector<double> values(cells.size(), value);
  return ControlField(std::move(cells), std::move(values), bounds);
}

void PdasOptions::validate() const {
  if (!(tol_u > 0.0)) throw std::invalid_argument("PdasOptions: tol_u must be positive");
  if (!(tol_floor >= 0.0)) throw std::invalid_argument("PdasOptions: tol_floor must be nonnegative");
  if (max_outer < 1) throw std::invalid_argument("PdasOptions: max_outer must be >= 1");
  if (!(relaxation > 0.0 && relaxation <= 1.0)) throw std::invalid_argument("PdasOptions: relaxation must be in (0, 1]");
  newton.validate();
}

ActiveSetCounts count_active(const ControlField& u) {
  ActiveSetCounts c;
  for (int k = 0; k < u.size(); ++k) {
    if (u.at_lower(k))
      ++c.lower;
    else if (u.at_upper(k))
      ++c.upper;
    else
      ++c.inactive;
  }
  return c;
}

ProblemSamples sample_case(const Discretization& disc, const CaseSpec& spec, std::span<const int> omega_cells) {
  const RectMesh& mesh = disc.mesh();
  const ShapeTable& table = disc.error_table();
  const int nq = table.size();
  std::vector<char> in_omega(mesh.num_cells(), 0);
  for (int c : omega_cells) in_omega.at(c) = 1;

  ProblemSamples s;
  const std::size_t total = static_cast<std::size_t>(mesh.num_cells()) * nq;
  s.f.resize(total);
  s.f_tilde.resize(total);
  s.psi1d.resize(total);
  s.psi2d.resize(total);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Point o = mesh.cell_origin(c);
    for (int q = 0; q < nq; ++q) {
      const Point x{o.x + table.rule.points[q][0] * mesh.hx(), o.y + table.rule.points[q][1] * mesh.hy()};
      const ManufacturedData d = sources_and_observations(spec, x, in_omega[c] != 0);
      const std::size_t i = static_cast<std::size_t>(c) * nq + q;
      s.f[i] = d.f;
      s.f_tilde[i] = d.f_tilde;
      s.psi1d[i] = d.psi1d;
      s.psi2d[i] = d.psi2d;
    }
  }
  return s;
}

ControlProblem::ControlProblem(const Discretization& disc, const ProblemSamples& samples, Bounds bounds,
                               OmegaSpec omega)
    : disc_(disc),
      bounds_(bounds),
      omega_(omega),
      omega_cells_(cells_in_omega(disc.mesh(), omega)),
      psi1d_(samples.psi1d),
      psi2d_(samples.psi2d),
      system_(disc, assemble_load(disc, samples.f, disc.error_table()),
              assemble_load(disc, samples.f_tilde, disc.error_table())),
      mass_(assemble_mass(disc)) {
  bounds_.validate();
  const int n = disc.n_free();
  observation_load_.resize(2 * n);
  observation_load_.head(n) = assemble_load(disc, psi1d_, disc.error_table());
  observation_load_.tail(n) = assemble_load(disc, psi2d_, disc.error_table());
  const ShapeTable& table = disc.assembly_table();
  for (int q = 0; q < table.size(); ++q)
    for (int p = 0; p < kLocalDofs; ++p) cell_integrals_[p] += table.weight(q) * table.at[q].v[p];
}

ControlProblem::ControlProblem(const Discretization& disc, const CaseSpec& spec, OmegaSpec omega)
    : ControlProblem(disc, sample_case(disc, spec, cells_in_omega(disc.mesh(), omega)), spec.bounds, omega) {}

ControlField ControlProblem::constant_control(double value) const {
  return ControlField::constant(omega_cells_, value, bounds_);
}

Vector ControlProblem::control_load(const ControlField& u) const {
  return vkctrl::control_load(disc_, u.cells(), u.values());
}

StateSolution ControlProblem::solve_state(const ControlField& u, const NewtonOptions& opts, const PairField* guess,
                                          std::shared_ptr<const Factorization> tangent_at_guess) const {
  return system_.solve_state(control_load(u), opts, guess, std::move(tangent_at_guess));
}

Vector ControlProblem::adjoint_rhs(const PairField& psi) const {
  const int n = disc_.n_free();
  Vector rhs(2 * n);
  rhs.head(n) = mass_ * psi.first;
  rhs.tail(n) = mass_ * psi.second;
  return rhs - observation_load_;
}

PairField ControlProblem::solve_adjoint(const PairField& psi, const Factorization* tangent_at_psi) const {
  return system_.solve_adjoint(psi, adjoint_rhs(psi), tangent_at_psi);
}

double ControlProblem::cost(const PairField& psi, const ControlField& u) const {
  const RectMesh& mesh = disc_.mesh();
  const ShapeTable& table = disc_.error_table();
  const int nq = table.size();
  double tracking = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto c1 = disc_.local_coefficients(psi.first, c);
    const auto c2 = disc_.local_coefficients(psi.second, c);
    for (int q = 0; q < nq; ++q) {
      double v1 = 0.0;
      double v2 = 0.0;
      for (int p = 0; p < kLocalDofs; ++p) {
        v1 += c1[p] * table.at[q].v[p];
        v2 += c2[p] * table.at[q].v[p];
      }
      const std::size_t i = static_cast<std::size_t>(c) * nq + q;
      const double e1 = v1 - psi1d_[i];
      const double e2 = v2 - psi2d_[i];
      tracking += table.weight(q) * (e1 * e1 + e2 * e2);
    }
  }
  double control = 0.0;
  for (double v : u.values()) control += v * v;
  return 0.5 * tracking + 0.5 * bounds_.alpha * mesh.cell_area() * control;
}

double ControlProblem::reduced_cost(const ControlField& u, const NewtonOptions& opts, const PairField* guess) const {
  return cost(solve_state(u, opts, guess).psi, u);
}

double ControlProblem::cell_mean_adjoint(const PairField& theta, int cell) const {
  const auto cf = disc_.local_coefficients(theta.first, cell);
  double s = 0.0;
  for (int p = 0; p < kLocalDofs; ++p) s += cf[p] * cell_integrals_[p];
  return s / disc_.mesh().cell_area();
}

std::vector<double> ControlProblem::reduced_gradient(const ControlField& u, const PairField& theta) const {
  const double area = disc_.mesh().cell_area();
  std::vector<double> g(u.size());
  for (int k = 0; k < u.size(); ++k)
    g[k] = area * (bounds_.alpha * u[k] + cell_mean_adjoint(theta, u.cells()[k]));
  return g;
}

ControlField ControlProblem::projected_control(const PairField& theta) const {
  std::vector<double> values(omega_cells_.size());
  for (std::size_t k = 0; k < omega_cells_.size(); ++k)
    values[k] = bounds_.project_adjoint(cell_mean_adjoint(theta, omega_cells_[k]));
  return ControlField(omega_cells_, std::move(values), bounds_);
}

OcpSolution ControlProblem::pdas_solve(const PdasOptions& opts, const ControlField* initial,
                                       const PairField* state_guess) const {
  opts.validate();
  ControlField u = initial ? *initial : constant_control(0.0);
  if (u.cells() != omega_cells_) throw std::invalid_argument("pdas_solve: initial control is not defined on omega");

  StateSolution state = solve_state(u, opts.newton, state_guess);
  std::vector<ActiveSetCounts> counts;
  std::vector<double> costs;
  std::vector<double> changes;
  std::vector<int> newton_its;
  int stable_updates = 0;
  for (int k = 1; k <= opts.max_outer; ++k) {
    newton_its.push_back(state.report.iterations);
    PairField theta = solve_adjoint(state.psi, state.tangent.get());
    costs.push_back(cost(state.psi, u));
    counts.push_back(count_active(u));

    const ControlField target = projected_control(theta);
    double change = 0.0;
    std::vector<double> next(u.size());
    for (int i = 0; i < u.size(); ++i) {
      change = std::max(change, std::abs(target[i] - u[i]));
      next[i] = u[i] + opts.relaxation * (target[i] - u[i]);
    }
    changes.push_back(change);
    ControlField u_next(omega_cells_, std::move(next), bounds_);

    const bool same_set = active_set(u_next) == active_set(u);
    stable_updates = same_set ? stable_updates + 1 : 0;
    double u_max = 1.0;
    for (double v : u.values()) u_max = std::max(u_max, std::abs(v));
    const std::size_t n = changes.size();
    const bool stagnated = stable_updates >= 3 && change <= opts.tol_floor * u_max && change > 0.5 * changes[n - 3];
    if ((change <= opts.tol_u && same_set) || stagnated) {
      OcpSolution sol{std::move(u), std::move(state.psi), std::move(theta), costs.back(), k,
                      std::move(counts), std::move(costs), std::move(changes), std::move(newton_its),
                      change > opts.tol_u, std::move(state.tangent)};
      return sol;
    }
    u = std::move(u_next);
    state = solve_state(u, opts.newton, &state.psi, state.tangent);
  }

  std::ostringstream msg;
  msg << "pdas_solve: no convergence in " << opts.max_outer << " outer iterations; last changes:";
  for (std::size_t i = changes.size() > 5 ? changes.size() - 5 : 0; i < changes.size(); ++i) msg << ' ' << changes[i];
  msg << "; active sets (lower/upper/inactive):";
  for (std::size_t i = counts.size() > 5 ? counts.size() - 5 : 0; i < counts.size(); ++i)
    msg << ' ' << counts[i].lower << '/' << counts[i].upper << '/' << counts[i].inactive;
  throw PdasFailure(msg.str());
}

double projection_defect(const ControlProblem& problem, const ControlField& u, const PairField& theta) {
  double d = 0.0;
  for (int k = 0; k < u.size(); ++k) {
    const double target = problem.bounds().project_adjoint(problem.cell_mean_adjoint(theta, u.cells()[k]));
    d = std::max(d, std::abs(u[k] - target));
  }
  return d;
}

double sign_condition_defect(const ControlField& u, std::span<const double> gradient, double cell_area) {
  if (static_cast<int>(gradient.size()) != u.size())
    throw std::invalid_argument("sign_condition_defect: gradient size mismatch");
  const double scale = u.bounds().alpha * cell_area;
  double d = 0.0;
  for (int k = 0; k < u.size(); ++k) {
    const double g = gradient[k] / scale;
    if (!u.at_lower(k)) d = std::max(d, g);
    if (!u.at_upper(k)) d = std::max(d, -g);
  }
  return d;
}

PostProcessedControl::PostProcessedControl(const Discretization& disc, Vector theta1, Bounds bounds, OmegaSpec omega)
    : disc_(disc), theta1_(std::move(theta1)), bounds_(bounds), omega_(omega) {
  bounds_.validate();
  if (theta1_.size() != disc.n_free()) throw std::invalid_argument("PostProcessedControl: adjoint size mismatch");
}

double PostProcessedControl::operator()(Point p) const {
  const auto cell = disc_.mesh().locate(p);
  if (!cell || (!omega_.whole && !inside_omega(omega_, p)))
    throw std::out_of_range("post-processed control: point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                            ") is outside omega");
  return in_cell(*cell, p);
}

double PostProcessedControl::in_cell(int cell, Point p) const {
  return bounds_.project_adjoint(disc_.evaluate(theta1_, cell, p).v);
}

std::vector<double> centroid_project(const std::function<double(Point)>& g, const RectMesh& mesh,
                                     std::span<const int> cells) {
  std::vector<double> out;
  out.reserve(cells.size());
  for (int c : cells) out.push_back(g(mesh.cell_centroid(c)));
  return out;
}

}  // namespace vkctrl
