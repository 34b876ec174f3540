#include "vkctrl/control.hpp"
#include "vkctrl/convergence.hpp"
#include "vkctrl/verify.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vkctrl;

namespace {

ProblemSamples zero_samples(const Discretization& disc) {
  const std::size_t n = static_cast<std::size_t>(disc.mesh().num_cells()) * disc.error_table().size();
  return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
          std::vector<double>(n, 0.0)};
}

Discretization square(int level) { return Discretization(RectMesh::build(DomainKind::UnitSquare, level)); }

/// Analytic integral of x^2 (1-x)^2 over [a, b].
double bubble_1d(double a, double b) {
  const auto F = [](double x) { return x * x * x / 3 - x * x * x * x / 2 + x * x * x * x * x / 5; };
  return F(b) - F(a);
}

/// Integral over [a, b] of the cubic Hermite interpolant of x^2 (1-x)^2.
double hermite_bubble_1d(double a, double b) {
  const auto g = [](double x) { return x * x * (1 - x) * (1 - x); };
  const auto dg = [](double x) { return 2 * x * (1 - x) * (1 - 2 * x); };
  const double h = b - a;
  return h / 2 * (g(a) + g(b)) + h * h / 12 * (dg(a) - dg(b));
}

}  // namespace

TEST(ControlField, ClampsOnConstructionAndUpdate) {
  const Bounds b{-1.0, 2.0, 1.0};
  ControlField u({0, 1, 2}, {-5.0, 0.5, 9.0}, b);
  EXPECT_EQ(u[0], -1.0);
  EXPECT_EQ(u[1], 0.5);
  EXPECT_EQ(u[2], 2.0);
  EXPECT_TRUE(u.at_lower(0));
  EXPECT_TRUE(u.at_upper(2));
  u.set(1, 100.0);
  EXPECT_EQ(u[1], 2.0);
  EXPECT_THROW(ControlField({0}, {std::nan("")}, b), std::invalid_argument);
  EXPECT_THROW(ControlField({0, 1}, {0.0}, b), std::invalid_argument);
  const ActiveSetCounts c = count_active(u);
  EXPECT_EQ(c.lower, 1);
  EXPECT_EQ(c.upper, 2);
  EXPECT_EQ(c.inactive, 0);
}

TEST(Bounds, Validation) {
  EXPECT_THROW((Bounds{1.0, 0.0, 1.0}.validate()), std::invalid_argument);
  EXPECT_THROW((Bounds{0.0, 1.0, 0.0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((Bounds{-750.0, -50.0, 1e-5}.validate()));
  EXPECT_EQ((Bounds{-750.0, -50.0, 1.0}.project_adjoint(0.0)), -50.0);
}

TEST(Cost, ZeroMismatchAndConstantControl) {
  const Discretization disc = square(1);
  const Bounds b{-10.0, 10.0, 0.5};
  const ControlProblem problem(disc, zero_samples(disc), b, OmegaSpec::whole_domain());
  const PairField zero = PairField::zero(disc.n_free());
  EXPECT_EQ(problem.cost(zero, problem.constant_control(0.0)), 0.0);
  EXPECT_NEAR(problem.cost(zero, problem.constant_control(3.0)), 0.5 * 0.5 * 9.0, 1e-14);
}

TEST(CellMean, ZeroAndAnalyticBubble) {
  const Discretization disc = square(3);
  const Bounds b{-1.0, 1.0, 1.0};
  const ControlProblem problem(disc, zero_samples(disc), b, OmegaSpec::whole_domain());
  EXPECT_EQ(problem.cell_mean_adjoint(PairField::zero(disc.n_free()), 0), 0.0);
  const Vector theta1 = disc.interpolate([](Point p) {
    const Jet4 x = Jet4::x(p.x), y = Jet4::y(p.y);
    const Jet4 b = x * (1.0 - x) * y * (1.0 - y);
    return nodal_data(b * b);
  });
  const PairField theta{theta1, Vector::Zero(disc.n_free())};
  const int cell = *disc.mesh().locate({0.5 - 1e-9, 0.5 - 1e-9});
  const Point o = disc.mesh().cell_origin(cell);
  const double h = disc.mesh().hx();
  const double interpolated = hermite_bubble_1d(o.x, o.x + h) * hermite_bubble_1d(o.y, o.y + h) / (h * h);
  EXPECT_NEAR(problem.cell_mean_adjoint(theta, cell), interpolated, 1e-13);
  const double exact = bubble_1d(o.x, o.x + h) * bubble_1d(o.y, o.y + h) / (h * h);
  EXPECT_NEAR(problem.cell_mean_adjoint(theta, cell), exact, 1e-7);
  const PairField twice{2.0 * theta1, Vector::Zero(disc.n_free())};
  EXPECT_NEAR(problem.cell_mean_adjoint(twice, cell), 2.0 * problem.cell_mean_adjoint(theta, cell), 1e-18);
}

TEST(ReducedGradient, ZeroAdjointZeroControl) {
  const Discretization disc = square(1);
  const ControlProblem problem(disc, zero_samples(disc), Bounds{-1.0, 1.0, 1.0}, OmegaSpec::whole_domain());
  for (double g : problem.reduced_gradient(problem.constant_control(0.0), PairField::zero(disc.n_free())))
    EXPECT_EQ(g, 0.0);
}

TEST(ReducedGradient, MatchesNonlinearFiniteDifferences) {
  const Discretization disc = square(2);
  const CaseSpec spec = make_case(CaseId::Ex1);
  const auto cells = cells_in_omega(disc.mesh(), OmegaSpec::whole_domain());
  const ControlProblem problem(disc, sample_case(disc, spec, cells), Bounds{-1e9, 1e9, spec.bounds.alpha},
                               OmegaSpec::whole_domain());
  const ControlField u = problem.constant_control(-150.0);
  const StateSolution s = problem.solve_state(u, NewtonOptions{});
  const auto g = problem.reduced_gradient(u, problem.solve_adjoint(s.psi, s.tangent.get()));
  for (int k : {0, 27, 63}) {
    const double fd = vkctrl::testing::fd_reduced_gradient(problem, u, k, 5.0, vkctrl::testing::tight_newton());
    EXPECT_NEAR(fd, g[k], 1e-8 * std::abs(g[k])) << "cell " << k;
  }
}

TEST(ReducedGradient, VerifyOrderCheck) {
  const verify::Result r = verify::run("reduced_gradient_fd");
  EXPECT_TRUE(r.passed) << r.detail;
  verify::Options fault;
  fault.adjoint_sign_fault = true;
  const verify::Result bad = verify::run("reduced_gradient_fd", fault);
  EXPECT_FALSE(bad.passed) << bad.detail;
}

TEST(ReducedGradient, StationaryAtUnconstrainedOptimum) {
  const Discretization disc = square(2);
  const CaseSpec spec = make_case(CaseId::Ex1);
  const auto cells = cells_in_omega(disc.mesh(), OmegaSpec::whole_domain());
  const Bounds wide{-1e9, 1e9, spec.bounds.alpha};
  const ControlProblem problem(disc, sample_case(disc, spec, cells), wide, OmegaSpec::whole_domain());
  PdasOptions o;
  o.tol_u = 1e-10;
  const OcpSolution sol = problem.pdas_solve(o);
  double umax = 0.0;
  for (double v : sol.control.values()) umax = std::max(umax, std::abs(v));
  const auto g = problem.reduced_gradient(sol.control, sol.adjoint);
  for (double gk : g) EXPECT_LE(std::abs(gk) / disc.mesh().cell_area(), 1e-6 * wide.alpha * umax);
}

TEST(Pdas, DegenerateBoxReturnsConstant) {
  const Discretization disc = square(1);
  CaseSpec spec = make_case(CaseId::Ex1);
  spec.bounds = {-100.0, -100.0, spec.bounds.alpha};
  const ControlProblem problem(disc, spec, OmegaSpec::whole_domain());
  const OcpSolution sol = problem.pdas_solve(PdasOptions{});
  for (double v : sol.control.values()) EXPECT_EQ(v, -100.0);
  EXPECT_EQ(sol.outer_iterations, 1);
}

TEST(Pdas, TerminationConditions) {
  const Discretization disc = square(3);
  const CaseSpec spec = make_case(CaseId::Ex1);
  const ControlProblem problem(disc, spec, OmegaSpec::whole_domain());
  const PdasOptions o;
  const OcpSolution sol = problem.pdas_solve(o);
  EXPECT_LE(projection_defect(problem, sol.control, sol.adjoint), o.tol_u);
  EXPECT_LE(sign_condition_defect(sol.control, problem.reduced_gradient(sol.control, sol.adjoint),
                                  disc.mesh().cell_area()),
            o.tol_u);
  for (std::size_t k = 1; k < sol.cost_history.size(); ++k)
    EXPECT_LE(sol.cost_history[k], sol.cost_history[k - 1] + 1e-12);
  EXPECT_EQ(sol.active_set_history.size(), static_cast<std::size_t>(sol.outer_iterations));
  EXPECT_EQ(count_active(sol.control).lower, 0);
  EXPECT_GT(count_active(sol.control).upper, 0);
  EXPECT_NEAR(sol.cost, problem.cost(sol.state, sol.control), 1e-14 * std::abs(sol.cost));
}

TEST(Pdas, RoundoffExitOnlyAtTheFloor) {
  const Discretization disc = square(3);
  const ControlProblem problem(disc, make_case(CaseId::Ex1), OmegaSpec::whole_domain());
  const OcpSolution plain = problem.pdas_solve(PdasOptions{});
  EXPECT_FALSE(plain.stagnated);
  PdasOptions o;
  o.tol_u = 1e-300;
  const OcpSolution floor = problem.pdas_solve(o);
  EXPECT_TRUE(floor.stagnated);
  EXPECT_LE(floor.change_history.back(), o.tol_floor * 750.0);
  for (int k = 0; k < plain.control.size(); ++k) EXPECT_NEAR(floor.control[k], plain.control[k], 1e-9);
  o.tol_floor = 0.0;
  o.max_outer = 20;
  EXPECT_THROW(problem.pdas_solve(o), PdasFailure);
}

TEST(Pdas, RelaxedUpdateReachesSameControl) {
  const Discretization disc = square(2);
  const CaseSpec spec = make_case(CaseId::Ex1);
  const ControlProblem problem(disc, spec, OmegaSpec::whole_domain());
  const OcpSolution full = problem.pdas_solve(PdasOptions{});
  PdasOptions o;
  o.relaxation = 0.7;
  const OcpSolution relaxed = problem.pdas_solve(o);
  for (int k = 0; k < full.control.size(); ++k) EXPECT_NEAR(relaxed.control[k], full.control[k], 1e-7);
  EXPECT_GT(relaxed.outer_iterations, full.outer_iterations);
}

TEST(Pdas, OuterLimitReportsOscillation) {
  const Discretization disc = square(2);
  const ControlProblem problem(disc, make_case(CaseId::Ex1), OmegaSpec::whole_domain());
  PdasOptions o;
  o.max_outer = 2;
  try {
    problem.pdas_solve(o);
    FAIL() << "expected PdasFailure";
  } catch (const PdasFailure& e) {
    EXPECT_NE(std::string(e.what()).find("active"), std::string::npos) << e.what();
  }
}

TEST(Pdas, SubdomainControl) {
  const Discretization disc = square(2);
  const OmegaSpec omega = OmegaSpec::rectangle({0.25, 0.25}, {0.75, 0.75});
  const ControlProblem problem(disc, make_case(CaseId::Ex1), omega);
  EXPECT_EQ(problem.omega_cells().size(), 16u);
  const OcpSolution sol = problem.pdas_solve(PdasOptions{});
  EXPECT_EQ(sol.control.size(), 16);
  EXPECT_LE(projection_defect(problem, sol.control, sol.adjoint), 1e-9);
}

TEST(Pdas, AgreesWithProjectedGradientOracle) {
  const Discretization disc = square(1);
  const ControlProblem problem(disc, make_case(CaseId::Ex1), OmegaSpec::whole_domain());
  PdasOptions o;
  o.newton = vkctrl::testing::tight_newton();
  const OcpSolution sol = problem.pdas_solve(o);
  const auto oracle = vkctrl::testing::projected_gradient_oracle(problem, problem.constant_control(-400.0), 1e-7, 200);
  for (int k = 0; k < sol.control.size(); ++k) EXPECT_NEAR(oracle.control[k], sol.control[k], 1e-5) << "cell " << k;
}

TEST(PostProcessed, ZeroAdjointClampsToUpperBound) {
  const Discretization disc = square(1);
  const PostProcessedControl pp(disc, Vector::Zero(disc.n_free()), Bounds{-750.0, -50.0, 1e-5},
                                OmegaSpec::whole_domain());
  EXPECT_EQ(pp({0.3, 0.7}), -50.0);
  EXPECT_EQ(pp({0.0, 1.0}), -50.0);
}

TEST(PostProcessed, WideBoundsGivePointwiseFormula) {
  const Discretization disc = square(2);
  const Vector theta1 = verify::random_field(disc.n_free(), 4);
  const double alpha = 0.25;
  const PostProcessedControl pp(disc, theta1, Bounds{-1e9, 1e9, alpha}, OmegaSpec::whole_domain());
  for (Point p : {Point{0.1, 0.2}, Point{0.55, 0.9}, Point{0.7, 0.33}})
    EXPECT_NEAR(pp(p), -disc.evaluate(theta1, p).v / alpha, 1e-14);
}

TEST(PostProcessed, RejectsPointsOutsideOmega) {
  const Discretization disc = square(2);
  const PostProcessedControl pp(disc, Vector::Zero(disc.n_free()), Bounds{-1.0, 1.0, 1.0},
                                OmegaSpec::rectangle({0.0, 0.0}, {0.5, 0.5}));
  EXPECT_NO_THROW(pp({0.25, 0.25}));
  EXPECT_THROW(pp({0.75, 0.25}), std::out_of_range);
}

TEST(CentroidProject, ConstantsAndLinears) {
  const RectMesh m = RectMesh::build(DomainKind::UnitSquare, 1);
  const auto cells = cells_in_omega(m, OmegaSpec::whole_domain());
  for (double v : centroid_project([](Point) { return 4.5; }, m, cells)) EXPECT_EQ(v, 4.5);
  const auto lin = centroid_project([](Point p) { return 2 * p.x - p.y; }, m, cells);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const Point o = m.cell_origin(cells[k]);
    const double mean = 2 * (o.x + 0.5 * m.hx()) - (o.y + 0.5 * m.hy());
    EXPECT_NEAR(lin[k], mean, 1e-15);
  }
}
