#include "vkctrl/manufactured.hpp"
#include "vkctrl/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace vkctrl;

namespace {

constexpr double kAngle = 1.5 * std::numbers::pi;

double strong_state_defect(const CaseSpec& spec, Point p) {
  const FieldJets j = spec.fields(p);
  const ManufacturedData d = sources_and_observations(spec, j);
  const double r1 = j[0].bilaplacian() - bracket(j[0], j[1]) - d.f - d.u_bar;
  const double r2 = j[1].bilaplacian() + 0.5 * bracket(j[0], j[0]) - d.f_tilde;
  const double s = std::max({1.0, std::abs(j[0].bilaplacian()), std::abs(d.f), std::abs(d.f_tilde)});
  return std::max(std::abs(r1), std::abs(r2)) / s;
}

double strong_adjoint_defect(const CaseSpec& spec, Point p) {
  const FieldJets j = spec.fields(p);
  const ManufacturedData d = sources_and_observations(spec, j);
  const double r1 = j[2].bilaplacian() - bracket(j[1], j[2]) + bracket(j[0], j[3]) - (j[0].value() - d.psi1d);
  const double r2 = j[3].bilaplacian() - bracket(j[0], j[2]) - (j[1].value() - d.psi2d);
  const double s = std::max({1.0, std::abs(j[2].bilaplacian()), std::abs(d.psi1d), std::abs(d.psi2d)});
  return std::max(std::abs(r1), std::abs(r2)) / s;
}

/// Interior points of the L-shape with a margin from the removed quadrant
/// and the corner.
std::vector<Point> l_points(int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-0.85, 0.85);
  std::vector<Point> out;
  while (static_cast<int>(out.size()) < count) {
    const Point p{u(rng), u(rng)};
    if (p.x > -0.15 && p.y < 0.15) continue;
    if (std::hypot(p.x, p.y) < 0.3) continue;
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST(Gamma, RootForReentrantCorner) {
  const double g = gamma_root(kAngle);
  EXPECT_NEAR(g, 0.5444837367, 1e-9);
  EXPECT_LE(std::abs(gamma_residual(g, kAngle)), 1e-11);
  EXPECT_LT(gamma_residual(0.5, kAngle) * gamma_residual(0.6, kAngle), 0.0);
  EXPECT_THROW(gamma_root(kAngle, 0.56, 0.6), std::invalid_argument);
}

TEST(Cases, BoundsAndNames) {
  const CaseSpec e1 = make_case("ex1");
  EXPECT_EQ(e1.domain, DomainKind::UnitSquare);
  EXPECT_EQ(e1.bounds.u_a, -750.0);
  EXPECT_EQ(e1.bounds.u_b, -50.0);
  EXPECT_EQ(e1.bounds.alpha, 1e-5);
  const CaseSpec e2 = make_case("ex2");
  EXPECT_EQ(e2.domain, DomainKind::LShape);
  EXPECT_EQ(e2.bounds.u_a, -600.0);
  EXPECT_EQ(e2.bounds.alpha, 1e-3);
  EXPECT_NEAR(e2.gamma, 0.5444837367, 1e-9);
  EXPECT_THROW(make_case("ex3"), std::invalid_argument);
}

TEST(Ex1, CenterValues) {
  const CaseSpec spec = make_case(CaseId::Ex1);
  const Point c{0.5, 0.5};
  const Jet4 psi = exact_eval(spec, ExactField::Psi1, c);
  EXPECT_NEAR(psi.value(), 1.0, 1e-15);
  EXPECT_NEAR(psi.dx(), 0.0, 1e-15);
  EXPECT_NEAR(psi.dy(), 0.0, 1e-15);
  const Jet4 theta = exact_eval(spec, ExactField::Theta1, c);
  EXPECT_DOUBLE_EQ(theta.value(), 0.00390625);
  const ManufacturedData d = sources_and_observations(spec, c);
  EXPECT_DOUBLE_EQ(d.u_bar, -390.625);
  EXPECT_NEAR(d.psi1d, psi.value() - theta.bilaplacian(), 1e-12);
}

TEST(Ex1, ControlNearBoundaryHitsUpperBound) {
  const CaseSpec spec = make_case(CaseId::Ex1);
  const Point p{0.05, 0.5};
  ASSERT_LT(exact_eval(spec, ExactField::Theta1, p).value(), 5e-4);
  EXPECT_EQ(sources_and_observations(spec, p).u_bar, -50.0);
}

TEST(Ex1, LowerBoundNeverActive) {
  const CaseSpec spec = make_case(CaseId::Ex1);
  for (int i = 0; i <= 40; ++i)
    for (int j = 0; j <= 40; ++j) {
      const Point p{i / 40.0, j / 40.0};
      const double theta = exact_eval(spec, ExactField::Theta1, p).value();
      EXPECT_GE(-theta / spec.bounds.alpha, -390.625 - 1e-9);
      EXPECT_EQ(sources_and_observations(spec, p).u_bar, spec.bounds.project_adjoint(theta));
    }
}

TEST(Ex1, FieldsCoincideAndVanishOnBoundary) {
  const CaseSpec spec = make_case(CaseId::Ex1);
  for (Point p : {Point{0.0, 0.3}, Point{1.0, 0.7}, Point{0.4, 0.0}, Point{0.2, 1.0}}) {
    const FieldJets j = spec.fields(p);
    for (const Jet4& f : j) {
      EXPECT_NEAR(f.value(), 0.0, 1e-15);
      EXPECT_NEAR(f.dx(), 0.0, 1e-14);
      EXPECT_NEAR(f.dy(), 0.0, 1e-14);
    }
  }
  const FieldJets j = spec.fields({0.3, 0.6});
  EXPECT_EQ(j[0].coefficients(), j[1].coefficients());
  EXPECT_EQ(j[2].coefficients(), j[3].coefficients());
}

TEST(Ex1, BracketsCancelInObservationAtCenter) {
  const CaseSpec spec = make_case(CaseId::Ex1);
  const FieldJets j = spec.fields({0.5, 0.5});
  EXPECT_NEAR(bracket(j[1], j[2]) - bracket(j[0], j[3]), 0.0, 1e-15);
}

TEST(Ex2, FieldsVanishOnBoundary) {
  const CaseSpec spec = make_case(CaseId::Ex2);
  for (Point p : {Point{-1.0, 0.5}, Point{0.5, 1.0}, Point{0.5, 0.0}, Point{0.0, -0.5}, Point{-0.5, -1.0}}) {
    const Jet4 f = exact_eval(spec, ExactField::Psi1, p);
    EXPECT_NEAR(f.value(), 0.0, 1e-13) << p.x << ", " << p.y;
    EXPECT_NEAR(f.dx(), 0.0, 1e-12) << p.x << ", " << p.y;
    EXPECT_NEAR(f.dy(), 0.0, 1e-12) << p.x << ", " << p.y;
  }
  const FieldJets j = spec.fields({-0.3, 0.4});
  for (int k = 1; k < 4; ++k) EXPECT_EQ(j[k].coefficients(), j[0].coefficients());
}

TEST(Ex2, SingularAndOutsidePointsAreRejected) {
  const CaseSpec spec = make_case(CaseId::Ex2);
  EXPECT_THROW(exact_eval(spec, ExactField::Psi1, {0.0, 0.0}), std::domain_error);
  EXPECT_THROW(exact_eval(spec, ExactField::Psi1, {0.5, -0.5}), std::domain_error);
}

TEST(Ex2, JetsMatchRichardsonDifferences) {
  const CaseSpec spec = make_case(CaseId::Ex2);
  for (Point p : l_points(20, 11)) {
    const double d = verify::jet_fd_deviation([&](Point q) { return exact_eval(spec, ExactField::Psi1, q); }, p);
    EXPECT_LE(d, 1e-4) << p.x << ", " << p.y;
  }
}

TEST(Ex2, RadialSingularityOrder) {
  // psi ~ r^(1 + gamma) along a ray, so log psi / log r -> 1 + gamma.
  const CaseSpec spec = make_case(CaseId::Ex2);
  const double t = 0.75 * std::numbers::pi;
  const auto at = [&](double r) {
    return std::abs(exact_eval(spec, ExactField::Psi1, {r * std::cos(t), r * std::sin(t)}).value());
  };
  const double slope = std::log(at(1e-4) / at(1e-5)) / std::log(10.0);
  EXPECT_NEAR(slope, 1.0 + spec.gamma, 1e-6);
}

TEST(Manufactured, StrongResidualsVanish) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  const CaseSpec e1 = make_case(CaseId::Ex1);
  for (int k = 0; k < 30; ++k) {
    const Point p{u(rng), u(rng)};
    EXPECT_LE(strong_state_defect(e1, p), 1e-9);
    EXPECT_LE(strong_adjoint_defect(e1, p), 1e-9);
  }
  const CaseSpec e2 = make_case(CaseId::Ex2);
  for (Point p : l_points(30, 6)) {
    EXPECT_LE(strong_state_defect(e2, p), 1e-9);
    EXPECT_LE(strong_adjoint_defect(e2, p), 1e-9);
  }
}

TEST(Manufactured, SourceOutsideOmegaOmitsControl) {
  const CaseSpec spec = make_case(CaseId::Ex1);
  const Point p{0.4, 0.45};
  const ManufacturedData in = sources_and_observations(spec, p, true);
  const ManufacturedData out = sources_and_observations(spec, p, false);
  EXPECT_NEAR(out.f - in.f, in.u_bar, 1e-9);
  EXPECT_EQ(out.f_tilde, in.f_tilde);
}
