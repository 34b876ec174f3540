#include "vkctrl/assembly.hpp"
#include "vkctrl/manufactured.hpp"
#include "vkctrl/solvers.hpp"
#include "vkctrl/verify.hpp"

#include <gtest/gtest.h>

#include <Eigen/SparseCholesky>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

using namespace vkctrl;
using verify::random_field;

namespace {

constexpr double kPi = std::numbers::pi;

Discretization square(int level) { return Discretization(RectMesh::build(DomainKind::UnitSquare, level)); }

Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& a) {
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < a.rows(); ++i)
    for (int k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) t.emplace_back(i, a.col_idx()[k], a.values()[k]);
  Eigen::SparseMatrix<double> m(a.rows(), a.cols());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Jet4 bubble(Point p) {
  const Jet4 x = Jet4::x(p.x), y = Jet4::y(p.y);
  const Jet4 b = x * (1.0 - x) * y * (1.0 - y);
  return b * b;
}

Jet4 sin_bump(Point p) {
  const Jet4 s = sin(kPi * Jet4::x(p.x)) * sin(kPi * Jet4::y(p.y));
  return s * s;
}

}  // namespace

TEST(DofMap, FreeCounts) {
  EXPECT_EQ(square(1).n_free(), 36);
  EXPECT_EQ(square(2).n_free(), 196);
  EXPECT_EQ(Discretization(RectMesh::build(DomainKind::LShape, 1)).n_free(), 20);
}

TEST(DofMap, BoundaryNodesAreFullyConstrained) {
  const Discretization disc = square(2);
  const DofMap& dm = disc.dofmap();
  std::set<int> seen;
  for (int n = 0; n < disc.mesh().num_nodes(); ++n)
    for (int k = 0; k < kDofsPerNode; ++k) {
      const int g = dm.global(n, static_cast<DofKind>(k));
      EXPECT_EQ(g < 0, disc.mesh().is_boundary(n));
      if (g >= 0) {
        EXPECT_TRUE(seen.insert(g).second);
        EXPECT_EQ(dm.node_of(g), n);
        EXPECT_EQ(static_cast<int>(dm.kind_of_dof(g)), k);
      }
    }
  EXPECT_EQ(static_cast<int>(seen.size()), dm.n_free());
}

TEST(DofMap, CellMapIsInjective) {
  const Discretization disc = square(2);
  for (int c = 0; c < disc.mesh().num_cells(); ++c) {
    std::set<int> g;
    for (int d : disc.dofmap().cell_dofs(c))
      if (d >= 0) EXPECT_TRUE(g.insert(d).second);
  }
}

TEST(Assembly, StiffnessAndMassAreSymmetricPositiveDefinite) {
  const Discretization disc = square(2);
  for (const SparseMatrix& m : {assemble_a(disc), assemble_mass(disc)}) {
    EXPECT_TRUE(m.structurally_symmetric());
    EXPECT_LE(m.asymmetry(), 1e-12 * m.max_abs());
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(to_eigen(m));
    EXPECT_EQ(llt.info(), Eigen::Success);
  }
}

TEST(Assembly, MassIntegratesInterpolatedBubble) {
  const Discretization disc = square(4);
  const SparseMatrix m = assemble_mass(disc);
  const Vector v = disc.interpolate([](Point p) { return nodal_data(bubble(p)); });
  // int I_h(b) through the load of the constant 1, and int I_h(b)^2 = v^T M v.
  const Vector ones_load = assemble_load(disc, [](Point) { return 1.0; });
  EXPECT_NEAR(ones_load.dot(v), 1.0 / 900.0, 1e-6);
  EXPECT_NEAR(v.dot(m * v), 1.0 / (630.0 * 630.0), 1e-8);
}

TEST(Assembly, BiharmonicSolveConvergesAtRateTwo) {
  // Delta^2 of sin^2(pi x) sin^2(pi y) through jets.
  std::vector<double> errors;
  std::vector<double> hs;
  for (int level = 1; level <= 4; ++level) {
    const Discretization disc = square(level);
    const Vector rhs = assemble_load(disc, [](Point p) { return sin_bump(p).bilaplacian(); });
    const Vector psi = Factorization::factorize(assemble_a(disc)).solve(rhs);
    const Vector ih = disc.interpolate([](Point p) { return nodal_data(sin_bump(p)); });
    // Energy-norm error through the exact-jet integrand.
    const ShapeTable& t = disc.error_table();
    double sum = 0.0;
    for (int c = 0; c < disc.mesh().num_cells(); ++c) {
      const auto coeffs = disc.local_coefficients(psi, c);
      const Point o = disc.mesh().cell_origin(c);
      for (int q = 0; q < t.size(); ++q) {
        const FieldValues fv = combine(t.at[q], coeffs);
        const Jet4 e = sin_bump({o.x + t.rule.points[q][0] * t.hx, o.y + t.rule.points[q][1] * t.hy});
        const double a = fv.dxx - e.dxx(), b = fv.dxy - e.dxy(), d = fv.dyy - e.dyy();
        sum += t.weight(q) * (a * a + 2 * b * b + d * d);
      }
    }
    errors.push_back(std::sqrt(sum));
    hs.push_back(disc.mesh().h());
    EXPECT_GT((ih - psi).norm(), 0.0);
  }
  EXPECT_GE(std::log(errors[2] / errors[3]) / std::log(hs[2] / hs[3]), 1.9);
}

TEST(Assembly, GalerkinOrthogonalityOfBiharmonicSolve) {
  const Discretization disc = square(3);
  const SparseMatrix a = assemble_a(disc);
  const Vector rhs = assemble_load(disc, [](Point p) { return sin_bump(p).bilaplacian(); });
  const Vector psi = Factorization::factorize(a).solve(rhs);
  // a(psi - psi_h, phi) = (Delta^2 psi, phi) - a(psi_h, phi) for phi in V_h.
  for (int trial = 0; trial < 20; ++trial) {
    const Vector phi = random_field(disc.n_free(), 100 + trial);
    EXPECT_LE(std::abs(rhs.dot(phi) - phi.dot(a * psi)), 1e-9 * std::max(1.0, psi.norm()) * phi.norm());
  }
}

TEST(Assembly, JacobianVanishesAtZero) {
  const Discretization disc = square(1);
  EXPECT_EQ(assemble_b_jacobian(disc, PairField::zero(disc.n_free())).max_abs(), 0.0);
}

TEST(Assembly, AdjointBlockIsJacobianTranspose) {
  const Discretization disc = square(2);
  const int n = disc.n_free();
  const PairField psi{random_field(n, 1), random_field(n, 2)};
  const SparseMatrix j = assemble_b_jacobian(disc, psi);
  const SparseMatrix adj = assemble_b_adjoint(disc, psi);
  const SparseMatrix jt = j.transposed();
  double diff = 0.0;
  for (int i = 0; i < adj.rows(); ++i)
    for (int k = adj.row_ptr()[i]; k < adj.row_ptr()[i + 1]; ++k)
      diff = std::max(diff, std::abs(adj.values()[k] - jt.coeff(i, adj.col_idx()[k])));
  EXPECT_LE(diff, 1e-12 * j.max_abs());
}

TEST(Assembly, JacobianMatchesDirectionalDifferences) {
  const Discretization disc = square(2);
  const int n = disc.n_free();
  const VonKarmanSystem sys(disc, Vector::Zero(n), Vector::Zero(n));
  const PairField psi{random_field(n, 3), random_field(n, 4)};
  const PairField xi{random_field(n, 5), random_field(n, 6)};
  const verify::OrderCheck c = verify::jacobian_taylor(sys, psi, xi, {1e-3, 1e-4});
  EXPECT_GE(c.order, 1.9);
  EXPECT_LE(verify::jacobian_central_defect(sys, psi, xi, {1e-3, 1e-4}), 1e-8);
}

TEST(Assembly, ResidualOfBIsHalfJacobianAction) {
  const Discretization disc = square(2);
  const int n = disc.n_free();
  const PairField psi{random_field(n, 7), random_field(n, 8)};
  const Vector r = assemble_b_residual(disc, psi);
  const Vector jpsi = assemble_b_jacobian(disc, psi) * psi.stacked();
  EXPECT_LE((2.0 * r - jpsi).norm(), 1e-12 * jpsi.norm());
}

TEST(TrilinearForm, ZeroArguments) {
  const Discretization disc = square(1);
  const int n = disc.n_free();
  const Vector z = Vector::Zero(n), r = random_field(n, 9);
  EXPECT_EQ(eval_b(disc, z, r, r), 0.0);
  EXPECT_EQ(eval_b(disc, r, z, r), 0.0);
  EXPECT_EQ(eval_b(disc, r, r, z), 0.0);
}

TEST(TrilinearForm, Symmetries) {
  const Discretization disc = square(2);
  const int n = disc.n_free();
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Vector a = random_field(n, 10 * s + 1), b = random_field(n, 10 * s + 2), c = random_field(n, 10 * s + 3);
    const double abc = eval_b(disc, a, b, c);
    const double scale = std::max(1.0, std::abs(abc));
    EXPECT_LE(std::abs(abc - eval_b(disc, a, c, b)), 1e-13 * scale);
    EXPECT_LE(std::abs(abc - eval_b(disc, b, a, c)), 1e-11 * scale);
    EXPECT_LE(std::abs(abc - eval_b(disc, c, b, a)), 1e-11 * scale);
  }
}

TEST(TrilinearForm, BracketIdentity) {
  const Discretization disc = square(2);
  const int n = disc.n_free();
  const Vector z = Vector::Zero(n);
  const BracketIdentity zero = eval_bracket_identity(disc, z, z, z);
  EXPECT_EQ(zero.lhs, 0.0);
  EXPECT_EQ(zero.rhs, 0.0);
  const BracketIdentity r = eval_bracket_identity(disc, random_field(n, 1), random_field(n, 2), random_field(n, 3));
  EXPECT_LE(std::abs(r.lhs - r.rhs), 1e-10 * (1.0 + std::abs(r.lhs)));
  EXPECT_GT(std::abs(r.lhs), 1e-3);
}

TEST(TrilinearForm, PointwiseBracketOfSquares) {
  for (Point p : {Point{0.1, 0.2}, Point{-0.7, 3.0}}) {
    const Jet4 x = Jet4::x(p.x), y = Jet4::y(p.y);
    EXPECT_DOUBLE_EQ(bracket(x * x, y * y), 4.0);
    FieldValues a, b;
    a.dxx = 2.0;
    b.dyy = 2.0;
    EXPECT_DOUBLE_EQ(bracket(a, b), 4.0);
  }
}

TEST(TrilinearForm, BoundedByEnergySeminorms) {
  const Discretization disc = square(2);
  const int n = disc.n_free();
  const SparseMatrix a = assemble_a(disc);
  double cb = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Vector x = random_field(n, s + 40), y = random_field(n, s + 50), z = random_field(n, s + 60);
    const double nx = h2_seminorm(disc, x), ny = h2_seminorm(disc, y), nz = h2_seminorm(disc, z);
    EXPECT_LE(std::abs(x.dot(a * z)), nx * nz * (1 + 1e-12));
    cb = std::max(cb, std::abs(eval_b(disc, x, y, z)) / (nx * ny * nz));
  }
  // Regression bound on the observed constant of |b| <= C |x|_2 |y|_2 |z|_2.
  EXPECT_LE(cb, 0.1);
}

TEST(Load, ZeroLinearityAndScaling) {
  const Discretization disc = square(2);
  EXPECT_EQ(assemble_load(disc, [](Point) { return 0.0; }).norm(), 0.0);
  const auto g1 = [](Point p) { return std::sin(p.x) + p.y; };
  const auto g2 = [](Point p) { return std::exp(p.x * p.y); };
  const Vector l = assemble_load(disc, [&](Point p) { return 2.0 * g1(p) - 3.0 * g2(p); });
  const Vector r = 2.0 * assemble_load(disc, g1) - 3.0 * assemble_load(disc, g2);
  EXPECT_LE((l - r).lpNorm<Eigen::Infinity>(), 1e-13 * l.lpNorm<Eigen::Infinity>());

  const Vector one = assemble_load(disc, [](Point) { return 1.0; });
  double value_max = 0.0, dx_max = 0.0;
  for (int d = 0; d < disc.n_free(); ++d) {
    if (disc.dofmap().kind_of_dof(d) == DofKind::Value) value_max = std::max(value_max, std::abs(one[d]));
    if (disc.dofmap().kind_of_dof(d) == DofKind::Dx) dx_max = std::max(dx_max, std::abs(one[d]));
  }
  EXPECT_LE(dx_max, disc.mesh().hx() * value_max);
}

TEST(Load, NonFiniteSourceNamesCell) {
  const Discretization disc = square(1);
  try {
    assemble_load(disc, [](Point p) { return p.x > 0.5 && p.y > 0.5 ? std::nan("") : 1.0; });
    FAIL() << "expected an exception";
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("cell"), std::string::npos);
  }
}

TEST(Load, SamplesMatchFunctionLoad) {
  const Discretization disc = square(2);
  const ShapeTable& t = disc.error_table();
  const auto g = [](Point p) { return std::cos(3 * p.x) * p.y; };
  std::vector<double> samples;
  for (int c = 0; c < disc.mesh().num_cells(); ++c) {
    const Point o = disc.mesh().cell_origin(c);
    for (int q = 0; q < t.size(); ++q) samples.push_back(g({o.x + t.rule.points[q][0] * t.hx, o.y + t.rule.points[q][1] * t.hy}));
  }
  EXPECT_LE((assemble_load(disc, samples, t) - assemble_load(disc, g)).norm(), 1e-14);
  samples.pop_back();
  EXPECT_THROW(assemble_load(disc, samples, t), std::invalid_argument);
}

TEST(ControlLoad, ZeroConstantAndLocality) {
  const Discretization disc = square(1);
  const auto cells = cells_in_omega(disc.mesh(), OmegaSpec::whole_domain());
  const std::vector<double> zeros(cells.size(), 0.0);
  EXPECT_EQ(control_load(disc, cells, zeros).norm(), 0.0);
  const std::vector<double> c(cells.size(), -3.0);
  const Vector one = assemble_load(disc, [](Point) { return 1.0; });
  EXPECT_LE((control_load(disc, cells, c) + 3.0 * one).norm(), 1e-14);

  const int cell = 5;
  const std::vector<int> single{cell};
  const std::vector<double> value{1.0};
  const Vector l = control_load(disc, single, value);
  std::set<int> support;
  for (int d : disc.dofmap().cell_dofs(cell))
    if (d >= 0) support.insert(d);
  for (int d = 0; d < disc.n_free(); ++d)
    if (!support.count(d)) EXPECT_EQ(l[d], 0.0);
}
