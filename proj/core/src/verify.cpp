#include "vkctrl/verify.hpp"

#include "vkctrl/manufactured.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace vkctrl::verify {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

double fitted_order(const std::vector<double>& eps, const std::vector<double>& err) {
  const std::size_t n = err.size();
  if (n < 2 || !(err[n - 1] > 0.0) || !(err[n - 2] > 0.0)) return 0.0;
  return std::log(err[n - 2] / err[n - 1]) / std::log(eps[n - 2] / eps[n - 1]);
}

Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& a) {
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < a.rows(); ++i)
    for (int k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) t.emplace_back(i, a.col_idx()[k], a.values()[k]);
  Eigen::SparseMatrix<double> m(a.rows(), a.cols());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

bool symmetric_positive_definite(const SparseMatrix& a, double& asym) {
  asym = a.asymmetry() / a.max_abs();
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(to_eigen(a));
  return asym <= 1e-12 && llt.info() == Eigen::Success;
}

Discretization square(int level) { return Discretization(RectMesh::build(DomainKind::UnitSquare, level)); }

/// Ex1 control problem with widened bounds so that finite-difference
/// perturbations stay feasible.
ControlField shifted_control(const ControlProblem& problem, const CaseSpec& spec, double shift) {
  const auto& mesh = problem.discretization().mesh();
  auto values = centroid_project([&](Point p) { return spec.bounds.project_adjoint(spec.fields(p)[2].value()) + shift; },
                                 mesh, problem.omega_cells());
  return ControlField(problem.omega_cells(), std::move(values), problem.bounds());
}

int central_cell(const RectMesh& mesh, const std::vector<int>& cells) {
  int best = 0;
  double dist = 1e300;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const Point c = mesh.cell_centroid(cells[k]);
    const double d = std::hypot(c.x - 0.5, c.y - 0.5);
    if (d < dist - 1e-12) {
      dist = d;
      best = static_cast<int>(k);
    }
  }
  return best;
}

Result check_spd(const Options&) {
  const Discretization disc = square(2);
  double asym_a = 0.0;
  double asym_m = 0.0;
  const bool a_ok = symmetric_positive_definite(assemble_a(disc), asym_a);
  const bool m_ok = symmetric_positive_definite(assemble_mass(disc), asym_m);
  return {"a_mass_spd", a_ok && m_ok,
          "relative asymmetry A " + fmt(asym_a) + ", M " + fmt(asym_m) + "; Cholesky " +
              (a_ok && m_ok ? "succeeded" : "failed")};
}

Result check_b_symmetry(const Options& opts) {
  const Discretization disc = square(2);
  const int n = disc.n_free();
  const Vector eta = random_field(n, opts.seed);
  const Vector chi = random_field(n, opts.seed + 1);
  const Vector phi = random_field(n, opts.seed + 2);
  const double b0 = eval_b(disc, eta, chi, phi);
  const double exchange = std::abs(b0 - eval_b(disc, eta, phi, chi));
  double full = 0.0;
  double scale = std::max(1.0, std::abs(b0));
  for (const auto& [x, y, z] : {std::tuple{&chi, &eta, &phi}, std::tuple{&phi, &chi, &eta},
                                std::tuple{&chi, &phi, &eta}, std::tuple{&phi, &eta, &chi}}) {
    const double b = eval_b(disc, *x, *y, *z);
    scale = std::max(scale, std::abs(b));
    full = std::max(full, std::abs(b - b0));
  }
  const double ex_rel = exchange / scale;
  const double full_rel = full / scale;
  return {"b_symmetry", ex_rel <= 1e-13 && full_rel <= 1e-11,
          "exchange " + fmt(ex_rel) + " (tol 1e-13), full " + fmt(full_rel) + " (tol 1e-11), |b| " + fmt(std::abs(b0))};
}

Result check_bracket_identity(const Options& opts) {
  const Discretization disc = square(2);
  const int n = disc.n_free();
  double worst = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const auto s = opts.seed + 10 * trial;
    const BracketIdentity r =
        eval_bracket_identity(disc, random_field(n, s), random_field(n, s + 1), random_field(n, s + 2));
    worst = std::max(worst, std::abs(r.lhs - r.rhs) / (1.0 + std::abs(r.lhs)));
  }
  return {"bracket_identity", worst <= 1e-10, "max |lhs - rhs| / (1 + |lhs|) = " + fmt(worst) + " (tol 1e-10)"};
}

Result check_jacobian(const Options& opts) {
  const Discretization disc = square(2);
  const int n = disc.n_free();
  const CaseSpec spec = make_case(CaseId::Ex1);
  const VonKarmanSystem sys(disc, Vector::Zero(n), Vector::Zero(n));
  const PairField psi{disc.interpolate([&](Point p) { return nodal_data(spec.fields(p)[0]); }),
                      0.5 * random_field(n, opts.seed + 3)};
  const PairField xi{random_field(n, opts.seed + 4), random_field(n, opts.seed + 5)};
  const OrderCheck taylor = jacobian_taylor(sys, psi, xi, {1e-3, 1e-4});
  const double central = jacobian_central_defect(sys, psi, xi, {1e-3, 1e-4});

  const SparseMatrix adj = assemble_b_adjoint(disc, psi);
  const SparseMatrix jt = assemble_b_jacobian(disc, psi).transposed();
  double diff = 0.0;
  for (int i = 0; i < adj.rows(); ++i)
    for (int k = adj.row_ptr()[i]; k < adj.row_ptr()[i + 1]; ++k)
      diff = std::max(diff, std::abs(adj.values()[k] - jt.coeff(i, adj.col_idx()[k])));
  const double adj_rel = diff / jt.max_abs();

  const bool ok = taylor.order >= 1.9 && central <= 1e-8 && adj_rel <= 1e-12;
  return {"jacobian_fd", ok,
          "Taylor remainder order " + fmt(taylor.order) + " (>= 1.9), central-difference defect " + fmt(central) +
              " (<= 1e-8), adjoint block vs transpose " + fmt(adj_rel) + " (<= 1e-12)"};
}

Result check_newton(const Options&) {
  const Discretization disc = square(2);
  const CaseSpec spec = make_case(CaseId::Ex1);
  const ControlProblem problem(disc, spec, OmegaSpec::whole_domain());
  const ControlField u = shifted_control(problem, spec, 0.0);
  const StateSolution s = problem.solve_state(u, NewtonOptions{});
  const NewtonFit fit = fit_newton(s.report.residual_history);
  std::ostringstream detail;
  detail << "residuals";
  for (double r : s.report.residual_history) detail << ' ' << fmt(r);
  detail << "; fitted order " << fmt(fit.order) << " (>= 1.8), C spread " << fmt(fit.constant_spread) << " (<= 10)";
  return {"newton_quadratic", fit.order >= 1.8 && fit.constant_spread <= 10.0, detail.str()};
}

Result check_reduced_gradient(const Options& opts) {
  const Discretization disc = square(2);
  const CaseSpec spec = make_case(CaseId::Ex1);
  const auto cells = cells_in_omega(disc.mesh(), OmegaSpec::whole_domain());
  const Bounds wide{-1e9, 1e9, spec.bounds.alpha};
  ControlProblem problem(disc, sample_case(disc, spec, cells), wide, OmegaSpec::whole_domain());
  problem.system().inject_adjoint_sign_fault(opts.adjoint_sign_fault);
  const ControlField u = shifted_control(problem, spec, 100.0);
  const int k = central_cell(disc.mesh(), cells);
  double umax = 1.0;
  for (double v : u.values()) umax = std::max(umax, std::abs(v));
  const OrderCheck c = reduced_gradient_fd(problem, u, k, {0.05 * umax, 0.0125 * umax}, NewtonOptions{});
  return {"reduced_gradient_fd", c.order >= 1.9,
          "cell " + std::to_string(k) + ", eps " + fmt(c.eps[0]) + ", " + fmt(c.eps[1]) + ": errors " +
              fmt(c.errors[0]) + ", " + fmt(c.errors[1]) + ", order " + fmt(c.order) + " (>= 1.9)"};
}

Result check_pdas(const Options&) {
  const Discretization disc = square(2);
  const CaseSpec spec = make_case(CaseId::Ex1);
  const ControlProblem problem(disc, spec, OmegaSpec::whole_domain());
  const PdasOptions popts;
  const OcpSolution sol = problem.pdas_solve(popts);
  const double proj = projection_defect(problem, sol.control, sol.adjoint);
  const double sign =
      sign_condition_defect(sol.control, problem.reduced_gradient(sol.control, sol.adjoint), disc.mesh().cell_area());
  double rise = 0.0;
  for (std::size_t i = 1; i < sol.cost_history.size(); ++i)
    rise = std::max(rise, sol.cost_history[i] - sol.cost_history[i - 1]);
  const bool ok = proj <= popts.tol_u && sign <= popts.tol_u && rise <= 1e-12;
  return {"pdas_projection", ok,
          std::to_string(sol.outer_iterations) + " outer iterations; projection defect " + fmt(proj) +
              ", sign-condition defect " + fmt(sign) + " (<= 1e-9), max cost increase " + fmt(rise) + " (<= 1e-12)"};
}

std::vector<std::pair<std::string, std::function<Jet4(Point)>>> jet_library() {
  const CaseSpec ex2 = make_case(CaseId::Ex2);
  return {
      {"sin^2 sin^2",
       [](Point p) {
         const Jet4 s = sin(kPi * Jet4::x(p.x)) * sin(kPi * Jet4::y(p.y));
         return s * s;
       }},
      {"bubble",
       [](Point p) {
         const Jet4 x = Jet4::x(p.x);
         const Jet4 y = Jet4::y(p.y);
         const Jet4 b = x * (1.0 - x) * y * (1.0 - y);
         return b * b;
       }},
      {"exp(xy)", [](Point p) { return exp(Jet4::x(p.x) * Jet4::y(p.y)); }},
      {"log(1+r^2)",
       [](Point p) {
         const Jet4 x = Jet4::x(p.x);
         const Jet4 y = Jet4::y(p.y);
         return log(1.0 + x * x + y * y);
       }},
      {"r^1.5",
       [](Point p) {
         const Jet4 x = Jet4::x(p.x);
         const Jet4 y = Jet4::y(p.y);
         return pow(x * x + y * y, 0.75);
       }},
      {"atan2", [](Point p) { return atan2(Jet4::y(p.y), Jet4::x(p.x) + 1.0); }},
      {"sqrt", [](Point p) { return sqrt(1.0 + Jet4::x(p.x) + 2.0 * Jet4::y(p.y)); }},
      {"cos exp", [](Point p) { return cos(Jet4::x(p.x) - 2.0 * Jet4::y(p.y)) * exp(-Jet4::x(p.x)); }},
      {"quotient",
       [](Point p) {
         const Jet4 y = Jet4::y(p.y);
         return Jet4::x(p.x) / (1.0 + y * y);
       }},
      {"corner singular",
       [ex2](Point p) { return ex2.fields(Point{p.x - 1.0, p.y})[0]; }},
  };
}

Result check_jets(const Options& opts) {
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> coord(0.25, 0.75);
  double worst = 0.0;
  std::string worst_name;
  for (const auto& [name, f] : jet_library()) {
    for (int trial = 0; trial < 3; ++trial) {
      const double d = jet_fd_deviation(f, {coord(rng), coord(rng)});
      if (d > worst) {
        worst = d;
        worst_name = name;
      }
    }
  }
  return {"jet_richardson", worst <= 1e-5,
          "max relative deviation " + fmt(worst) + " (" + worst_name + ", tol 1e-5) over 10 functions"};
}

Result check_manufactured(const Options& opts) {
  std::mt19937_64 rng(opts.seed + 7);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  double worst = 0.0;
  for (CaseId id : {CaseId::Ex1, CaseId::Ex2}) {
    const CaseSpec spec = make_case(id);
    for (int trial = 0; trial < 20; ++trial) {
      Point p{unit(rng), unit(rng)};
      if (id == CaseId::Ex2) p = {2.0 * p.x - 1.0, p.y};  // upper half of the L-shape
      const Jet4 psi1 = exact_eval(spec, ExactField::Psi1, p);
      const Jet4 psi2 = exact_eval(spec, ExactField::Psi2, p);
      const Jet4 theta1 = exact_eval(spec, ExactField::Theta1, p);
      const Jet4 theta2 = exact_eval(spec, ExactField::Theta2, p);
      const ManufacturedData d = sources_and_observations(spec, p);
      const double u_bar = spec.bounds.project_adjoint(theta1.value());
      const auto rel = [](double r, std::initializer_list<double> terms) {
        double s = 1e-300;
        for (double t : terms) s = std::max(s, std::abs(t));
        return std::abs(r) / s;
      };
      const double b12 = bracket(psi1, psi2);
      const double b11 = bracket(psi1, psi1);
      const double b21 = bracket(psi2, theta1);
      const double b12t = bracket(psi1, theta2);
      const double b1t = bracket(psi1, theta1);
      worst = std::max(worst, rel(psi1.bilaplacian() - b12 - d.f - u_bar, {psi1.bilaplacian(), b12, d.f, u_bar}));
      worst = std::max(worst, rel(psi2.bilaplacian() + 0.5 * b11 - d.f_tilde, {psi2.bilaplacian(), b11, d.f_tilde}));
      worst = std::max(worst, rel(theta1.bilaplacian() - b21 + b12t - (psi1.value() - d.psi1d),
                                  {theta1.bilaplacian(), b21, b12t, psi1.value(), d.psi1d}));
      worst = std::max(worst, rel(theta2.bilaplacian() - b1t - (psi2.value() - d.psi2d),
                                  {theta2.bilaplacian(), b1t, psi2.value(), d.psi2d}));
    }
  }
  return {"manufactured_residual", worst <= 1e-9,
          "max relative strong residual " + fmt(worst) + " (tol 1e-9) at 40 points"};
}

Result check_gamma(const Options&) {
  const double g = gamma_root(1.5 * kPi);
  const double res = std::abs(gamma_residual(g, 1.5 * kPi));
  const bool ok = std::abs(g - 0.5444837367) <= 1e-9 && res <= 1e-11;
  std::ostringstream s;
  s.precision(12);
  s << "gamma = " << g << ", residual " << fmt(res);
  return {"gamma_root", ok, s.str()};
}

using Check = Result (*)(const Options&);

const std::vector<std::pair<std::string, Check>>& registry() {
  static const std::vector<std::pair<std::string, Check>> checks = {
      {"a_mass_spd", check_spd},
      {"b_symmetry", check_b_symmetry},
      {"bracket_identity", check_bracket_identity},
      {"jacobian_fd", check_jacobian},
      {"newton_quadratic", check_newton},
      {"reduced_gradient_fd", check_reduced_gradient},
      {"pdas_projection", check_pdas},
      {"jet_richardson", check_jets},
      {"manufactured_residual", check_manufactured},
      {"gamma_root", check_gamma},
  };
  return checks;
}

}  // namespace

std::vector<std::string> property_names() {
  std::vector<std::string> names;
  for (const auto& [name, check] : registry()) names.push_back(name);
  return names;
}

Result run(const std::string& name, const Options& opts) {
  for (const auto& [n, check] : registry()) {
    if (n != name) continue;
    try {
      return check(opts);
    } catch (const std::exception& e) {
      return {name, false, std::string("exception: ") + e.what()};
    }
  }
  throw std::invalid_argument("unknown property '" + name + "'");
}

std::vector<Result> run_all(const Options& opts) {
  std::vector<Result> out;
  for (const auto& name : property_names()) out.push_back(run(name, opts));
  return out;
}

OrderCheck jacobian_taylor(const VonKarmanSystem& sys, const PairField& psi, const PairField& xi,
                           const std::vector<double>& eps) {
  const Vector zero = Vector::Zero(sys.n_free());
  const Vector r0 = sys.residual(psi, zero);
  const Vector jxi = sys.tangent(psi) * xi.stacked();
  OrderCheck out;
  for (double e : eps) {
    const PairField p{psi.first + e * xi.first, psi.second + e * xi.second};
    out.eps.push_back(e);
    out.errors.push_back((sys.residual(p, zero) - r0 - e * jxi).norm());
  }
  out.order = fitted_order(out.eps, out.errors);
  return out;
}

double jacobian_central_defect(const VonKarmanSystem& sys, const PairField& psi, const PairField& xi,
                               const std::vector<double>& eps) {
  const Vector zero = Vector::Zero(sys.n_free());
  const Vector jxi = sys.tangent(psi) * xi.stacked();
  double worst = 0.0;
  for (double e : eps) {
    const PairField p{psi.first + e * xi.first, psi.second + e * xi.second};
    const PairField m{psi.first - e * xi.first, psi.second - e * xi.second};
    const Vector fd = (sys.residual(p, zero) - sys.residual(m, zero)) / (2.0 * e);
    worst = std::max(worst, (fd - jxi).norm() / jxi.norm());
  }
  return worst;
}

OrderCheck reduced_gradient_fd(const ControlProblem& problem, const ControlField& u, int k,
                               const std::vector<double>& eps, const NewtonOptions& newton) {
  const StateSolution s = problem.solve_state(u, newton);
  const PairField theta = problem.solve_adjoint(s.psi, s.tangent.get());
  const double g = problem.reduced_gradient(u, theta).at(k);
  OrderCheck out;
  for (double e : eps) {
    ControlField up = u;
    ControlField um = u;
    up.set(k, u[k] + e);
    um.set(k, u[k] - e);
    const double fd = (problem.reduced_cost(up, newton, &s.psi) - problem.reduced_cost(um, newton, &s.psi)) / (2.0 * e);
    out.eps.push_back(e);
    out.errors.push_back(std::abs(fd - g));
  }
  out.order = fitted_order(out.eps, out.errors);
  return out;
}

NewtonFit fit_newton(const std::vector<double>& r) {
  const std::size_t n = r.size();
  if (n < 3) throw std::invalid_argument("fit_newton: need at least three residuals");
  const double a = r[n - 3];
  const double b = r[n - 2];
  const double c = r[n - 1];
  NewtonFit fit;
  fit.order = std::log(c / b) / std::log(b / a);
  const double c1 = b / (a * a);
  const double c2 = c / (b * b);
  fit.constant_spread = std::max(c1, c2) / std::min(c1, c2);
  return fit;
}

double richardson_partial(const std::function<double(double, double)>& f, Point p, int i, int j, double h) {
  const auto binom = [](int n, int k) {
    double r = 1.0;
    for (int m = 1; m <= k; ++m) r = r * (n - k + m) / m;
    return r;
  };
  const auto central = [&](double step) {
    double s = 0.0;
    for (int a = 0; a <= i; ++a) {
      const double ca = ((i - a) % 2 ? -1.0 : 1.0) * binom(i, a);
      for (int b = 0; b <= j; ++b) {
        const double cb = ((j - b) % 2 ? -1.0 : 1.0) * binom(j, b);
        s += ca * cb * f(p.x + (a - 0.5 * i) * step, p.y + (b - 0.5 * j) * step);
      }
    }
    return s / std::pow(step, i + j);
  };
  std::array<double, 4> d{};
  for (int l = 0; l < 4; ++l) d[l] = central(h / (1 << l));
  for (int level = 1; level < 4; ++level) {
    const double factor = std::pow(4.0, level);
    for (int l = 0; l + level < 4; ++l) d[l] = (factor * d[l + 1] - d[l]) / (factor - 1.0);
  }
  return d[0];
}

double jet_fd_deviation(const std::function<Jet4(Point)>& f, Point p) {
  const Jet4 jet = f(p);
  const auto value = [&f](double x, double y) { return f({x, y}).value(); };
  double worst = 0.0;
  for (int order = 1; order <= Jet4::kOrder; ++order) {
    double scale = 0.0;
    std::vector<double> diff;
    for (int i = order; i >= 0; --i) {
      const int j = order - i;
      const double exact = jet.derivative(i, j);
      scale = std::max(scale, std::abs(exact));
      diff.push_back(std::abs(exact - richardson_partial(value, p, i, j, 0.05)));
    }
    if (scale == 0.0) scale = 1.0;
    for (double d : diff) worst = std::max(worst, d / scale);
  }
  return worst;
}

Vector random_field(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

}  // namespace vkctrl::verify
