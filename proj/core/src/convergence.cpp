#include "vkctrl/convergence.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>

namespace vkctrl {

namespace {

Point quad_point(const RectMesh& mesh, int cell, const ShapeTable& table, int q) {
  const Point o = mesh.cell_origin(cell);
  return {o.x + table.rule.points[q][0] * mesh.hx(), o.y + table.rule.points[q][1] * mesh.hy()};
}

struct SquaredErrors {
  double h2 = 0.0;
  double h1 = 0.0;
  double l2 = 0.0;

  void add(double w, const FieldValues& fh, const Jet4& e) {
    const double v = fh.v - e.value();
    const double gx = fh.dx - e.dx();
    const double gy = fh.dy - e.dy();
    const double xx = fh.dxx - e.dxx();
    const double xy = fh.dxy - e.dxy();
    const double yy = fh.dyy - e.dyy();
    l2 += w * v * v;
    h1 += w * (v * v + gx * gx + gy * gy);
    h2 += w * (xx * xx + 2.0 * xy * xy + yy * yy);
  }
};

std::vector<char> cell_flags(const RectMesh& mesh, std::span<const int> cells) {
  std::vector<char> flags(mesh.num_cells(), 0);
  for (int c : cells) flags.at(c) = 1;
  return flags;
}

}  // namespace

double error_norm(const Discretization& disc, const PairField& field, const PairExact& exact, Norm norm) {
  return error_norm(disc, field, exact, norm, disc.error_table());
}

double error_norm(const Discretization& disc, const PairField& field, const PairExact& exact, Norm norm,
                  const ShapeTable& table) {
  const RectMesh& mesh = disc.mesh();
  SquaredErrors acc;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto c1 = disc.local_coefficients(field.first, c);
    const auto c2 = disc.local_coefficients(field.second, c);
    for (int q = 0; q < table.size(); ++q) {
      const auto e = exact(quad_point(mesh, c, table, q));
      acc.add(table.weight(q), combine(table.at[q], c1), e[0]);
      acc.add(table.weight(q), combine(table.at[q], c2), e[1]);
    }
  }
  switch (norm) {
    case Norm::H2Semi:
      return std::sqrt(acc.h2);
    case Norm::H1:
      return std::sqrt(acc.h1);
    case Norm::L2:
      return std::sqrt(acc.l2);
  }
  return 0.0;
}

double control_error(const Discretization& disc, const ControlField& u, const std::function<double(Point)>& u_bar) {
  std::vector<double> by_cell(disc.mesh().num_cells(), 0.0);
  for (int k = 0; k < u.size(); ++k) by_cell[u.cells()[k]] = u[k];
  return control_error(
      disc, u.cells(), [&](int cell, Point) { return by_cell[cell]; }, u_bar);
}

double control_error(const Discretization& disc, std::span<const int> cells,
                     const std::function<double(int, Point)>& u_h, const std::function<double(Point)>& u_bar) {
  const RectMesh& mesh = disc.mesh();
  const ShapeTable& table = disc.error_table();
  double sum = 0.0;
  for (int c : cells) {
    for (int q = 0; q < table.size(); ++q) {
      const Point x = quad_point(mesh, c, table, q);
      const double d = u_bar(x) - u_h(c, x);
      sum += table.weight(q) * d * d;
    }
  }
  return std::sqrt(sum);
}

std::vector<std::optional<double>> eoc(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size()) throw std::invalid_argument("eoc: errors and mesh sizes differ in length");
  std::vector<std::optional<double>> out(errors.size());
  for (std::size_t l = 1; l < errors.size(); ++l) {
    if (!(hs[l] > 0.0) || !(hs[l] < hs[l - 1])) throw std::invalid_argument("eoc: mesh sizes must decrease strictly");
    const double e0 = errors[l - 1];
    const double e1 = errors[l];
    if (e0 > 0.0 && e1 > 0.0 && std::isfinite(e0) && std::isfinite(e1))
      out[l] = std::log(e1 / e0) / std::log(hs[l] / hs[l - 1]);
  }
  return out;
}

std::string column_name(ErrorColumn c) {
  switch (c) {
    case ErrorColumn::StateEnergy:
      return "state_energy";
    case ErrorColumn::AdjointEnergy:
      return "adjoint_energy";
    case ErrorColumn::Control:
      return "control_l2";
    case ErrorColumn::PostProcessedControl:
      return "postprocessed_control_l2";
    case ErrorColumn::CentroidControl:
      return "centroid_control_l2";
    case ErrorColumn::StateH1:
      return "state_h1";
    case ErrorColumn::StateL2:
      return "state_l2";
    case ErrorColumn::AdjointH1:
      return "adjoint_h1";
    case ErrorColumn::AdjointL2:
      return "adjoint_l2";
  }
  return "unknown";
}

void EocTable::add(ErrorRecord r) {
  if (!records_.empty() && !(r.h < records_.back().h))
    throw std::invalid_argument("EocTable: records must be added from coarse to fine");
  records_.push_back(std::move(r));
}

std::vector<double> EocTable::errors(ErrorColumn c) const {
  std::vector<double> e;
  for (const auto& r : records_) e.push_back(r[c]);
  return e;
}

std::vector<std::optional<double>> EocTable::rates(ErrorColumn c) const {
  std::vector<double> hs;
  for (const auto& r : records_) hs.push_back(r.h);
  return eoc(errors(c), hs);
}

ErrorRecord compute_errors(const ControlProblem& problem, const OcpSolution& sol, const CaseSpec& spec) {
  const Discretization& disc = problem.discretization();
  const RectMesh& mesh = disc.mesh();
  const ShapeTable& table = disc.error_table();
  const Bounds& bounds = problem.bounds();
  const std::vector<char> in_omega = cell_flags(mesh, problem.omega_cells());
  std::vector<double> u_by_cell(mesh.num_cells(), 0.0);
  for (int k = 0; k < sol.control.size(); ++k) u_by_cell[sol.control.cells()[k]] = sol.control[k];

  SquaredErrors state;
  SquaredErrors adjoint;
  double control = 0.0;
  double postprocessed = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto s1 = disc.local_coefficients(sol.state.first, c);
    const auto s2 = disc.local_coefficients(sol.state.second, c);
    const auto t1 = disc.local_coefficients(sol.adjoint.first, c);
    const auto t2 = disc.local_coefficients(sol.adjoint.second, c);
    for (int q = 0; q < table.size(); ++q) {
      const double w = table.weight(q);
      const FieldJets e = spec.fields(quad_point(mesh, c, table, q));
      const FieldValues theta1h = combine(table.at[q], t1);
      state.add(w, combine(table.at[q], s1), e[0]);
      state.add(w, combine(table.at[q], s2), e[1]);
      adjoint.add(w, theta1h, e[2]);
      adjoint.add(w, combine(table.at[q], t2), e[3]);
      if (in_omega[c]) {
        const double u_bar = bounds.project_adjoint(e[2].value());
        const double du = u_bar - u_by_cell[c];
        const double dp = u_bar - bounds.project_adjoint(theta1h.v);
        control += w * du * du;
        postprocessed += w * dp * dp;
      }
    }
  }

  double centroid = 0.0;
  for (int k = 0; k < sol.control.size(); ++k) {
    const int c = sol.control.cells()[k];
    const double u_bar = bounds.project_adjoint(spec.fields(mesh.cell_centroid(c))[2].value());
    centroid += mesh.cell_area() * (sol.control[k] - u_bar) * (sol.control[k] - u_bar);
  }

  ErrorRecord r;
  r.level = mesh.level();
  r.n_free = disc.n_free();
  r.h = mesh.h();
  r.h_over_h0 = mesh.h_over_h0();
  r[ErrorColumn::StateEnergy] = std::sqrt(state.h2);
  r[ErrorColumn::AdjointEnergy] = std::sqrt(adjoint.h2);
  r[ErrorColumn::Control] = std::sqrt(control);
  r[ErrorColumn::PostProcessedControl] = std::sqrt(postprocessed);
  r[ErrorColumn::CentroidControl] = std::sqrt(centroid);
  r[ErrorColumn::StateH1] = std::sqrt(state.h1);
  r[ErrorColumn::StateL2] = std::sqrt(state.l2);
  r[ErrorColumn::AdjointH1] = std::sqrt(adjoint.h1);
  r[ErrorColumn::AdjointL2] = std::sqrt(adjoint.l2);
  r.outer_iterations = sol.outer_iterations;
  r.cost = sol.cost;
  for (double e : r.errors)
    if (!std::isfinite(e) || e < 0.0) throw std::runtime_error("compute_errors: non-finite error norm");
  return r;
}

void StudyOptions::validate() const {
  if (level_min < 1 || level_max > kMaxLevel)
    throw std::invalid_argument("levels must lie in 1.." + std::to_string(kMaxLevel));
  if (level_min > level_max) throw std::invalid_argument("levels must be ascending");
  if (quad_assembly < 4 || quad_assembly > 12) throw std::invalid_argument("quad_assembly must lie in 4..12");
  if (quad_error < 1 || quad_error > 12) throw std::invalid_argument("quad_error must lie in 1..12");
  if (bounds) bounds->validate();
  pdas.validate();
}

PairField prolongate(const Discretization& coarse, const PairField& field, const Discretization& fine) {
  const auto nodal = [&coarse](const Vector& f) {
    return [&coarse, &f](Point p) -> NodalData {
      const FieldValues v = coarse.evaluate(f, p);
      return {v.v, v.dx, v.dy, v.dxy};
    };
  };
  return {fine.interpolate(nodal(field.first)), fine.interpolate(nodal(field.second))};
}

ControlField prolongate(const RectMesh& coarse, const ControlField& u, const RectMesh& fine,
                        std::vector<int> fine_cells) {
  std::vector<int> slot(coarse.num_cells(), -1);
  for (int k = 0; k < u.size(); ++k) slot[u.cells()[k]] = k;
  std::vector<double> values;
  values.reserve(fine_cells.size());
  for (int c : fine_cells) {
    const auto parent = coarse.locate(fine.cell_centroid(c));
    const int k = parent ? slot[*parent] : -1;
    if (k < 0) throw std::invalid_argument("prolongate: fine control cell has no coarse parent in omega");
    values.push_back(u[k]);
  }
  return ControlField(std::move(fine_cells), std::move(values), u.bounds());
}

EocTable run_study(const CaseSpec& spec_in, const StudyOptions& opts) {
  opts.validate();
  CaseSpec spec = spec_in;
  if (opts.bounds) spec.bounds = *opts.bounds;

  EocTable table;
  std::unique_ptr<Discretization> prev_disc;
  std::optional<OcpSolution> prev;
  for (int level = opts.level_min; level <= opts.level_max; ++level) {
    try {
      auto disc = std::make_unique<Discretization>(RectMesh::build(spec.domain, level), opts.quad_assembly,
                                                   opts.quad_error);
      const ControlProblem problem(*disc, spec, opts.omega);
      OcpSolution sol = [&] {
        if (!prev) return problem.pdas_solve(opts.pdas);
        const PairField psi0 = prolongate(*prev_disc, prev->state, *disc);
        const ControlField u0 = prolongate(prev_disc->mesh(), prev->control, disc->mesh(), problem.omega_cells());
        return problem.pdas_solve(opts.pdas, &u0, &psi0);
      }();
      ErrorRecord record = compute_errors(problem, sol, spec);
      if (opts.progress) opts.progress(record);
      table.add(std::move(record));
      sol.tangent.reset();
      prev = std::move(sol);
      prev_disc = std::move(disc);
    } catch (const StudyFailure&) {
      throw;
    } catch (const std::exception& e) {
      throw StudyFailure(level, e.what());
    }
  }
  return table;
}

std::vector<ErrorColumn> control_table_columns() {
  return {ErrorColumn::StateEnergy, ErrorColumn::AdjointEnergy, ErrorColumn::Control,
          ErrorColumn::PostProcessedControl, ErrorColumn::CentroidControl};
}

std::vector<ErrorColumn> state_table_columns() {
  return {ErrorColumn::StateH1, ErrorColumn::StateL2, ErrorColumn::AdjointH1, ErrorColumn::AdjointL2};
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8g", v);
  return buf;
}

namespace {

std::string format_rate(const std::optional<double>& r, std::size_t row) {
  if (row == 0) return "-";
  return r ? format_number(*r) : "undefined";
}

}  // namespace

void write_csv(std::ostream& out, const EocTable& table, const std::vector<ErrorColumn>& columns) {
  out << "N,h_over_h0";
  for (ErrorColumn c : columns) out << ',' << column_name(c) << "_err," << column_name(c) << "_eoc";
  out << '\n';
  std::vector<std::vector<std::optional<double>>> rates;
  for (ErrorColumn c : columns) rates.push_back(table.rates(c));
  const auto& recs = table.records();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    out << recs[i].n_free << ',' << format_number(recs[i].h_over_h0);
    for (std::size_t k = 0; k < columns.size(); ++k)
      out << ',' << format_number(recs[i][columns[k]]) << ',' << format_rate(rates[k][i], i);
    out << '\n';
  }
}

void write_markdown(std::ostream& out, const EocTable& table, const std::vector<ErrorColumn>& columns) {
  out << "| N | h/h0 |";
  for (ErrorColumn c : columns) out << ' ' << column_name(c) << " | eoc |";
  out << "\n|---:|---:|";
  for (std::size_t k = 0; k < columns.size(); ++k) out << "---:|---:|";
  out << '\n';
  std::vector<std::vector<std::optional<double>>> rates;
  for (ErrorColumn c : columns) rates.push_back(table.rates(c));
  const auto& recs = table.records();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    out << "| " << recs[i].n_free << " | " << format_number(recs[i].h_over_h0) << " |";
    for (std::size_t k = 0; k < columns.size(); ++k)
      out << ' ' << format_number(recs[i][columns[k]]) << " | " << format_rate(rates[k][i], i) << " |";
    out << '\n';
  }
}

void write_dat(std::ostream& out, const EocTable& table, ErrorColumn column) {
  out << "# h " << column_name(column) << '\n';
  for (const auto& r : table.records()) out << format_number(r.h) << ' ' << format_number(r[column]) << '\n';
}

}  // namespace vkctrl
