#include "vkctrl/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vkctrl {

DofMap::DofMap(const RectMesh& mesh) {
  node_dofs_.assign(static_cast<std::size_t>(kDofsPerNode * mesh.num_nodes()), -1);
  for (int v = 0; v < mesh.num_nodes(); ++v) {
    if (mesh.is_boundary(v)) continue;
    for (int k = 0; k < kDofsPerNode; ++k) {
      node_dofs_[kDofsPerNode * v + k] = n_free_++;
      dof_node_.push_back(v);
    }
  }
  cell_dofs_.resize(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    for (int a = 0; a < 4; ++a) {
      const int node = mesh.cells()[c][a];
      for (int k = 0; k < kDofsPerNode; ++k)
        cell_dofs_[c][kDofsPerNode * a + k] = node_dofs_[kDofsPerNode * node + k];
    }
  }
}

Vector PairField::stacked() const {
  Vector v(first.size() + second.size());
  v << first, second;
  return v;
}

PairField PairField::from_stacked(const Vector& v) {
  if (v.size() % 2 != 0) throw std::invalid_argument("PairField::from_stacked: odd length");
  const auto n = v.size() / 2;
  return {v.head(n), v.tail(n)};
}

FieldValues combine(const BasisValues& b, const std::array<double, kLocalDofs>& c) {
  FieldValues f;
  for (int i = 0; i < kLocalDofs; ++i) {
    f.v += c[i] * b.v[i];
    f.dx += c[i] * b.dx[i];
    f.dy += c[i] * b.dy[i];
    f.dxx += c[i] * b.dxx[i];
    f.dxy += c[i] * b.dxy[i];
    f.dyy += c[i] * b.dyy[i];
  }
  return f;
}

Discretization::Discretization(RectMesh mesh, int quad_assembly, int quad_error)
    : mesh_(std::move(mesh)),
      dofmap_(mesh_),
      assembly_table_(tabulate(gauss_rule(quad_assembly), mesh_.hx(), mesh_.hy())),
      error_table_(tabulate(gauss_rule(quad_error), mesh_.hx(), mesh_.hy())) {
  // Node adjacency through shared cells.
  std::vector<std::vector<int>> neighbours(mesh_.num_nodes());
  for (const auto& cell : mesh_.cells())
    for (int a : cell)
      for (int b : cell) neighbours[a].push_back(b);
  for (auto& nb : neighbours) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }

  const int n = dofmap_.n_free();
  row_ptr_.assign(n + 1, 0);
  for (int row = 0; row < n; ++row) {
    const int node = dofmap_.node_of(row);
    for (int nb : neighbours[node]) {
      if (dofmap_.constrained(nb)) continue;
      for (int k = 0; k < kDofsPerNode; ++k) col_idx_.push_back(dofmap_.global(nb, static_cast<DofKind>(k)));
    }
    row_ptr_[row + 1] = static_cast<int>(col_idx_.size());
  }

  cell_positions_.assign(static_cast<std::size_t>(mesh_.num_cells()) * 256, -1);
  for (int c = 0; c < mesh_.num_cells(); ++c) {
    const auto& dofs = dofmap_.cell_dofs(c);
    for (int p = 0; p < kLocalDofs; ++p) {
      if (dofs[p] < 0) continue;
      const auto begin = col_idx_.begin() + row_ptr_[dofs[p]];
      const auto end = col_idx_.begin() + row_ptr_[dofs[p] + 1];
      for (int q = 0; q < kLocalDofs; ++q) {
        if (dofs[q] < 0) continue;
        const auto it = std::lower_bound(begin, end, dofs[q]);
        cell_positions_[c * 256 + p * 16 + q] = static_cast<int>(it - col_idx_.begin());
      }
    }
  }
}

SparseMatrix Discretization::scalar_pattern() const {
  return SparseMatrix(n_free(), n_free(), row_ptr_, col_idx_);
}

SparseMatrix Discretization::block_pattern() const {
  const int n = n_free();
  const int nnz = static_cast<int>(col_idx_.size());
  std::vector<int> row_ptr(2 * n + 1, 0);
  std::vector<int> col_idx;
  col_idx.reserve(4 * static_cast<std::size_t>(nnz));
  for (int r = 0; r < 2; ++r) {
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < 2; ++c)
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) col_idx.push_back(col_idx_[k] + c * n);
      row_ptr[r * n + i + 1] = static_cast<int>(col_idx.size());
    }
  }
  return SparseMatrix(2 * n, 2 * n, std::move(row_ptr), std::move(col_idx));
}

int Discretization::block_position(int cell, int r, int c, int p, int q) const {
  const int k = scalar_position(cell, p, q);
  if (k < 0) return -1;
  const int row = dofmap_.cell_dofs(cell)[p];
  const int len = row_ptr_[row + 1] - row_ptr_[row];
  const int nnz = static_cast<int>(col_idx_.size());
  return r * 2 * nnz + 2 * row_ptr_[row] + c * len + (k - row_ptr_[row]);
}

std::array<double, kLocalDofs> Discretization::local_coefficients(const Vector& field, int cell) const {
  std::array<double, kLocalDofs> out{};
  const auto& dofs = dofmap_.cell_dofs(cell);
  for (int i = 0; i < kLocalDofs; ++i) out[i] = dofs[i] < 0 ? 0.0 : field[dofs[i]];
  return out;
}

Vector Discretization::interpolate(const std::function<NodalData(Point)>& f) const {
  Vector out = Vector::Zero(n_free());
  for (int v = 0; v < mesh_.num_nodes(); ++v) {
    if (dofmap_.constrained(v)) continue;
    const NodalData d = f(mesh_.nodes()[v]);
    for (int k = 0; k < kDofsPerNode; ++k) out[dofmap_.global(v, static_cast<DofKind>(k))] = d[k];
  }
  return out;
}

FieldValues Discretization::evaluate(const Vector& field, int cell, Point p) const {
  const Point o = mesh_.cell_origin(cell);
  const double s = (p.x - o.x) / mesh_.hx();
  const double t = (p.y - o.y) / mesh_.hy();
  return combine(physical_basis(s, t, mesh_.hx(), mesh_.hy()), local_coefficients(field, cell));
}

FieldValues Discretization::evaluate(const Vector& field, Point p) const {
  const auto cell = mesh_.locate(p);
  if (!cell) throw std::domain_error("evaluate: point outside the domain");
  return evaluate(field, *cell, p);
}

namespace {

// cof(H) g . k for symmetric H = [[hxx, hxy], [hxy, hyy]].
inline double cof_form(double hxx, double hxy, double hyy, double gx, double gy, double kx, double ky) {
  return hyy * gx * kx - hxy * (gx * ky + gy * kx) + hxx * gy * ky;
}

using LocalMatrix = std::array<double, 256>;

// Element matrix of a(.,.) or the mass form; identical on every cell.
LocalMatrix element_matrix(const ShapeTable& table, bool mass) {
  LocalMatrix m{};
  for (int q = 0; q < table.size(); ++q) {
    const double w = table.weight(q);
    const BasisValues& b = table.at[q];
    for (int p = 0; p < kLocalDofs; ++p) {
      for (int r = 0; r < kLocalDofs; ++r) {
        const double integrand = mass ? b.v[p] * b.v[r]
                                      : b.dxx[p] * b.dxx[r] + 2.0 * b.dxy[p] * b.dxy[r] + b.dyy[p] * b.dyy[r];
        m[p * 16 + r] += w * integrand;
      }
    }
  }
  return m;
}

SparseMatrix assemble_constant(const Discretization& disc, bool mass) {
  SparseMatrix m = disc.scalar_pattern();
  const LocalMatrix local = element_matrix(disc.assembly_table(), mass);
  auto& values = m.values();
  for (int c = 0; c < disc.mesh().num_cells(); ++c)
    for (int p = 0; p < kLocalDofs; ++p)
      for (int q = 0; q < kLocalDofs; ++q)
        if (const int k = disc.scalar_position(c, p, q); k >= 0) values[k] += local[p * 16 + q];
  return m;
}

// Local K(psi)[p][q] = b(psi, phi_q, phi_p) + b(phi_q, psi, phi_p).
void linearized_b(const ShapeTable& table, const std::array<double, kLocalDofs>& coeffs, LocalMatrix& k) {
  k.fill(0.0);
  for (int q = 0; q < table.size(); ++q) {
    const double hw = 0.5 * table.weight(q);
    const BasisValues& b = table.at[q];
    const FieldValues f = combine(b, coeffs);
    std::array<double, kLocalDofs> cx{}, cy{}, alpha{}, beta{}, gamma{};
    for (int p = 0; p < kLocalDofs; ++p) {
      // cof(D^2 psi) D phi_p
      cx[p] = f.dyy * b.dx[p] - f.dxy * b.dy[p];
      cy[p] = -f.dxy * b.dx[p] + f.dxx * b.dy[p];
      // coefficients of (phi_q)_yy, (phi_q)_xy, (phi_q)_xx in cof(D^2 phi_q) D psi . D phi_p
      alpha[p] = f.dx * b.dx[p];
      beta[p] = -(f.dx * b.dy[p] + f.dy * b.dx[p]);
      gamma[p] = f.dy * b.dy[p];
    }
    for (int p = 0; p < kLocalDofs; ++p) {
      double* row = &k[p * 16];
      for (int r = 0; r < kLocalDofs; ++r) {
        const double first = cx[p] * b.dx[r] + cy[p] * b.dy[r];
        const double second = alpha[p] * b.dyy[r] + beta[p] * b.dxy[r] + gamma[p] * b.dxx[r];
        row[r] += hw * (first + second);
      }
    }
  }
}

SparseMatrix assemble_linearized(const Discretization& disc, const PairField& psi, bool transpose) {
  if (psi.n_free() != disc.n_free()) throw std::invalid_argument("assemble_b_jacobian: field size mismatch");
  SparseMatrix m = disc.block_pattern();
  auto& values = m.values();
  LocalMatrix k1{};
  LocalMatrix k2{};
  for (int c = 0; c < disc.mesh().num_cells(); ++c) {
    linearized_b(disc.assembly_table(), disc.local_coefficients(psi.first, c), k1);
    linearized_b(disc.assembly_table(), disc.local_coefficients(psi.second, c), k2);
    for (int p = 0; p < kLocalDofs; ++p) {
      for (int q = 0; q < kLocalDofs; ++q) {
        if (disc.scalar_position(c, p, q) < 0) continue;
        // Jacobian blocks: J11 = K(psi2), J12 = K(psi1), J21 = -K(psi1), J22 = 0.
        const int lp = transpose ? q : p;
        const int lq = transpose ? p : q;
        const double j11 = k2[lp * 16 + lq];
        const double j12 = k1[lp * 16 + lq];
        const double j21 = -k1[lp * 16 + lq];
        if (!transpose) {
          values[disc.block_position(c, 0, 0, p, q)] += j11;
          values[disc.block_position(c, 0, 1, p, q)] += j12;
          values[disc.block_position(c, 1, 0, p, q)] += j21;
        } else {
          values[disc.block_position(c, 0, 0, p, q)] += j11;
          values[disc.block_position(c, 1, 0, p, q)] += j12;
          values[disc.block_position(c, 0, 1, p, q)] += j21;
        }
      }
    }
  }
  return m;
}

void scatter(const Discretization& disc, int cell, const std::array<double, kLocalDofs>& local, Vector& out,
             int offset) {
  const auto& dofs = disc.dofmap().cell_dofs(cell);
  for (int p = 0; p < kLocalDofs; ++p)
    if (dofs[p] >= 0) out[offset + dofs[p]] += local[p];
}

}  // namespace

SparseMatrix assemble_a(const Discretization& disc) { return assemble_constant(disc, false); }

SparseMatrix assemble_mass(const Discretization& disc) { return assemble_constant(disc, true); }

SparseMatrix assemble_b_jacobian(const Discretization& disc, const PairField& psi) {
  return assemble_linearized(disc, psi, false);
}

SparseMatrix assemble_b_adjoint(const Discretization& disc, const PairField& psi) {
  return assemble_linearized(disc, psi, true);
}

Vector assemble_b_residual(const Discretization& disc, const PairField& psi) {
  const int n = disc.n_free();
  if (psi.n_free() != n) throw std::invalid_argument("assemble_b_residual: field size mismatch");
  Vector out = Vector::Zero(2 * n);
  const ShapeTable& table = disc.assembly_table();
  for (int c = 0; c < disc.mesh().num_cells(); ++c) {
    const auto c1 = disc.local_coefficients(psi.first, c);
    const auto c2 = disc.local_coefficients(psi.second, c);
    std::array<double, kLocalDofs> r1{};
    std::array<double, kLocalDofs> r2{};
    for (int q = 0; q < table.size(); ++q) {
      const double hw = 0.5 * table.weight(q);
      const BasisValues& b = table.at[q];
      const FieldValues f1 = combine(b, c1);
      const FieldValues f2 = combine(b, c2);
      for (int p = 0; p < kLocalDofs; ++p) {
        // B(Psi, Psi, Phi) = b(psi1, psi2, phi1) + b(psi2, psi1, phi1) - b(psi1, psi1, phi2)
        r1[p] += hw * (cof_form(f1.dxx, f1.dxy, f1.dyy, f2.dx, f2.dy, b.dx[p], b.dy[p]) +
                       cof_form(f2.dxx, f2.dxy, f2.dyy, f1.dx, f1.dy, b.dx[p], b.dy[p]));
        r2[p] -= hw * cof_form(f1.dxx, f1.dxy, f1.dyy, f1.dx, f1.dy, b.dx[p], b.dy[p]);
      }
    }
    scatter(disc, c, r1, out, 0);
    scatter(disc, c, r2, out, n);
  }
  return out;
}

double eval_b(const Discretization& disc, const Vector& eta, const Vector& chi, const Vector& phi) {
  const ShapeTable& table = disc.assembly_table();
  double total = 0.0;
  for (int c = 0; c < disc.mesh().num_cells(); ++c) {
    const auto ce = disc.local_coefficients(eta, c);
    const auto cc = disc.local_coefficients(chi, c);
    const auto cp = disc.local_coefficients(phi, c);
    for (int q = 0; q < table.size(); ++q) {
      const FieldValues fe = combine(table.at[q], ce);
      const FieldValues fc = combine(table.at[q], cc);
      const FieldValues fp = combine(table.at[q], cp);
      total += 0.5 * table.weight(q) * cof_form(fe.dxx, fe.dxy, fe.dyy, fc.dx, fc.dy, fp.dx, fp.dy);
    }
  }
  return total;
}

BracketIdentity eval_bracket_identity(const Discretization& disc, const Vector& eta, const Vector& chi,
                                      const Vector& phi) {
  const ShapeTable& table = disc.assembly_table();
  BracketIdentity out;
  for (int c = 0; c < disc.mesh().num_cells(); ++c) {
    const auto ce = disc.local_coefficients(eta, c);
    const auto cc = disc.local_coefficients(chi, c);
    const auto cp = disc.local_coefficients(phi, c);
    for (int q = 0; q < table.size(); ++q) {
      const FieldValues fe = combine(table.at[q], ce);
      const FieldValues fc = combine(table.at[q], cc);
      const FieldValues fp = combine(table.at[q], cp);
      out.lhs += table.weight(q) * bracket(fe, fc) * fp.v;
    }
  }
  out.rhs = -2.0 * eval_b(disc, eta, chi, phi);
  return out;
}

Vector assemble_load(const Discretization& disc, const std::function<double(Point)>& g) {
  return assemble_load(disc, g, disc.error_table());
}

Vector assemble_load(const Discretization& disc, const std::function<double(Point)>& g, const ShapeTable& table) {
  Vector out = Vector::Zero(disc.n_free());
  const RectMesh& mesh = disc.mesh();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Point o = mesh.cell_origin(c);
    std::array<double, kLocalDofs> local{};
    for (int q = 0; q < table.size(); ++q) {
      const Point x{o.x + table.rule.points[q][0] * mesh.hx(), o.y + table.rule.points[q][1] * mesh.hy()};
      const double value = g(x);
      if (!std::isfinite(value))
        throw std::domain_error("assemble_load: non-finite source value in cell " + std::to_string(c));
      const double wv = table.weight(q) * value;
      for (int p = 0; p < kLocalDofs; ++p) local[p] += wv * table.at[q].v[p];
    }
    scatter(disc, c, local, out, 0);
  }
  return out;
}

Vector assemble_load(const Discretization& disc, std::span<const double> samples, const ShapeTable& table) {
  const RectMesh& mesh = disc.mesh();
  const int nq = table.size();
  if (samples.size() != static_cast<std::size_t>(mesh.num_cells()) * nq)
    throw std::invalid_argument("assemble_load: expected one sample per cell and quadrature point");
  Vector out = Vector::Zero(disc.n_free());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    std::array<double, kLocalDofs> local{};
    for (int q = 0; q < nq; ++q) {
      const double wv = table.weight(q) * samples[static_cast<std::size_t>(c) * nq + q];
      for (int p = 0; p < kLocalDofs; ++p) local[p] += wv * table.at[q].v[p];
    }
    scatter(disc, c, local, out, 0);
  }
  return out;
}

Vector control_load(const Discretization& disc, std::span<const int> cells, std::span<const double> values) {
  if (cells.size() != values.size()) throw std::invalid_argument("control_load: size mismatch");
  // int_T phi_p is the same on every cell.
  std::array<double, kLocalDofs> unit{};
  const ShapeTable& table = disc.assembly_table();
  for (int q = 0; q < table.size(); ++q)
    for (int p = 0; p < kLocalDofs; ++p) unit[p] += table.weight(q) * table.at[q].v[p];
  Vector out = Vector::Zero(disc.n_free());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    std::array<double, kLocalDofs> local{};
    for (int p = 0; p < kLocalDofs; ++p) local[p] = values[k] * unit[p];
    scatter(disc, cells[k], local, out, 0);
  }
  return out;
}

double h2_seminorm(const Discretization& disc, const Vector& field) {
  const ShapeTable& table = disc.assembly_table();
  double sum = 0.0;
  for (int c = 0; c < disc.mesh().num_cells(); ++c) {
    const auto cf = disc.local_coefficients(field, c);
    for (int q = 0; q < table.size(); ++q) {
      const FieldValues f = combine(table.at[q], cf);
      sum += table.weight(q) * (f.dxx * f.dxx + 2.0 * f.dxy * f.dxy + f.dyy * f.dyy);
    }
  }
  return std::sqrt(sum);
}

}  // namespace vkctrl
