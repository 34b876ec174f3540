#include "vkctrl/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SparseCore>
#include <unsupported/Eigen/IterativeSolvers>

#ifdef VKCTRL_HAVE_UMFPACK
#include <umfpack.h>
#else
#include <Eigen/SparseLU>
#endif

namespace vkctrl {

SparseMatrix::SparseMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)) {
  if (static_cast<int>(row_ptr_.size()) != rows + 1 || row_ptr_.back() != static_cast<int>(col_idx_.size()))
    throw std::invalid_argument("SparseMatrix: inconsistent CSR pattern");
  values_.assign(col_idx_.size(), 0.0);
}

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, const std::vector<Triplet>& triplets) {
  std::vector<Triplet> sorted = triplets;
  std::sort(sorted.begin(), sorted.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  std::vector<int> row_ptr(rows + 1, 0);
  std::vector<int> col_idx;
  std::vector<double> values;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const auto& t = sorted[k];
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw std::out_of_range("SparseMatrix::from_triplets: index out of range");
    if (k > 0 && sorted[k - 1].row == t.row && sorted[k - 1].col == t.col) {
      values.back() += t.value;
      continue;
    }
    col_idx.push_back(t.col);
    values.push_back(t.value);
    ++row_ptr[t.row + 1];
  }
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  SparseMatrix m(rows, cols, std::move(row_ptr), std::move(col_idx));
  m.values_ = std::move(values);
  return m;
}

SparseMatrix SparseMatrix::identity(int n) {
  std::vector<int> row_ptr(n + 1);
  std::vector<int> col_idx(n);
  std::iota(row_ptr.begin(), row_ptr.end(), 0);
  std::iota(col_idx.begin(), col_idx.end(), 0);
  SparseMatrix m(n, n, std::move(row_ptr), std::move(col_idx));
  std::fill(m.values_.begin(), m.values_.end(), 1.0);
  return m;
}

int SparseMatrix::find(int i, int j) const {
  const auto begin = col_idx_.begin() + row_ptr_[i];
  const auto end = col_idx_.begin() + row_ptr_[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return -1;
  return static_cast<int>(it - col_idx_.begin());
}

double SparseMatrix::coeff(int i, int j) const {
  const int k = find(i, j);
  return k < 0 ? 0.0 : values_[k];
}

Vector SparseMatrix::operator*(const Vector& x) const {
  if (x.size() != cols_) throw std::invalid_argument("SparseMatrix::operator*: dimension mismatch");
  Vector y(rows_);
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[col_idx_[k]];
    y[i] = s;
  }
  return y;
}

Vector SparseMatrix::multiply_transposed(const Vector& x) const {
  if (x.size() != rows_) throw std::invalid_argument("SparseMatrix::multiply_transposed: dimension mismatch");
  Vector y = Vector::Zero(cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) y[col_idx_[k]] += values_[k] * x[i];
  return y;
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<int> row_ptr(cols_ + 1, 0);
  for (int c : col_idx_) ++row_ptr[c + 1];
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  std::vector<int> next(row_ptr.begin(), row_ptr.end() - 1);
  std::vector<int> col_idx(col_idx_.size());
  std::vector<double> values(values_.size());
  for (int i = 0; i < rows_; ++i) {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const int dst = next[col_idx_[k]]++;
      col_idx[dst] = i;
      values[dst] = values_[k];
    }
  }
  SparseMatrix t(cols_, rows_, std::move(row_ptr), std::move(col_idx));
  t.values_ = std::move(values);
  return t;
}

void SparseMatrix::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

SparseMatrix& SparseMatrix::operator+=(const SparseMatrix& other) {
  if (other.row_ptr_ != row_ptr_ || other.col_idx_ != col_idx_)
    throw std::invalid_argument("SparseMatrix::operator+=: patterns differ");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

SparseMatrix& SparseMatrix::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double SparseMatrix::asymmetry() const {
  double m = 0.0;
  for (int i = 0; i < rows_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      m = std::max(m, std::abs(values_[k] - coeff(col_idx_[k], i)));
  return m;
}

bool SparseMatrix::structurally_symmetric() const {
  if (rows_ != cols_) return false;
  for (int i = 0; i < rows_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      if (find(col_idx_[k], i) < 0) return false;
  return true;
}

// ---------------------------------------------------------------------------

#ifdef VKCTRL_HAVE_UMFPACK

// The CSR arrays of A are the CSC arrays of A^T, so UMFPACK factors A^T and
// the solve systems are swapped accordingly.
struct Factorization::Impl {
  std::vector<int> ap;
  std::vector<int> ai;
  std::vector<double> ax;
  void* numeric = nullptr;
  double control[UMFPACK_CONTROL];

  ~Impl() {
    if (numeric) umfpack_di_free_numeric(&numeric);
  }

  Vector run(int sys, const Vector& b) const {
    Vector x(b.size());
    double info[UMFPACK_INFO];
    const int status = umfpack_di_solve(sys, ap.data(), ai.data(), ax.data(), x.data(), b.data(), numeric,
                                        control, info);
    if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix)
      throw FactorizationError("solve: UMFPACK error " + std::to_string(status));
    check_backward_error(sys, x, b);
    return x;
  }

  // Normwise backward error |r|_inf / (|M|_inf |x|_inf + |b|_inf) of the CSC
  // matrix M (sys == UMFPACK_A) or its transpose.
  void check_backward_error(int sys, const Vector& x, const Vector& b) const {
    Vector r = -b;
    double norm_m = 0.0;
    const int n = static_cast<int>(b.size());
    for (int j = 0; j < n; ++j) {
      double col = 0.0;
      for (int k = ap[j]; k < ap[j + 1]; ++k) {
        if (sys == UMFPACK_A)
          r[ai[k]] += ax[k] * x[j];
        else
          r[j] += ax[k] * x[ai[k]];
        col += std::abs(ax[k]);
      }
      norm_m = std::max(norm_m, col);
    }
    const double scale = norm_m * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
    const double eta = scale > 0.0 ? r.lpNorm<Eigen::Infinity>() / scale : 0.0;
    if (!(eta <= 1e-10))
      throw FactorizationError("solve: UMFPACK result has backward error " + std::to_string(eta) +
                               "; the linked BLAS is likely faulty");
  }
};

Factorization Factorization::factorize(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("factorize: matrix is not square");
  const int n = a.rows();
  auto impl = std::make_unique<Impl>();
  impl->ap = a.row_ptr();
  impl->ai = a.col_idx();
  impl->ax = a.values();
  umfpack_di_defaults(impl->control);
  double info[UMFPACK_INFO];
  void* symbolic = nullptr;
  int status = umfpack_di_symbolic(n, n, impl->ap.data(), impl->ai.data(), impl->ax.data(), &symbolic,
                                   impl->control, info);
  if (status != UMFPACK_OK) {
    if (symbolic) umfpack_di_free_symbolic(&symbolic);
    throw FactorizationError("factorize: symbolic analysis failed (UMFPACK status " + std::to_string(status) +
                             ")");
  }
  status = umfpack_di_numeric(impl->ap.data(), impl->ai.data(), impl->ax.data(), symbolic, &impl->numeric,
                              impl->control, info);
  umfpack_di_free_symbolic(&symbolic);
  if (status == UMFPACK_WARNING_singular_matrix)
    throw FactorizationError("factorize: numeric factorization found the matrix singular (zero pivot)");
  if (status != UMFPACK_OK)
    throw FactorizationError("factorize: numeric factorization failed (UMFPACK status " + std::to_string(status) +
                             ")");
  return Factorization(std::move(impl), n);
}

Vector Factorization::solve(const Vector& b) const {
  if (b.size() != n_) throw std::invalid_argument("solve: dimension mismatch");
  return impl_->run(UMFPACK_At, b);
}

Vector Factorization::solve_transposed(const Vector& b) const {
  if (b.size() != n_) throw std::invalid_argument("solve_transposed: dimension mismatch");
  return impl_->run(UMFPACK_A, b);
}

std::string Factorization::backend() { return "umfpack"; }

#else

struct Factorization::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor>, Eigen::COLAMDOrdering<int>> lu;
};

Factorization Factorization::factorize(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("factorize: matrix is not square");
  const int n = a.rows();
  Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor>> view(
      n, n, a.nonzeros(), a.row_ptr().data(), a.col_idx().data(), a.values().data());
  Eigen::SparseMatrix<double, Eigen::ColMajor> csc = view;
  auto impl = std::make_unique<Impl>();
  impl->lu.analyzePattern(csc);
  if (impl->lu.info() != Eigen::Success)
    throw FactorizationError("factorize: symbolic analysis failed: " + impl->lu.lastErrorMessage());
  impl->lu.factorize(csc);
  if (impl->lu.info() != Eigen::Success)
    throw FactorizationError("factorize: numeric factorization failed: " + impl->lu.lastErrorMessage());
  return Factorization(std::move(impl), n);
}

Vector Factorization::solve(const Vector& b) const {
  if (b.size() != n_) throw std::invalid_argument("solve: dimension mismatch");
  return impl_->lu.solve(b);
}

Vector Factorization::solve_transposed(const Vector& b) const {
  if (b.size() != n_) throw std::invalid_argument("solve_transposed: dimension mismatch");
  return impl_->lu.transpose().solve(b);
}

std::string Factorization::backend() { return "eigen-sparselu"; }

#endif

Factorization::Factorization(std::unique_ptr<Impl> impl, int n) : impl_(std::move(impl)), n_(n) {}
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;
Factorization::~Factorization() = default;

namespace {

/// Eigen preconditioner interface over an existing factorization.
class FactorizedPreconditioner {
 public:
  FactorizedPreconditioner() = default;
  void bind(const Factorization* f, bool transposed) {
    f_ = f;
    transposed_ = transposed;
  }

  template <class M>
  FactorizedPreconditioner& analyzePattern(const M&) { return *this; }
  template <class M>
  FactorizedPreconditioner& factorize(const M&) { return *this; }
  template <class M>
  FactorizedPreconditioner& compute(const M&) { return *this; }

  template <class Rhs>
  Vector solve(const Rhs& b) const {
    const Vector v = b;
    return transposed_ ? f_->solve_transposed(v) : f_->solve(v);
  }
  Eigen::ComputationInfo info() const { return Eigen::Success; }

 private:
  const Factorization* f_ = nullptr;
  bool transposed_ = false;
};

template <int Order>
Vector run_gmres(const Eigen::Map<const Eigen::SparseMatrix<double, Order>>& m, const Factorization& near,
                 const Vector& b, bool transposed, double tol, int max_iter, KrylovReport& report) {
  Eigen::GMRES<Eigen::SparseMatrix<double, Order>, FactorizedPreconditioner> gmres;
  gmres.set_restart(max_iter);
  gmres.setMaxIterations(max_iter);
  gmres.setTolerance(tol);
  gmres.compute(m);
  gmres.preconditioner().bind(&near, transposed);
  Vector x = gmres.solve(b);
  report.iterations = static_cast<int>(gmres.iterations());
  report.error = gmres.error();
  report.converged = gmres.info() == Eigen::Success && x.allFinite();
  return x;
}

}  // namespace

Vector preconditioned_gmres(const SparseMatrix& a, const Factorization& near, const Vector& b, bool transposed,
                            double tol, int max_iter, KrylovReport& report) {
  if (a.rows() != a.cols() || a.rows() != near.dimension() || b.size() != a.rows())
    throw std::invalid_argument("preconditioned_gmres: dimension mismatch");
  const int n = a.rows();
  // The CSR arrays read as CSC are the arrays of A^T.
  if (transposed) {
    const Eigen::Map<const Eigen::SparseMatrix<double, Eigen::ColMajor>> at(
        n, n, a.nonzeros(), a.row_ptr().data(), a.col_idx().data(), a.values().data());
    return run_gmres(at, near, b, true, tol, max_iter, report);
  }
  const Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor>> view(
      n, n, a.nonzeros(), a.row_ptr().data(), a.col_idx().data(), a.values().data());
  return run_gmres(view, near, b, false, tol, max_iter, report);
}

}  // namespace vkctrl
