#pragma once

#include <Eigen/Core>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace vkctrl {

using Vector = Eigen::VectorXd;

/// Compressed sparse row matrix with a fixed pattern.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  /// Pattern with zero values; column indices must be sorted within each row.
  SparseMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx);

  /// Build from (row, col, value) triplets; duplicates are summed.
  struct Triplet {
    int row;
    int col;
    double value;
  };
  static SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& triplets);
  static SparseMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nonzeros() const { return static_cast<int>(values_.size()); }

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Position of (i, j) in values(), or -1 if structurally zero.
  int find(int i, int j) const;
  double coeff(int i, int j) const;

  Vector operator*(const Vector& x) const;
  Vector multiply_transposed(const Vector& x) const;
  SparseMatrix transposed() const;

  void set_zero();
  SparseMatrix& operator+=(const SparseMatrix& other);  // patterns must match
  SparseMatrix& operator*=(double s);

  double max_abs() const;
  /// max |A_ij - A_ji| over the stored entries.
  double asymmetry() const;
  bool structurally_symmetric() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sparse LU factorization of a square matrix, reusable across right-hand
/// sides. Both A x = b and A^T x = b can be solved from one factorization.
class Factorization {
 public:
  /// Throws FactorizationError naming the failing stage for singular input.
  static Factorization factorize(const SparseMatrix& a);

  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;
  ~Factorization();

  int dimension() const { return n_; }
  Vector solve(const Vector& b) const;
  Vector solve_transposed(const Vector& b) const;

  /// Name of the backend in use ("umfpack" or "eigen-sparselu").
  static std::string backend();

 private:
  struct Impl;
  explicit Factorization(std::unique_ptr<Impl> impl, int n);
  std::unique_ptr<Impl> impl_;
  int n_ = 0;
};

struct KrylovReport {
  int iterations = 0;
  double error = 0.0;  // preconditioned relative residual at exit
  bool converged = false;
};

/// GMRES for A x = b (A^T x = b when transposed) preconditioned with the
/// factorization of a nearby matrix. The result is only meaningful when
/// report.converged is set.
Vector preconditioned_gmres(const SparseMatrix& a, const Factorization& near, const Vector& b, bool transposed,
                            double tol, int max_iter, KrylovReport& report);

}  // namespace vkctrl
