#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include "flowda/errors.hpp"

namespace flowda {

using Vec = Eigen::VectorXd;

// Unordered (row, col, value) contributions; duplicates are summed when
// converted to CSR. Assembly loops append here, one instance per thread.
class Triplets {
public:
  Triplets() = default;
  explicit Triplets(std::size_t reserve) {
    rows_.reserve(reserve);
    cols_.reserve(reserve);
    values_.reserve(reserve);
  }

  void add(int row, int col, double value) {
    rows_.push_back(row);
    cols_.push_back(col);
    values_.push_back(value);
  }

  void append(const Triplets& other);
  void clear();
  std::size_t size() const { return rows_.size(); }

  std::span<const int> rows() const { return rows_; }
  std::span<const int> cols() const { return cols_; }
  std::span<const double> values() const { return values_; }

private:
  std::vector<int> rows_, cols_;
  std::vector<double> values_;
};

// Compressed sparse row matrix. Column indices are strictly increasing within
// each row; all values finite. Immutable once built.
class CsrMatrix {
public:
  CsrMatrix() = default;
  static CsrMatrix zero(int n_rows, int n_cols);

  int rows() const { return n_rows_; }
  int cols() const { return n_cols_; }
  int nnz() const { return static_cast<int>(values_.size()); }

  std::span<const int> row_offsets() const { return row_offsets_; }
  std::span<const int> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }

  // Value at (i, j), zero if the entry is not stored.
  double coeff(int i, int j) const;

  Vec multiply(const Vec& x) const;
  Vec multiply_transpose(const Vec& x) const;
  CsrMatrix transposed() const;
  void scale(double factor);
  double norm_inf() const;  // max absolute row sum

  // x' A y without forming intermediates.
  double bilinear(const Vec& x, const Vec& y) const;

  Eigen::SparseMatrix<double> to_eigen() const;

  void write_matrix_market(std::ostream& out) const;

  friend CsrMatrix to_csr(const Triplets& t, int n_rows, int n_cols);

private:
  int n_rows_ = 0, n_cols_ = 0;
  std::vector<int> row_offsets_{0};
  std::vector<int> col_indices_;
  std::vector<double> values_;
};

CsrMatrix to_csr(const Triplets& t, int n_rows, int n_cols);

Vec spmv(const CsrMatrix& a, const Vec& x);
Vec transpose_spmv(const CsrMatrix& a, const Vec& x);

// Sparse direct LU (fill-reducing ordering + partial pivoting), backed by
// Eigen's SparseLU behind this contract. Factorization is single-use per
// thread; the matrix itself stays immutable.
class LuSolver {
public:
  explicit LuSolver(const CsrMatrix& a);

  int size() const { return n_; }

  // Solves A x = b and verifies ||Ax-b||_inf <= 1e-10 (||A||_inf ||x||_inf +
  // ||b||_inf).
  Vec solve(const Vec& b) const;
  // Solves A^T x = b with the same factorization.
  Vec solve_transpose(const Vec& b) const;

private:
  void check_residual(const Vec& x, const Vec& b, bool transpose) const;

  int n_ = 0;
  double norm_inf_a_ = 0.0;
  Eigen::SparseMatrix<double> matrix_;
  // Eigen's transpose-solve view is a non-const accessor; the factorization
  // itself is never modified after construction.
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>
      lu_;
};

// One-shot convenience wrapper.
Vec lu_solve(const CsrMatrix& a, const Vec& b);

}  // namespace flowda
