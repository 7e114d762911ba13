#include "flowda/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace flowda {

void Triplets::append(const Triplets& other) {
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
  cols_.insert(cols_.end(), other.cols_.begin(), other.cols_.end());
  values_.insert(values_.end(), other.values_.begin(), other.values_.end());
}

void Triplets::clear() {
  rows_.clear();
  cols_.clear();
  values_.clear();
}

CsrMatrix CsrMatrix::zero(int n_rows, int n_cols) {
  CsrMatrix m;
  m.n_rows_ = n_rows;
  m.n_cols_ = n_cols;
  m.row_offsets_.assign(static_cast<std::size_t>(n_rows) + 1, 0);
  return m;
}

double CsrMatrix::coeff(int i, int j) const {
  const auto begin = col_indices_.begin() + row_offsets_[i];
  const auto end = col_indices_.begin() + row_offsets_[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

Vec CsrMatrix::multiply(const Vec& x) const {
  if (x.size() != n_cols_)
    throw NumericsError("spmv: dimension mismatch (" +
                        std::to_string(x.size()) + " vs " +
                        std::to_string(n_cols_) + " cols)");
  Vec y = Vec::Zero(n_rows_);
  for (int i = 0; i < n_rows_; ++i) {
    double acc = 0.0;
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      acc += values_[k] * x[col_indices_[k]];
    y[i] = acc;
  }
  return y;
}

Vec CsrMatrix::multiply_transpose(const Vec& x) const {
  if (x.size() != n_rows_)
    throw NumericsError("transpose_spmv: dimension mismatch (" +
                        std::to_string(x.size()) + " vs " +
                        std::to_string(n_rows_) + " rows)");
  Vec y = Vec::Zero(n_cols_);
  for (int i = 0; i < n_rows_; ++i)
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      y[col_indices_[k]] += values_[k] * x[i];
  return y;
}

CsrMatrix CsrMatrix::transposed() const {
  Triplets t(values_.size());
  for (int i = 0; i < n_rows_; ++i)
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      t.add(col_indices_[k], i, values_[k]);
  return to_csr(t, n_cols_, n_rows_);
}

void CsrMatrix::scale(double factor) {
  for (double& v : values_) v *= factor;
}

double CsrMatrix::norm_inf() const {
  double best = 0.0;
  for (int i = 0; i < n_rows_; ++i) {
    double row = 0.0;
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      row += std::abs(values_[k]);
    best = std::max(best, row);
  }
  return best;
}

double CsrMatrix::bilinear(const Vec& x, const Vec& y) const {
  if (x.size() != n_rows_ || y.size() != n_cols_)
    throw NumericsError("bilinear: dimension mismatch");
  double acc = 0.0;
  for (int i = 0; i < n_rows_; ++i) {
    double row = 0.0;
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      row += values_[k] * y[col_indices_[k]];
    acc += x[i] * row;
  }
  return acc;
}

Eigen::SparseMatrix<double> CsrMatrix::to_eigen() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(values_.size());
  for (int i = 0; i < n_rows_; ++i)
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      t.emplace_back(i, col_indices_[k], values_[k]);
  Eigen::SparseMatrix<double> m(n_rows_, n_cols_);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

void CsrMatrix::write_matrix_market(std::ostream& out) const {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << n_rows_ << ' ' << n_cols_ << ' ' << nnz() << '\n';
  char buf[40];
  for (int i = 0; i < n_rows_; ++i)
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", values_[k]);
      out << (i + 1) << ' ' << (col_indices_[k] + 1) << ' ' << buf << '\n';
    }
}

CsrMatrix to_csr(const Triplets& t, int n_rows, int n_cols) {
  const auto rows = t.rows();
  const auto cols = t.cols();
  const auto vals = t.values();
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= n_rows || cols[k] < 0 || cols[k] >= n_cols)
      throw NumericsError("to_csr: index (" + std::to_string(rows[k]) + "," +
                          std::to_string(cols[k]) + ") out of range for " +
                          std::to_string(n_rows) + "x" +
                          std::to_string(n_cols));
    if (!std::isfinite(vals[k]))
      throw NumericsError("to_csr: non-finite value at (" +
                          std::to_string(rows[k]) + "," +
                          std::to_string(cols[k]) + ")");
  }

  // Counting sort by row, then sort each row's slice by column and sum
  // duplicates in place.
  std::vector<int> count(static_cast<std::size_t>(n_rows) + 1, 0);
  for (std::size_t k = 0; k < t.size(); ++k) count[rows[k] + 1]++;
  std::partial_sum(count.begin(), count.end(), count.begin());

  std::vector<int> sorted_cols(t.size());
  std::vector<double> sorted_vals(t.size());
  {
    std::vector<int> cursor(count.begin(), count.end() - 1);
    for (std::size_t k = 0; k < t.size(); ++k) {
      const int pos = cursor[rows[k]]++;
      sorted_cols[pos] = cols[k];
      sorted_vals[pos] = vals[k];
    }
  }

  CsrMatrix m;
  m.n_rows_ = n_rows;
  m.n_cols_ = n_cols;
  m.row_offsets_.assign(static_cast<std::size_t>(n_rows) + 1, 0);
  m.col_indices_.reserve(t.size());
  m.values_.reserve(t.size());

  std::vector<int> perm;
  for (int i = 0; i < n_rows; ++i) {
    const int begin = count[i], end = count[i + 1];
    perm.resize(end - begin);
    std::iota(perm.begin(), perm.end(), begin);
    std::sort(perm.begin(), perm.end(), [&](int a, int b) {
      return sorted_cols[a] < sorted_cols[b];
    });
    int last_col = -1;
    for (int p : perm) {
      if (sorted_cols[p] == last_col) {
        m.values_.back() += sorted_vals[p];
      } else {
        last_col = sorted_cols[p];
        m.col_indices_.push_back(last_col);
        m.values_.push_back(sorted_vals[p]);
      }
    }
    m.row_offsets_[i + 1] = static_cast<int>(m.col_indices_.size());
  }
  return m;
}

Vec spmv(const CsrMatrix& a, const Vec& x) { return a.multiply(x); }
Vec transpose_spmv(const CsrMatrix& a, const Vec& x) {
  return a.multiply_transpose(x);
}

namespace {
// Eigen reports singular columns in its error string; recover the index when
// present so callers can see which pivot failed.
int parse_pivot_index(const std::string& message) {
  std::size_t pos = message.find_last_not_of("0123456789");
  if (pos == std::string::npos || pos + 1 >= message.size()) return -1;
  return std::stoi(message.substr(pos + 1));
}
}  // namespace

LuSolver::LuSolver(const CsrMatrix& a) {
  if (a.rows() != a.cols())
    throw NumericsError("lu_solve: matrix is not square (" +
                        std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + ")");
  n_ = a.rows();
  norm_inf_a_ = a.norm_inf();
  matrix_ = a.to_eigen();
  matrix_.makeCompressed();
  lu_.isSymmetric(false);
  lu_.analyzePattern(matrix_);
  lu_.factorize(matrix_);
  if (lu_.info() != Eigen::Success) {
    const std::string msg = lu_.lastErrorMessage();
    throw SingularMatrixError("lu_solve: factorization failed: " + msg,
                              parse_pivot_index(msg));
  }
}

void LuSolver::check_residual(const Vec& x, const Vec& b,
                              bool transpose) const {
  const Vec r = (transpose ? Vec(matrix_.transpose() * x) : Vec(matrix_ * x)) - b;
  const double bound =
      1e-10 * (norm_inf_a_ * x.lpNorm<Eigen::Infinity>() +
               b.lpNorm<Eigen::Infinity>());
  const double res = r.lpNorm<Eigen::Infinity>();
  if (res > bound && res > 1e-300)
    throw NumericsError("lu_solve: residual " + std::to_string(res) +
                        " exceeds bound " + std::to_string(bound));
}

Vec LuSolver::solve(const Vec& b) const {
  if (b.size() != n_)
    throw NumericsError("lu_solve: right-hand side has length " +
                        std::to_string(b.size()) + ", expected " +
                        std::to_string(n_));
  Vec x = lu_.solve(b);
  check_residual(x, b, false);
  return x;
}

Vec LuSolver::solve_transpose(const Vec& b) const {
  if (b.size() != n_)
    throw NumericsError("lu_solve: right-hand side has length " +
                        std::to_string(b.size()) + ", expected " +
                        std::to_string(n_));
  Vec x = lu_.adjoint().solve(b);
  check_residual(x, b, true);
  return x;
}

Vec lu_solve(const CsrMatrix& a, const Vec& b) {
  return LuSolver(a).solve(b);
}

}  // namespace flowda
