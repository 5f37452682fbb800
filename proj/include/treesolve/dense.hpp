#ifndef TREESOLVE_DENSE_HPP
#define TREESOLVE_DENSE_HPP

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "treesolve/error.hpp"

namespace ts::dense {

/// Accumulates arithmetic operation counts across kernel calls.
/// Passing a counter is optional; kernels skip accounting when none is
/// given. Counting is exact (one increment per multiply, add, subtract
/// or divide in the kernel loop nests) so that simulated compute cost is
/// reproducible and free of timing noise.
struct FlopCount {
  std::uint64_t value = 0;
};

/// Dense row-major matrix of doubles. Entries supplied at construction
/// must be finite; a zero-filled matrix is produced when only the
/// dimensions are given.
class Matrix {
public:
  Matrix() = default;  // empty placeholder, 0x0
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  /// Copies `src` into this matrix with its top-left corner at (r0, c0).
  void set_block(std::size_t r0, std::size_t c0, const Matrix& src);
  /// Extracts the `h` x `w` sub-matrix whose top-left corner is (r0, c0).
  Matrix block(std::size_t r0, std::size_t c0, std::size_t h, std::size_t w) const;

  bool is_zero() const noexcept;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Packed LU factorization with partial (row) pivoting.
/// `lu` stores the unit-lower factor strictly below the diagonal and the
/// upper factor on and above it. `perm` maps factored row i to the input
/// row it came from; it is a bijection on {0..n-1}.
struct LUFactors {
  std::size_t n = 0;
  std::vector<double> lu;
  std::vector<std::size_t> perm;
};

/// Factors a square matrix as P*M = L*U with partial pivoting.
/// Throws SingularMatrix when the best available pivot is below 1e-300
/// in absolute value (an exact zero column for practical purposes);
/// merely ill-conditioned inputs proceed and are left to residual checks.
LUFactors lu_factor(const Matrix& m, FlopCount* flops = nullptr);

/// Solves M*Z = rhs column-by-column from the packed factors.
Matrix lu_solve(const LUFactors& f, const Matrix& rhs, FlopCount* flops = nullptr);

/// Returns m - u*w.
Matrix gemm_sub(const Matrix& m, const Matrix& u, const Matrix& w, FlopCount* flops = nullptr);

Matrix multiply(const Matrix& a, const Matrix& b, FlopCount* flops = nullptr);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);

/// Horizontal / vertical concatenation. All parts must agree on the
/// shared dimension.
Matrix hstack(std::span<const Matrix> parts);
Matrix vstack(std::span<const Matrix> parts);

double max_norm(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace ts::dense

#endif  // TREESOLVE_DENSE_HPP
