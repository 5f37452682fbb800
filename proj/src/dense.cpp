#include "treesolve/dense.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace ts::dense {

namespace {

constexpr double kPivotFloor = 1e-300;

void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) {
    switch (code) {
      case ErrorCode::dimension_mismatch: throw DimensionMismatch(what);
      case ErrorCode::invalid_argument: throw InvalidArgument(what);
      default: throw Error(code, what);
    }
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
  require(rows >= 1 && cols >= 1, ErrorCode::invalid_argument,
          "matrix dimensions must be at least 1x1");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  require(rows >= 1 && cols >= 1, ErrorCode::invalid_argument,
          "matrix dimensions must be at least 1x1");
  require(data_.size() == rows * cols, ErrorCode::invalid_argument,
          "entry count does not match dimensions");
  for (double v : data_) {
    require(std::isfinite(v), ErrorCode::invalid_argument,
            "matrix entries must be finite");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<double> entries;
  std::size_t r = rows.size();
  std::size_t c = r ? rows.begin()->size() : 0;
  for (const auto& row : rows) {
    require(row.size() == c, ErrorCode::invalid_argument, "ragged row list");
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(entries));
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& src) {
  require(r0 + src.rows() <= rows_ && c0 + src.cols() <= cols_,
          ErrorCode::dimension_mismatch, "block does not fit");
  for (std::size_t i = 0; i < src.rows(); ++i)
    for (std::size_t j = 0; j < src.cols(); ++j)
      (*this)(r0 + i, c0 + j) = src(i, j);
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t h, std::size_t w) const {
  require(r0 + h <= rows_ && c0 + w <= cols_, ErrorCode::dimension_mismatch,
          "block out of bounds");
  Matrix out(h, w);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j)
      out(i, j) = (*this)(r0 + i, c0 + j);
  return out;
}

bool Matrix::is_zero() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
}

LUFactors lu_factor(const Matrix& m, FlopCount* flops) {
  require(m.rows() == m.cols() && m.rows() >= 1, ErrorCode::dimension_mismatch,
          "lu_factor requires a square matrix");
  const std::size_t n = m.rows();
  LUFactors f;
  f.n = n;
  f.lu.assign(m.data().begin(), m.data().end());
  f.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;

  auto at = [&](std::size_t r, std::size_t c) -> double& { return f.lu[r * n + c]; };
  std::uint64_t ops = 0;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    double best = std::abs(at(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      double v = std::abs(at(i, k));
      if (v > best) {
        best = v;
        pivot = i;
      }
    }
    if (best < kPivotFloor) {
      throw SingularMatrix("zero pivot in column " + std::to_string(k));
    }
    if (pivot != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(at(k, j), at(pivot, j));
      std::swap(f.perm[k], f.perm[pivot]);
    }
    const double d = at(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      at(i, k) /= d;
      ++ops;
      const double lik = at(i, k);
      for (std::size_t j = k + 1; j < n; ++j) {
        at(i, j) -= lik * at(k, j);
        ops += 2;
      }
    }
  }
  if (flops) flops->value += ops;
  return f;
}

Matrix lu_solve(const LUFactors& f, const Matrix& rhs, FlopCount* flops) {
  require(rhs.rows() == f.n, ErrorCode::dimension_mismatch,
          "rhs row count does not match factored dimension");
  const std::size_t n = f.n;
  const std::size_t w = rhs.cols();
  Matrix z(n, w);
  std::uint64_t ops = 0;

  // Apply the row permutation, then unit-lower forward substitution and
  // upper backward substitution, all columns at once.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < w; ++c)
      z(i, c) = rhs(f.perm[i], c);

  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double lij = f.lu[i * n + j];
      for (std::size_t c = 0; c < w; ++c) {
        z(i, c) -= lij * z(j, c);
        ops += 2;
      }
    }
  }
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t j = ii + 1; j < n; ++j) {
      const double uij = f.lu[ii * n + j];
      for (std::size_t c = 0; c < w; ++c) {
        z(ii, c) -= uij * z(j, c);
        ops += 2;
      }
    }
    const double d = f.lu[ii * n + ii];
    for (std::size_t c = 0; c < w; ++c) {
      z(ii, c) /= d;
      ++ops;
    }
  }
  if (flops) flops->value += ops;
  return z;
}

Matrix gemm_sub(const Matrix& m, const Matrix& u, const Matrix& w, FlopCount* flops) {
  require(u.cols() == w.rows(), ErrorCode::dimension_mismatch,
          "inner dimensions of u*w do not agree");
  require(m.rows() == u.rows() && m.cols() == w.cols(), ErrorCode::dimension_mismatch,
          "result dimensions do not match m");
  Matrix out = m;
  for (std::size_t i = 0; i < u.rows(); ++i)
    for (std::size_t t = 0; t < u.cols(); ++t) {
      const double uit = u(i, t);
      for (std::size_t j = 0; j < w.cols(); ++j)
        out(i, j) -= uit * w(t, j);
    }
  if (flops) flops->value += 2ull * u.rows() * u.cols() * w.cols();
  return out;
}

Matrix multiply(const Matrix& a, const Matrix& b, FlopCount* flops) {
  require(a.cols() == b.rows(), ErrorCode::dimension_mismatch,
          "inner dimensions do not agree");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t t = 0; t < a.cols(); ++t) {
      const double ait = a(i, t);
      for (std::size_t j = 0; j < b.cols(); ++j)
        out(i, j) += ait * b(t, j);
    }
  if (flops) flops->value += 2ull * a.rows() * a.cols() * b.cols();
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::dimension_mismatch,
          "shape mismatch in add");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::dimension_mismatch,
          "shape mismatch in subtract");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

Matrix hstack(std::span<const Matrix> parts) {
  require(!parts.empty(), ErrorCode::invalid_argument, "hstack of nothing");
  std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  for (const Matrix& p : parts) {
    require(p.rows() == rows, ErrorCode::dimension_mismatch, "hstack row mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::size_t c0 = 0;
  for (const Matrix& p : parts) {
    out.set_block(0, c0, p);
    c0 += p.cols();
  }
  return out;
}

Matrix vstack(std::span<const Matrix> parts) {
  require(!parts.empty(), ErrorCode::invalid_argument, "vstack of nothing");
  std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const Matrix& p : parts) {
    require(p.cols() == cols, ErrorCode::dimension_mismatch, "vstack column mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::size_t r0 = 0;
  for (const Matrix& p : parts) {
    out.set_block(r0, 0, p);
    r0 += p.rows();
  }
  return out;
}

double max_norm(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::dimension_mismatch,
          "shape mismatch in max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace ts::dense
