#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "twoopt/errors.hpp"

namespace twoopt {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

template <class T>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  DenseMatrix transposed() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  void swap_rows(std::size_t a, std::size_t b) {
    for (std::size_t c = 0; c < cols_; ++c) std::swap((*this)(a, c), (*this)(b, c));
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using BigMatrix = DenseMatrix<BigInt>;

template <class T>
std::vector<T> multiply(const DenseMatrix<T>& a, const std::vector<T>& x) {
  if (a.cols() != x.size()) throw DimensionError("matrix/vector size mismatch");
  std::vector<T> y(a.rows(), T(0));
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) y[r] += a(r, c) * x[c];
  return y;
}

namespace detail {

// In-place Bareiss forward elimination over the first `pivot_cols` columns.
// Returns the pivot columns in order; `swaps` counts row exchanges. Every
// division is exact, so all entries stay integral.
inline std::vector<std::size_t> bareiss_eliminate(BigMatrix& m, std::size_t pivot_cols, std::size_t& swaps) {
  std::vector<std::size_t> pivots;
  BigInt prev = 1;
  std::size_t row = 0;
  swaps = 0;
  for (std::size_t col = 0; col < pivot_cols && row < m.rows(); ++col) {
    std::size_t p = row;
    while (p < m.rows() && m(p, col) == 0) ++p;
    if (p == m.rows()) continue;
    if (p != row) {
      m.swap_rows(p, row);
      ++swaps;
    }
    for (std::size_t i = row + 1; i < m.rows(); ++i) {
      for (std::size_t j = col + 1; j < m.cols(); ++j)
        m(i, j) = (m(i, j) * m(row, col) - m(i, col) * m(row, j)) / prev;
      m(i, col) = 0;
    }
    prev = m(row, col);
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

}  // namespace detail

inline BigInt determinant(BigMatrix m) {
  if (m.rows() != m.cols()) throw DimensionError("determinant of a non-square matrix");
  if (m.rows() == 0) return 1;
  std::size_t swaps = 0;
  const auto pivots = detail::bareiss_eliminate(m, m.cols(), swaps);
  if (pivots.size() < m.rows()) return 0;
  BigInt det = m(m.rows() - 1, m.cols() - 1);
  return swaps % 2 ? BigInt(-det) : det;
}

inline std::size_t rank(BigMatrix m) {
  std::size_t swaps = 0;
  return detail::bareiss_eliminate(m, m.cols(), swaps).size();
}

// Exact solution of A x = b for square non-singular A; throws RankError otherwise.
inline std::vector<Rational> solve_exact(const BigMatrix& a, const std::vector<BigInt>& b) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw DimensionError("solve_exact needs a square matrix");
  if (b.size() != n) throw DimensionError("right-hand side has the wrong length");
  BigMatrix aug(n, n + 1);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) aug(r, c) = a(r, c);
    aug(r, n) = b[r];
  }
  std::size_t swaps = 0;
  const auto pivots = detail::bareiss_eliminate(aug, n, swaps);
  if (pivots.size() < n)
    throw RankError("coefficient matrix is singular (rank " + std::to_string(pivots.size()) + " < " +
                    std::to_string(n) + ")");
  std::vector<Rational> x(n);
  for (std::size_t i = n; i-- > 0;) {
    Rational acc = Rational(aug(i, n));
    for (std::size_t j = i + 1; j < n; ++j) acc -= Rational(aug(i, j)) * x[j];
    x[i] = acc / Rational(aug(i, i));
  }
  return x;
}

inline BigInt factorial(unsigned k) {
  BigInt f = 1;
  for (unsigned i = 2; i <= k; ++i) f *= i;
  return f;
}

inline bool is_integer(const Rational& q) { return boost::multiprecision::denominator(q) == 1; }

inline std::string to_string(const Rational& q) {
  return is_integer(q) ? boost::multiprecision::numerator(q).str() : q.str();
}

}  // namespace twoopt
