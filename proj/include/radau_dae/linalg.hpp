#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace radau_dae {

using Vector = std::vector<double>;
using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

/// Dense row-major matrix.
template <class T>
class BasicMatrix {
 public:
  BasicMatrix() = default;
  BasicMatrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> entries);
  BasicMatrix(std::initializer_list<std::initializer_list<T>> rows);

  static BasicMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }
  bool square() const noexcept { return rows_ == cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::vector<T>& entries() noexcept { return data_; }
  const std::vector<T>& entries() const noexcept { return data_; }

  /// Maximum absolute row sum.
  double norm_inf() const;

  friend bool operator==(const BasicMatrix&, const BasicMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using DenseMatrix = BasicMatrix<double>;
using ComplexMatrix = BasicMatrix<Complex>;

/// Packed L\U factors of P·a = L·U with unit-diagonal L.
template <class T>
struct BasicLuFactors {
  BasicMatrix<T> factors;
  std::vector<std::size_t> pivots;  // row i of P·a is row pivots[i] of a
  double min_pivot = 0.0;
  double max_pivot = 0.0;
  int permutation_sign = 1;

  std::size_t size() const noexcept { return factors.rows(); }
  /// min |u_ii| / max |u_ii|; a cheap conditioning indicator.
  double pivot_ratio() const noexcept { return max_pivot > 0.0 ? min_pivot / max_pivot : 0.0; }
};

using LuFactors = BasicLuFactors<double>;
using ComplexLuFactors = BasicLuFactors<Complex>;

/// Throws SingularMatrix when a pivot falls below 1e3·eps·‖a‖∞.
LuFactors lu_factor(const DenseMatrix& a);
ComplexLuFactors lu_factor(const ComplexMatrix& a);

Vector lu_solve(const LuFactors& f, std::span<const double> rhs);
DenseMatrix lu_solve(const LuFactors& f, const DenseMatrix& rhs);
ComplexVector lu_solve(const ComplexLuFactors& f, std::span<const Complex> rhs);

double determinant(const LuFactors& f);
DenseMatrix lower_factor(const LuFactors& f);
DenseMatrix upper_factor(const LuFactors& f);

Vector solve(const DenseMatrix& a, std::span<const double> rhs);
DenseMatrix inverse(const DenseMatrix& a);
ComplexVector complex_solve(const ComplexMatrix& a, std::span<const Complex> rhs);

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
Vector multiply(const DenseMatrix& a, std::span<const double> x);
DenseMatrix transpose(const DenseMatrix& a);

double norm_inf(std::span<const double> x);

struct QuadratureRule {
  Vector nodes;    // on [0, 1]
  Vector weights;  // sum to 1
};

/// Gauss-Legendre rule with `order` points mapped to [0, 1]; exact to degree 2·order−1.
QuadratureRule gauss_legendre_rule(std::size_t order);

/// Legendre polynomial P_n(x) on [−1, 1] and its derivative, by three-term recurrence.
struct LegendreValue {
  double value;
  double derivative;
};
LegendreValue legendre(std::size_t n, double x);

}  // namespace radau_dae
