#include "radau_dae/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "radau_dae/errors.hpp"

namespace radau_dae {

template <class T>
BasicMatrix<T>::BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw InvalidArgument("matrix entries do not match its shape");
  }
}

template <class T>
BasicMatrix<T>::BasicMatrix(std::initializer_list<std::initializer_list<T>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw InvalidArgument("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

template <class T>
BasicMatrix<T> BasicMatrix<T>::identity(std::size_t n) {
  BasicMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
  return m;
}

template <class T>
double BasicMatrix<T>::norm_inf() const {
  double best = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
    best = std::max(best, s);
  }
  return best;
}

template class BasicMatrix<double>;
template class BasicMatrix<Complex>;

namespace {

template <class T>
BasicLuFactors<T> factor_impl(const BasicMatrix<T>& a) {
  if (!a.square()) throw InvalidArgument("lu_factor: matrix is not square");
  const std::size_t n = a.rows();
  BasicLuFactors<T> f;
  f.factors = a;
  f.pivots.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.pivots[i] = i;

  const double threshold = 1e3 * std::numeric_limits<double>::epsilon() * a.norm_inf();
  auto& lu = f.factors;
  f.min_pivot = std::numeric_limits<double>::infinity();
  f.max_pivot = 0.0;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (!(best > threshold)) {
      throw SingularMatrix("lu_factor: pivot " + std::to_string(best) + " at column " +
                           std::to_string(k) + " below threshold");
    }
    if (p != k) {
      std::swap_ranges(lu.row(k).begin(), lu.row(k).end(), lu.row(p).begin());
      std::swap(f.pivots[k], f.pivots[p]);
      f.permutation_sign = -f.permutation_sign;
    }
    f.min_pivot = std::min(f.min_pivot, best);
    f.max_pivot = std::max(f.max_pivot, best);

    const T inv = T{1} / lu(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const T l = lu(i, k) * inv;
      lu(i, k) = l;
      if (l == T{}) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= l * lu(k, j);
    }
  }
  if (n == 0) f.min_pivot = 0.0;
  return f;
}

template <class T>
std::vector<T> solve_impl(const BasicLuFactors<T>& f, std::span<const T> rhs) {
  const std::size_t n = f.size();
  if (rhs.size() != n) throw InvalidArgument("lu_solve: dimension mismatch");
  const auto& lu = f.factors;
  std::vector<T> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = rhs[f.pivots[i]];
  for (std::size_t i = 0; i < n; ++i) {
    T s = x[i];
    for (std::size_t j = 0; j < i; ++j) s -= lu(i, j) * x[j];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    T s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= lu(i, j) * x[j];
    x[i] = s / lu(i, i);
  }
  return x;
}

}  // namespace

LuFactors lu_factor(const DenseMatrix& a) { return factor_impl(a); }
ComplexLuFactors lu_factor(const ComplexMatrix& a) { return factor_impl(a); }

Vector lu_solve(const LuFactors& f, std::span<const double> rhs) { return solve_impl(f, rhs); }

ComplexVector lu_solve(const ComplexLuFactors& f, std::span<const Complex> rhs) {
  return solve_impl(f, rhs);
}

DenseMatrix lu_solve(const LuFactors& f, const DenseMatrix& rhs) {
  if (rhs.rows() != f.size()) throw InvalidArgument("lu_solve: dimension mismatch");
  DenseMatrix out(rhs.rows(), rhs.cols());
  Vector column(rhs.rows());
  for (std::size_t j = 0; j < rhs.cols(); ++j) {
    for (std::size_t i = 0; i < rhs.rows(); ++i) column[i] = rhs(i, j);
    const Vector x = lu_solve(f, column);
    for (std::size_t i = 0; i < rhs.rows(); ++i) out(i, j) = x[i];
  }
  return out;
}

double determinant(const LuFactors& f) {
  double d = f.permutation_sign;
  for (std::size_t i = 0; i < f.size(); ++i) d *= f.factors(i, i);
  return d;
}

DenseMatrix lower_factor(const LuFactors& f) {
  const std::size_t n = f.size();
  DenseMatrix l = DenseMatrix::identity(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) l(i, j) = f.factors(i, j);
  return l;
}

DenseMatrix upper_factor(const LuFactors& f) {
  const std::size_t n = f.size();
  DenseMatrix u(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) u(i, j) = f.factors(i, j);
  return u;
}

Vector solve(const DenseMatrix& a, std::span<const double> rhs) {
  return lu_solve(lu_factor(a), rhs);
}

DenseMatrix inverse(const DenseMatrix& a) {
  return lu_solve(lu_factor(a), DenseMatrix::identity(a.rows()));
}

ComplexVector complex_solve(const ComplexMatrix& a, std::span<const Complex> rhs) {
  return lu_solve(lu_factor(a), rhs);
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("multiply: inner dimensions differ");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Vector multiply(const DenseMatrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw InvalidArgument("multiply: dimension mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

double norm_inf(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

LegendreValue legendre(std::size_t n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p_prev = 1.0, p = x;
  double d_prev = 0.0, d = 1.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double p_next = ((2.0 * kk + 1.0) * x * p - kk * p_prev) / (kk + 1.0);
    const double d_next = d_prev + (2.0 * kk + 1.0) * p;
    p_prev = p;
    p = p_next;
    d_prev = d;
    d = d_next;
  }
  return {p, d};
}

QuadratureRule gauss_legendre_rule(std::size_t order) {
  if (order == 0) throw InvalidArgument("gauss_legendre_rule: order must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const double n = static_cast<double>(order);
  for (std::size_t i = 0; i < order; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    LegendreValue pv{};
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      pv = legendre(order, x);
      const double dx = pv.value / pv.derivative;
      x -= dx;
      if (std::abs(dx) <= 1e-15 * (1.0 + std::abs(x))) {
        converged = true;
        break;
      }
    }
    if (!converged) throw ConvergenceFailure("gauss_legendre_rule: Newton did not converge");
    pv = legendre(order, x);
    // nodes come out descending in x; store ascending in tau
    const std::size_t slot = order - 1 - i;
    rule.nodes[slot] = 0.5 * (1.0 + x);
    rule.weights[slot] = 1.0 / ((1.0 - x * x) * pv.derivative * pv.derivative);
  }
  return rule;
}

}  // namespace radau_dae
