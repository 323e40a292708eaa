#include <doctest.h>

#include <cmath>
#include <random>

#include "radau_dae/errors.hpp"
#include "radau_dae/linalg.hpp"

using namespace radau_dae;

namespace {

DenseMatrix permuted(const LuFactors& f, const DenseMatrix& a) {
  DenseMatrix pa(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) pa(i, j) = a(f.pivots[i], j);
  return pa;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.entries().size(); ++i)
    m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
  return m;
}

DenseMatrix random_matrix(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseMatrix a(n, n);
  for (auto& x : a.entries()) x = dist(rng);
  for (std::size_t i = 0; i < n; ++i) a(i, i) += static_cast<double>(n);
  return a;
}

}  // namespace

TEST_CASE("matrix shape is checked") {
  CHECK_THROWS_AS(DenseMatrix(2, 2, Vector{1.0, 2.0, 3.0}), InvalidArgument);
  DenseMatrix m{{1.0, 2.0}, {3.0, 4.0}};
  CHECK(m.rows() == 2);
  CHECK(m(1, 0) == 3.0);
  CHECK(m.norm_inf() == doctest::Approx(7.0));
}

TEST_CASE("identity factors trivially") {
  const auto f = lu_factor(DenseMatrix::identity(3));
  CHECK(lower_factor(f) == DenseMatrix::identity(3));
  CHECK(upper_factor(f) == DenseMatrix::identity(3));
  for (std::size_t i = 0; i < 3; ++i) CHECK(f.pivots[i] == i);
}

TEST_CASE("permutation matrix needs pivoting") {
  const DenseMatrix a{{0.0, 1.0}, {1.0, 0.0}};
  const auto f = lu_factor(a);
  CHECK(f.pivots[0] == 1);
  const Vector x = solve(a, Vector{2.0, 3.0});
  CHECK(x[0] == doctest::Approx(3.0));
  CHECK(x[1] == doctest::Approx(2.0));
  CHECK(determinant(f) == doctest::Approx(-1.0));
}

TEST_CASE("determinant of the two-stage Radau tableau") {
  const DenseMatrix a{{5.0 / 12.0, -1.0 / 12.0}, {3.0 / 4.0, 1.0 / 4.0}};
  CHECK(determinant(lu_factor(a)) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("singular input is rejected") {
  CHECK_THROWS_AS(lu_factor(DenseMatrix{{1.0, 2.0}, {2.0, 4.0}}), SingularMatrix);
  CHECK_THROWS_AS(lu_factor(DenseMatrix(2, 3)), InvalidArgument);
}

TEST_CASE("simple solves") {
  const Vector b{1.5, -2.0, 4.0};
  const Vector x = solve(DenseMatrix::identity(3), b);
  for (std::size_t i = 0; i < 3; ++i) CHECK(x[i] == b[i]);
  const Vector y = solve(DenseMatrix{{2.0, 0.0}, {0.0, 4.0}}, Vector{2.0, 4.0});
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(y[1] == doctest::Approx(1.0));
}

TEST_CASE("Vandermonde solve gives the N=1 Lagrange coefficients") {
  // rows: tau_k^0, tau_k^1 at tau = 1/3, 1; columns of the inverse are phi_p coefficients
  const DenseMatrix v{{1.0, 1.0 / 3.0}, {1.0, 1.0}};
  const DenseMatrix c = lu_solve(lu_factor(v), DenseMatrix::identity(2));
  CHECK(c(0, 0) == doctest::Approx(1.5));
  CHECK(c(1, 0) == doctest::Approx(-1.5));
  CHECK(c(0, 1) == doctest::Approx(-0.5));
  CHECK(c(1, 1) == doctest::Approx(1.5));
}

TEST_CASE("LU reconstructs random matrices") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const DenseMatrix a = random_matrix(rng, 5);
    const auto f = lu_factor(a);
    const DenseMatrix lu = multiply(lower_factor(f), upper_factor(f));
    CHECK(max_abs_diff(permuted(f, a), lu) <= 1e-12 * a.norm_inf());
  }
}

TEST_CASE("solve residual bound") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 7);
    const DenseMatrix a = random_matrix(rng, n);
    Vector b(n);
    for (auto& x : b) x = dist(rng);
    const Vector x = solve(a, b);
    const Vector ax = multiply(a, x);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(ax[i] - b[i]));
    CHECK(res <= 1e-10 * (a.norm_inf() * norm_inf(x) + norm_inf(b)));
  }
}

TEST_CASE("inverse and transpose") {
  const DenseMatrix a{{4.0, 1.0}, {2.0, 3.0}};
  const DenseMatrix prod = multiply(a, inverse(a));
  CHECK(max_abs_diff(prod, DenseMatrix::identity(2)) < 1e-15);
  const DenseMatrix t = transpose(DenseMatrix{{1.0, 2.0, 3.0}});
  CHECK(t.rows() == 3);
  CHECK(t(2, 0) == 3.0);
}

TEST_CASE("complex solves") {
  const ComplexVector rhs{Complex(1.0, 2.0), Complex(-1.0, 0.5)};
  const ComplexVector x = complex_solve(ComplexMatrix::identity(2), rhs);
  CHECK(std::abs(x[0] - rhs[0]) == 0.0);
  CHECK(std::abs(x[1] - rhs[1]) == 0.0);

  const ComplexVector s = complex_solve(ComplexMatrix{{Complex(2.0)}}, ComplexVector{Complex(1.0)});
  CHECK(std::abs(s[0] - 0.5) < 1e-15);

  // (I - zA) x = 1 with the N=1 Radau matrix and z = -1
  const Complex z(-1.0);
  const ComplexMatrix m{{1.0 - z * (5.0 / 12.0), z * (1.0 / 12.0)},
                        {-z * (3.0 / 4.0), 1.0 - z * (1.0 / 4.0)}};
  const ComplexVector y = complex_solve(m, ComplexVector{1.0, 1.0});
  CHECK(std::abs(y[0] - 8.0 / 11.0) < 1e-14);
  CHECK(std::abs(y[1] - 4.0 / 11.0) < 1e-14);
  const Complex r = 1.0 + z * (0.75 * y[0] + 0.25 * y[1]);
  CHECK(std::abs(r - 4.0 / 11.0) < 1e-14);
}

TEST_CASE("Gauss-Legendre rules") {
  const auto r1 = gauss_legendre_rule(1);
  CHECK(r1.nodes[0] == doctest::Approx(0.5));
  CHECK(r1.weights[0] == doctest::Approx(1.0));

  const auto r2 = gauss_legendre_rule(2);
  CHECK(r2.nodes[0] == doctest::Approx((3.0 - std::sqrt(3.0)) / 6.0).epsilon(1e-14));
  CHECK(r2.nodes[1] == doctest::Approx((3.0 + std::sqrt(3.0)) / 6.0).epsilon(1e-14));
  CHECK(r2.weights[0] == doctest::Approx(0.5));
  double cube = 0.0;
  for (std::size_t i = 0; i < 2; ++i) cube += r2.weights[i] * std::pow(r2.nodes[i], 3);
  CHECK(std::abs(cube - 0.25) < 1e-15);

  CHECK_THROWS_AS(gauss_legendre_rule(0), InvalidArgument);
}

TEST_CASE("Gauss-Legendre exactness up to degree 2n-1") {
  for (std::size_t n = 1; n <= 40; ++n) {
    const auto r = gauss_legendre_rule(n);
    for (std::size_t k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], double(k));
      CHECK(std::abs(s - 1.0 / double(k + 1)) <= 1e-13);
    }
  }
}

TEST_CASE("Legendre recurrence") {
  const auto p3 = legendre(3, 0.3);
  CHECK(p3.value == doctest::Approx(0.5 * (5 * 0.027 - 3 * 0.3)));
  CHECK(p3.derivative == doctest::Approx(0.5 * (15 * 0.09 - 3)));
  CHECK(legendre(0, 0.7).value == 1.0);
}
