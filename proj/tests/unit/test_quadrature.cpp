#include "doctest.h"

#include "fracdiff/quadrature.hpp"

#include <cmath>
#include <numbers>

using namespace fracdiff;

TEST_CASE("Gauss-Legendre integrates polynomials up to degree 2n-1") {
  for (int n : {4, 8, 16, 20}) {
    const auto& q = gauss_legendre(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * std::pow(q.nodes[i], k);
      const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("mapped Gauss-Legendre rule") {
  const auto q = gauss_legendre(12, 1.0, 3.0);
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * q.nodes[i] * q.nodes[i];
  CHECK(s == doctest::Approx(26.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("Gauss-Laguerre reproduces the moments k!") {
  const auto& q = gauss_laguerre(16);
  double fact = 1.0;
  for (int k = 0; k <= 20; ++k) {
    if (k > 0) fact *= k;
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * std::pow(q.nodes[i], k);
    CHECK(s == doctest::Approx(fact).epsilon(1e-11));
  }
  double w = 0.0;
  for (double x : gauss_laguerre(64).weights) w += x;
  CHECK(std::abs(w - 1.0) < 1e-14);
}

TEST_CASE("adaptive and semi-infinite quadrature") {
  CHECK(integrate_adaptive([](double x) { return std::sin(x); }, 0.0, std::numbers::pi) ==
        doctest::Approx(2.0).epsilon(1e-13));
  CHECK(integrate_to_infinity([](double x) { return std::exp(-x); }, 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(integrate_to_infinity([](double x) { return std::pow(x, -2.5); }, 1.0) ==
        doctest::Approx(1.0 / 1.5).epsilon(1e-10));
  CHECK(integrate_panels([](double x) { return std::exp(x); }, 0.0, 1.0, 4) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
}
