#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace fracdiff {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre on [-1, 1] and Gauss-Laguerre for the weight e^{-u} on
// [0, inf). Both built by Golub-Welsch and cached per order.
const QuadratureRule& gauss_legendre(int n);
const QuadratureRule& gauss_laguerre(int n);

// Gauss-Legendre mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

// Composite Gauss-Legendre over `panels` equal panels of [a, b].
double integrate_panels(const std::function<double(double)>& f, double a,
                        double b, int panels, int order = 8);

// Adaptive Gauss-Kronrod on a finite interval.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double rel_tol = 1e-13,
                          double* error = nullptr);

// Adaptive quadrature on [a, inf) for integrands with algebraic or
// exponential decay.
double integrate_to_infinity(const std::function<double(double)>& f,
                             double a, double rel_tol = 1e-13,
                             double* error = nullptr);

} // namespace fracdiff
