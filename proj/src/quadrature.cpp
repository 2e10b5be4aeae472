#include "fracdiff/quadrature.hpp"

#include "fracdiff/errors.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>

namespace fracdiff {

namespace {

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix, weights
// are mu0 times the squared first eigenvector components.
QuadratureRule golub_welsch(const Eigen::VectorXd& diag,
                            const Eigen::VectorXd& sub, double mu0) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw NumericError("Golub-Welsch eigenvalue solve failed");
  const auto n = diag.size();
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    rule.nodes[k] = solver.eigenvalues()(k);
    const double v0 = solver.eigenvectors()(0, k);
    rule.weights[k] = mu0 * v0 * v0;
  }
  return rule;
}

// Newton polish of Legendre nodes on P_n; eigenvalue nodes carry errors of
// a few ulps times n, which the polish removes.
void polish_legendre(QuadratureRule& rule, int n) {
  for (std::size_t k = 0; k < rule.size(); ++k) {
    double x = rule.nodes[k];
    double dp = 1.0;
    for (int it = 0; it < 3; ++it) {
      double p0 = 1.0, p1 = x;
      for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      x -= p1 / dp;
    }
    rule.nodes[k] = x;
    rule.weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

std::mutex cache_mutex;

const QuadratureRule& cached(std::map<int, std::unique_ptr<QuadratureRule>>& cache,
                             int n, QuadratureRule (*build)(int)) {
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<QuadratureRule>(build(n));
  return *slot;
}

QuadratureRule build_legendre(int n) {
  if (n < 1) throw InputError("Gauss-Legendre order must be >= 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) sub(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  QuadratureRule rule = golub_welsch(diag, sub, 2.0);
  if (n > 1) polish_legendre(rule, n);
  return rule;
}

QuadratureRule build_laguerre(int n) {
  if (n < 1) throw InputError("Gauss-Laguerre order must be >= 1");
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int k = 0; k < n; ++k) diag(k) = 2.0 * k + 1.0;
  for (int k = 1; k < n; ++k) sub(k - 1) = k;
  QuadratureRule rule = golub_welsch(diag, sub, 1.0);
  // Tiny weights of the far nodes underflow in the eigenvector; they are
  // harmless but must not be negative zero noise.
  for (auto& w : rule.weights) w = std::max(w, 0.0);
  return rule;
}

} // namespace

const QuadratureRule& gauss_legendre(int n) {
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  return cached(cache, n, build_legendre);
}

const QuadratureRule& gauss_laguerre(int n) {
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  return cached(cache, n, build_laguerre);
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  const QuadratureRule& ref = gauss_legendre(n);
  QuadratureRule rule;
  rule.nodes.resize(ref.size());
  rule.weights.resize(ref.size());
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (std::size_t k = 0; k < ref.size(); ++k) {
    rule.nodes[k] = mid + half * ref.nodes[k];
    rule.weights[k] = half * ref.weights[k];
  }
  return rule;
}

double integrate_panels(const std::function<double(double)>& f, double a,
                        double b, int panels, int order) {
  const QuadratureRule& ref = gauss_legendre(order);
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double s = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k)
      s += ref.weights[k] * f(mid + 0.5 * h * ref.nodes[k]);
    total += 0.5 * h * s;
  }
  return total;
}

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double rel_tol, double* error) {
  double err = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          f, a, b, 15, rel_tol, &err);
  if (error) *error = err;
  return value;
}

double integrate_to_infinity(const std::function<double(double)>& f,
                             double a, double rel_tol, double* error) {
  boost::math::quadrature::exp_sinh<double> integrator;
  double err = 0.0;
  const double value = integrator.integrate(
      f, a, std::numeric_limits<double>::infinity(), rel_tol, &err);
  if (error) *error = err;
  return value;
}

} // namespace fracdiff
