#include "doctest.h"

#include "fracdiff/errors.hpp"
#include "fracdiff/nonlocal.hpp"
#include "fracdiff/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace fracdiff;

namespace {

ModelParams with(double alpha, double beta, double delta) {
  ModelParams p;
  p.alpha = alpha;
  p.beta = beta;
  p.nu0_delta = delta;
  return p;
}

Eigen::VectorXd cosine(const SpatialGrid& g, int k) {
  Eigen::VectorXd e(g.nx);
  for (int i = 0; i < g.nx; ++i) e[i] = std::cos(2 * std::numbers::pi * k * g.x(i) / g.length);
  return e;
}

} // namespace

TEST_CASE("eta for constant nu0 is the gamma moment of the flight law") {
  for (double nbar : {0.5, 1.0, 2.0}) {
    ModelParams p = with(0.8, 0.25, 0.0);
    p.nu0_mean = nbar;
    const Model m(p);
    const double g = m.gamma();
    const double oracle = integrate_to_infinity(
        [&](double z) { return nbar * nbar * std::pow(z, g) * std::exp(-nbar * z); }, 0.0,
        1e-13);
    CHECK(eta(m, 1.0, 7.0) == doctest::Approx(oracle).epsilon(1e-9));
  }
  // gamma = 1: alpha = 1, beta = 0 gives eta = 1.
  CHECK(eta(Model(with(1.0, 0.0, 0.0)), 2.0, 5.0) == doctest::Approx(1.0));
}

TEST_CASE("eta is symmetric and within its bounds") {
  const Model m(with(1.5, 0.25, 0.4));
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  const double lo = eta_lower_bound(m), hi = eta_upper_bound(m);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(gen), y = u(gen);
    const double a = eta(m, x, y);
    CHECK(a == doctest::Approx(eta(m, y, x)).epsilon(1e-13));
    CHECK(a >= lo * (1 - 1e-13));
    CHECK(a <= hi * (1 + 1e-13));
  }
  CHECK(eta_offset(m, 3.0, 1e-9) == doctest::Approx(eta(m, 3.0, 3.0)).epsilon(1e-8));
}

TEST_CASE("fractional constant by quadrature and in closed form") {
  CHECK(fractional_constant(1.0) == doctest::Approx(std::numbers::pi).epsilon(1e-12));
  for (double g : {0.2, 0.5, 0.9, 1.3, 1.8})
    CHECK(fractional_constant(g) ==
          doctest::Approx(fractional_constant_closed_form(g)).epsilon(1e-10));
  CHECK_THROWS_AS(fractional_constant(2.0), ValidationError);
  CHECK_THROWS_AS(fractional_constant(0.0), ValidationError);
  CHECK_THROWS_AS(fourier_multiplier_constant(Model(with(1.5, 0.0, 0.2))), ValidationError);
}

TEST_CASE("lattice weights are exact on quadratics") {
  // For rho = s^2 the rule must reproduce int_0^N s^{1-g} ds, up to the
  // last half-hat and the curvature defect beyond N (~ N^{-g} / (6 g)).
  const int N = 2000;
  const auto& q = gauss_legendre(30);
  for (double g : {0.5, 1.0, 1.5}) {
    double mu = 0.0;
    const auto w = lattice_weights(g, N, &mu);
    double s = 0.0;
    for (int n = 1; n <= N; ++n) s += w[n] * double(n) * n;
    double half_hat = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      const double t = 0.5 * (1.0 + q.nodes[k]);
      half_hat += 0.5 * q.weights[k] * (1.0 - t) * std::pow(N + t, -1.0 - g);
    }
    const double target =
        std::pow(double(N), 2.0 - g) / (2.0 - g) - std::pow(double(N), -g) / (6.0 * g);
    CHECK((s - double(N) * N * half_hat) / target == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(w[2] > 0.0);
  }
}

TEST_CASE("assembled operator: conservation, symmetry, spectrum") {
  const Model m(with(1.5, 0.0, 0.0));
  const SpatialGrid grid{512, m.length()};
  const auto op = assemble(m, grid, 8);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(grid.nx);
  CHECK((op.A * ones).cwiseAbs().maxCoeff() < 1e-9 * op.A.diagonal().maxCoeff());
  CHECK((op.A - op.A.transpose()).cwiseAbs().maxCoeff() < 1e-12 * op.A.diagonal().maxCoeff());
  CHECK(op.m_matrix);
  CHECK(op.tail_bound > 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.A, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() > -1e-8);

  const double cstar = fourier_multiplier_constant(m);
  for (int k = 1; k <= 10; ++k) {
    const Eigen::VectorXd e = cosine(grid, k);
    const double lam = e.dot(op.A * e) / e.dot(e);
    const double exact = cstar * std::pow(2 * std::numbers::pi * k / m.length(), m.gamma());
    CHECK(std::abs(lam / exact - 1.0) < 1e-2);
  }
  CHECK_THROWS_AS(assemble(m, SpatialGrid{8, m.length()}, 8), ValidationError);
  CHECK_THROWS_AS(assemble(m, grid, 0), ValidationError);
  CHECK_THROWS_AS(assemble(m, SpatialGrid{64, 10.0}, 8), ValidationError);
}

TEST_CASE("discrete operator converges to the continuous one under refinement") {
  const Model m(with(1.2, 0.2, 0.3));
  auto phi = make_gaussian_bump(m.length(), 10.0, 1.0, 0.0);
  const TestSlice slice{phi.get(), 0.0, false};
  double prev = 1e300;
  for (int nx : {64, 128, 256}) {
    const SpatialGrid grid{nx, m.length()};
    const auto op = assemble(m, grid, 8);
    Eigen::VectorXd v(nx);
    for (int i = 0; i < nx; ++i) v[i] = slice(grid.x(i));
    const Eigen::VectorXd Av = op.A * v;
    double err = 0.0;
    for (int i = 0; i < nx; i += nx / 8)
      err = std::max(err, std::abs(Av[i] - apply_continuous(m, slice, grid.x(i))));
    // Second order in h.
    CHECK(err < 0.35 * prev);
    prev = err;
  }
  CHECK(prev < 5e-3);
}

TEST_CASE("continuous and Fourier evaluations agree for constant nu0") {
  const Model m(with(0.8, 0.25, 0.0));
  auto phi = make_gaussian_bump(m.length(), 10.0, 1.5, 0.0);
  const TestSlice slice{phi.get(), 0.0, false};
  for (double x : {10.0, 11.2, 4.0})
    CHECK(apply_continuous(m, slice, x) ==
          doctest::Approx(apply_fourier(m, slice, x)).epsilon(1e-6).scale(1e-8));
}

TEST_CASE("macro solver against the Fourier reference") {
  const Model m(with(1.5, 0.0, 0.0));
  const SpatialGrid grid{256, m.length()};
  const auto op = assemble(m, grid, 8);
  const DensityField rho0 = InitialProfile{}.sample(grid);

  const DensityField ref0 = fourier_reference(m, rho0, 0.0);
  CHECK(l2_distance(ref0, rho0) < 1e-12);
  CHECK(fourier_reference(m, rho0, 0.5).mass() == doctest::Approx(rho0.mass()).epsilon(1e-12));

  MacroOptions mo;
  mo.t_final = 0.5;
  mo.snapshot_times = {0.25};
  const auto sol = solve_macro(m, op, rho0, mo);
  const auto ref = fourier_reference(m, rho0, 0.5);
  CHECK(l2_distance(sol.final_field, ref) / ref.l2_norm() < 1e-3);
  CHECK(std::abs(sol.final_field.mass() - rho0.mass()) < 1e-10);
  CHECK(sol.snapshots.size() == 1);
  CHECK(sol.max_principle_excess < 1e-10);
  for (std::size_t k = 1; k < sol.energy.size(); ++k) CHECK(sol.energy[k] <= sol.energy[k - 1]);
  CHECK(sol.warnings.empty());

  MacroOptions bad = mo;
  bad.snapshot_times = {0.7};
  CHECK_THROWS_AS(solve_macro(m, op, rho0, bad), ValidationError);
}

TEST_CASE("variable nu0: self-adjoint, conservative, bounded kernel") {
  const Model m(with(0.8, 0.25, 0.4));
  const SpatialGrid grid{128, m.length()};
  const auto op = assemble(m, grid, 6);
  std::mt19937_64 gen(9);
  std::normal_distribution<double> n;
  Eigen::VectorXd a(grid.nx), b(grid.nx);
  for (int i = 0; i < grid.nx; ++i) {
    a[i] = n(gen);
    b[i] = n(gen);
  }
  CHECK(a.dot(op.A * b) == doctest::Approx(b.dot(op.A * a)).epsilon(1e-12));
  CHECK(std::abs(Eigen::VectorXd::Ones(grid.nx).dot(op.A * a)) <
        1e-10 * op.A.diagonal().maxCoeff());
  CHECK(a.dot(op.A * a) >= 0.0);
  const KernelTable table(m, grid, 6);
  CHECK(table.value(3, 40, 2) == doctest::Approx(eta(m, grid.x(3), grid.x(40) + 2 * m.length())));
  CHECK(table.value(5, 5) == doctest::Approx(eta(m, grid.x(5), grid.x(5))));
}
