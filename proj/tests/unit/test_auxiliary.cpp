#include "doctest.h"

#include "fracdiff/auxiliary.hpp"
#include "fracdiff/errors.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace fracdiff;

namespace {

// Flight average of cos(k y) at constant rate n: Re[e^{ikx} n / (n - i k c)].
double cos_flight_average(double k, double x, double c, double n) {
  using namespace std::complex_literals;
  return std::real(std::exp(1i * k * x) * n / (n - 1i * k * c));
}

} // namespace

TEST_CASE("corrector of a constant is the constant, in both regimes") {
  ModelParams p;
  p.nu0_delta = 0.4;
  p.beta = 0.3;
  p.alpha = 1.2;
  const Model m(p);
  auto one = make_constant(1.0, m.length());
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> ux(0.0, m.length()), uv(-8.0, 8.0);
  for (double eps : {0.5, 0.05}) {
    CorrectorEval ce(m, eps);
    CHECK(ce.laguerre_weight_sum() == doctest::Approx(1.0).epsilon(1e-14));
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      const double x = ux(gen), v = std::sinh(uv(gen));
      worst = std::max(worst, std::abs(ce.chi(*one, 0.0, x, v) - 1.0));
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("plane waves match the closed-form flight average") {
  ModelParams p;
  p.alpha = 0.8;
  const Model m(p);
  auto wave = make_plane_wave(m.length(), 3);
  const double k = 2 * std::numbers::pi * 3 / m.length();
  for (double eps : {0.3, 0.02}) {
    CorrectorEval ce(m, eps);
    for (double v : {-2000.0, -35.0, -1.5, -0.3, 0.0, 0.7, 4.0, 90.0, 1e5}) {
      for (double x : {0.4, 7.7, 15.2}) {
        const double c = ce.flight_speed(v);
        CHECK(ce.chi(*wave, 0.0, x, v) ==
              doctest::Approx(cos_flight_average(k, x, c, 1.0)).epsilon(1e-10).scale(1.0));
      }
    }
  }
}

TEST_CASE("affine functions are reproduced exactly on the line") {
  ModelParams p;
  p.alpha = 1.5;
  const Model m(p);
  auto affine = make_affine(0.7, -0.4);
  CorrectorEval ce(m, 0.25);
  for (double v : {-3.0, -0.5, 0.2, 11.0}) {
    const double c = ce.flight_speed(v);
    CHECK(ce.flight_speed(v) == doctest::Approx(0.25 * v));
    CHECK(ce.chi(*affine, 0.0, 1.3, v) == doctest::Approx(0.7 - 0.4 * (1.3 + c)).epsilon(1e-13));
  }
}

TEST_CASE("hazard weights integrate to one") {
  ModelParams p;
  p.nu0_delta = 0.5;
  p.beta = 0.2;
  p.alpha = 0.9;
  const Model m(p);
  CorrectorEval ce(m, 0.1);
  for (double x : {0.0, 3.1, 12.5})
    for (double v : {-40.0, -1.0, 0.5, 6.0, 3e3})
      CHECK(ce.hazard_weight_integral(x, v) == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(ce.hazard(2.0, 0.0, 3.0) == doctest::Approx(3.0 * m.nu0(2.0)));
  CHECK(ce.hazard(2.0, 1.5, 4.0) == doctest::Approx(m.nu0_integral(2.0, 8.0) / 1.5).epsilon(1e-13));
}

TEST_CASE("row evaluation agrees with pointwise evaluation") {
  ModelParams p;
  p.nu0_delta = 0.3;
  const Model m(p);
  auto phi = make_gaussian_bump(m.length(), 10.0, 1.0, 0.0);
  const TestSlice slice{phi.get(), 0.0, false};
  const SpatialGrid grid{64, m.length()};
  CorrectorEval ce(m, 0.2);
  for (double v : {-500.0, -8.0, -0.4, 0.0, 2.0, 30.0, 2e4}) {
    const auto row = ce.chi_row(slice, grid, v);
    double worst = 0.0;
    for (int i = 0; i < grid.nx; ++i)
      worst = std::max(worst, std::abs(row[i] - ce.chi(slice, grid.x(i), v)));
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("large-speed limit is the weighted torus average") {
  ModelParams p;
  p.nu0_delta = 0.3;
  const Model m(p);
  auto phi = make_gaussian_bump(m.length(), 10.0, 1.0, 0.0);
  const TestSlice slice{phi.get(), 0.0, false};
  CorrectorEval ce(m, 1.0);
  const double lim = chi_limit_value(m, slice);
  CHECK(ce.chi(slice, 4.0, 1e9) == doctest::Approx(lim).epsilon(1e-6));
  CHECK(ce.chi(slice, 13.0, -1e9) == doctest::Approx(lim).epsilon(1e-6));
}

TEST_CASE("continuous velocity quadrature integrates the equilibrium") {
  ModelParams p;
  p.alpha = 0.8;
  p.beta = 0.25;
  const Model m(p);
  const auto q = continuous_velocity_quadrature(m, 0.1);
  double mass = 0.0, nu_mass = 0.0;
  for (std::size_t k = 0; k < q.v.size(); ++k) {
    mass += q.w[k] * m.equilibrium_pdf(q.v[k]);
    nu_mass += q.w[k] * bracket_pow(q.v[k], m.beta()) * m.equilibrium_pdf(q.v[k]);
  }
  mass += 2.0 * m.kappa() * std::pow(q.v_cut, -m.alpha()) / m.alpha();
  nu_mass += 2.0 * m.kappa() * std::pow(q.v_cut, m.beta() - m.alpha()) / (m.alpha() - m.beta());
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(nu_mass == doctest::Approx(m.c_beta()).epsilon(1e-10));
}

TEST_CASE("chi gaps shrink with eps and respect the pointwise bound") {
  const Model m(ModelParams{});
  auto phi = make_gaussian_bump(m.length(), 10.0, 1.0, 1.0);
  GapOptions go;
  go.nx = 128;
  const auto a = chi_gap_report(m, *phi, 0.4, go);
  const auto b = chi_gap_report(m, *phi, 0.1, go);
  CHECK(b.gap < a.gap);
  CHECK(b.gap_dt < a.gap_dt);
  CHECK(a.chi_norm2 <= a.phi_norm2 * (1.0 + 1e-9));
  CHECK(a.sup_bound_ok);
  CHECK(b.sup_bound_ok);
  auto line = make_affine(1.0, 1.0);
  CHECK_THROWS_AS(chi_gap_report(m, *line, 0.1, go), InputError);
  auto forever = make_gaussian_bump(m.length(), 10.0, 1.0, 0.0);
  CHECK_THROWS_AS(chi_gap_report(m, *forever, 0.1, go), InputError);
}

TEST_CASE("small velocities contribute at order eps squared") {
  ModelParams p;
  p.nu0_delta = 0.2;
  const Model m(p);
  auto phi = make_gaussian_bump(m.length(), 10.0, 1.0, 0.0);
  const double x = 10.6;
  const double c0 = std::abs(small_velocity_part(m, *phi, 0.2, 0.0, x)) / 0.04;
  CHECK(c0 > 0.0);
  for (double eps : {0.1, 0.05, 0.025})
    CHECK(std::abs(small_velocity_part(m, *phi, eps, 0.0, x)) <= 1.5 * c0 * eps * eps);
}

TEST_CASE("operator limit vanishes on constants") {
  ModelParams p;
  p.nu0_delta = 0.3;
  p.alpha = 0.5;
  const Model m(p);
  auto one = make_constant(2.0, m.length());
  for (double eps : {0.2, 0.05})
    CHECK(std::abs(operator_limit_lhs(m, *one, eps, 0.0, 6.0)) < 1e-9);
}

TEST_CASE("corrector terms vanish at equilibrium and need records") {
  const Model m(ModelParams{});
  auto phi = make_gaussian_bump(m.length(), 10.0, 1.0, 0.5);
  VelocityGridOptions vo;
  vo.nv = 65;
  auto vg = make_shared_velocity_grid(m, vo);
  const SpatialGrid grid{32, m.length()};
  InitialProfile prof;
  KineticRun run;
  run.eps = 0.2;
  for (double t : {0.0, 0.25, 0.5}) {
    DensityField rho = prof.sample(grid);
    rho.t = t;
    run.records.push_back(PhaseField::local_equilibrium(rho, vg));
  }
  const auto terms = corrector_terms(m, *phi, run);
  CHECK(std::abs(terms.step1) < 1e-14);
  CHECK(std::abs(terms.step2) < 1e-14);
  CHECK(std::abs(corrector_term_Qplus(m, *phi, run)) < 1e-14);
  run.records.resize(1);
  CHECK_THROWS_AS(corrector_terms(m, *phi, run), InputError);
}
