#include "doctest.h"

#include "fracdiff/errors.hpp"
#include "fracdiff/velocity_grid.hpp"

#include <cmath>
#include <numeric>

using namespace fracdiff;

TEST_CASE("log-panel grid: size, symmetry and calibrated equilibrium") {
  const Model m(ModelParams{});
  const auto g = make_velocity_grid(m, {});
  CHECK(g.size() == 256);
  for (std::size_t j = 0; j < g.size(); ++j) CHECK(g.v[j] == -g.v[g.size() - 1 - j]);
  double mass = 0.0, pm = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    mass += g.w[j] * g.F[j];
    pm += g.w[j] * g.p[j];
  }
  CHECK(std::abs(mass - 1.0) < 1e-14);
  CHECK(std::abs(pm - 1.0) < 1e-14);
  CHECK(g.quadrature_defect < 1e-10);
  CHECK(g.tail_mass == doctest::Approx(1e-8).epsilon(1e-6));
  // Away from the lumped end nodes F is the pointwise density.
  for (std::size_t j = 1; j + 1 < g.size(); ++j)
    CHECK(g.F[j] == doctest::Approx(m.equilibrium_pdf(g.v[j])).epsilon(1e-9));
}

TEST_CASE("tail-mass rule for v_max") {
  ModelParams p;
  p.alpha = 0.5;
  const Model m(p);
  const double v = vmax_for_tail_mass(m, 1e-3);
  CHECK(2.0 * m.kappa() / m.alpha() * std::pow(v, -m.alpha()) == doctest::Approx(1e-3));
  CHECK(vmax_for_tail_mass(m, 1e-12) == 1e8);
}

TEST_CASE("compactified grid") {
  const Model m(ModelParams{});
  VelocityGridOptions opt;
  opt.layout = VelocityLayout::Compactified;
  opt.nv = 101;
  opt.v_max = 1e3;
  const auto g = make_velocity_grid(m, opt);
  CHECK(g.size() == 101);
  CHECK(g.v[50] == 0.0);
  CHECK(g.v_max == doctest::Approx(1e3));
  // Trapezoid across the jump of F at |v| = 1: first order in the spacing.
  CHECK(g.quadrature_defect < 3e-2);
  opt.nv = 100;
  CHECK_THROWS_AS(make_velocity_grid(m, opt), ConfigError);
  CHECK(parse_velocity_layout("compactified") == VelocityLayout::Compactified);
  CHECK(to_string(VelocityLayout::LogPanels) == "log_panels");
}
