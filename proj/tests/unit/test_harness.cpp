#include "doctest.h"

#include "fracdiff/errors.hpp"
#include "fracdiff/harness.hpp"
#include "fracdiff/io.hpp"

#include <cmath>

using namespace fracdiff;

namespace {

RunConfig small_config() {
  RunConfig c;
  c.discretization.nx = 32;
  c.discretization.nv = 65;
  c.discretization.diagnostic_count = 10;
  c.discretization.record_count = 3;
  c.discretization.images = 2;
  c.experiment.eps_list = {0.4};
  c.experiment.t_final = 0.05;
  c.experiment.mc_eps = 0.4;
  c.experiment.mc_bins = 8;
  return c;
}

} // namespace

TEST_CASE("log-log slope recovers power laws") {
  const std::vector<double> x{0.4, 0.2, 0.1, 0.05};
  std::vector<double> y;
  for (double e : x) y.push_back(3.0 * std::pow(e, 0.75));
  CHECK(loglog_slope(x, y) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK_THROWS_AS(loglog_slope({1.0}, {1.0}), InputError);
}

TEST_CASE("coercivity inequality on random discrete distributions") {
  ModelParams p;
  p.alpha = 0.8;
  p.beta = 0.25;
  p.nu0_delta = 0.3;
  const Model m(p);
  VelocityGridOptions vo;
  vo.nv = 129;
  const auto grid = make_velocity_grid(m, vo);
  const auto r = check_coercivity(m, grid, 200, 17);
  CHECK(r.samples == 200);
  CHECK(r.pass);
  CHECK(r.worst_dissipation <= 0.0);
  CHECK(r.constant == doctest::Approx(r.closed_form).epsilon(1e-8));
}

TEST_CASE("a-priori check needs diagnostics") {
  KineticRun empty;
  CHECK_THROWS_AS(check_apriori(empty), InputError);
  KineticRun run;
  run.f0_norm2 = 4.0;
  run.diagnostics.push_back({0.1, 0.5, 1.0, 1.0, 0.0, 1.9});
  const auto r = check_apriori(run);
  CHECK(r.max_gnorm_ratio == doctest::Approx(0.5));
  CHECK(r.rho_ratio == doctest::Approx(0.95));
  CHECK(r.pass);
}

TEST_CASE("corrector check: rates and identically zero terms") {
  const Model m(ModelParams{});
  const std::vector<double> eps{0.4, 0.2, 0.1};
  CHECK_THROWS_AS(check_correctors(m, {0.4, 0.2}, {{}, {}}), InputError);
  std::vector<CorrectorTerms> terms;
  const double g = m.gamma();
  for (double e : eps) terms.push_back({e, std::pow(e, g / 2), 0.0, std::pow(e, 1.0)});
  const auto c = check_correctors(m, eps, terms);
  CHECK(c.slope[0] == doctest::Approx(g / 2));
  CHECK(c.pass[0]);
  CHECK(c.identically_zero[1]);
  CHECK(c.pass[1]);
  CHECK_FALSE(c.identically_zero[2]);
}

TEST_CASE("single-eps sweep reports one row and no monotonicity verdict") {
  const auto rep = run_sweep(small_config(), SweepOptions{false, false});
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].failure.empty());
  CHECK(rep.rows[0].mass_error < 1e-9);
  for (const auto& v : rep.verdicts) CHECK(v.criterion.find("strictly decreasing") == std::string::npos);
  CHECK(rep.all_pass());
  const std::string csv = rep.convergence_csv();
  CHECK(csv.rfind("eps,", 0) == 0);
}

TEST_CASE("sweep output is deterministic for a fixed seed") {
  RunConfig c = small_config();
  c.experiment.eps_list = {0.4, 0.2};
  c.experiment.particles = 2000;
  const auto a = dump_json(run_sweep(c).to_json());
  const auto b = dump_json(run_sweep(c).to_json());
  CHECK(a == b);
  CHECK(a.find("\"schema_version\"") != std::string::npos);
}
