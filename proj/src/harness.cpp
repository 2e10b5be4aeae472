#include "fracdiff/harness.hpp"

#include "fracdiff/errors.hpp"
#include "fracdiff/io.hpp"
#include "fracdiff/nonlocal.hpp"
#include "fracdiff/rng.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <sstream>

namespace fracdiff {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InputError("slope fit needs at least two matching points");
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

AprioriResult check_apriori(const KineticRun& run, double tol) {
  if (run.diagnostics.empty()) throw InputError("a-priori check: run has no g-norm diagnostics");
  AprioriResult r;
  const double f0 = std::sqrt(run.f0_norm2);
  for (const auto& d : run.diagnostics) {
    if (d.bound > 0.0) r.max_gnorm_ratio = std::max(r.max_gnorm_ratio, d.gnorm2 / d.bound);
    r.rho_ratio = std::max(r.rho_ratio, d.rho_l2 / f0);
  }
  r.pass = r.max_gnorm_ratio <= 1.0 + tol && r.rho_ratio <= 1.0 + tol;
  return r;
}

CoercivityResult check_coercivity(const Model& model, const VelocityGrid& grid, int samples,
                                  std::uint64_t seed, double tol) {
  CoercivityResult r;
  r.samples = samples;
  r.constant = model.coercivity_constant();
  r.closed_form = model.coercivity_closed_form();
  r.worst_dissipation = -std::numeric_limits<double>::infinity();
  r.worst_boundedness = -std::numeric_limits<double>::infinity();
  const std::size_t nv = grid.size();
  std::vector<double> f(nv);
  for (int s = 0; s < samples; ++s) {
    CounterRng rng(seed, std::uint64_t(s));
    const double x = rng.uniform() * model.length();
    const double n0 = model.nu0(x);
    // Log-normal perturbations of F of random strength, sometimes with a
    // random overall shift of mass toward one side.
    const double spread = 2.0 * rng.uniform();
    const double tilt = rng.uniform() < 0.5 ? 0.0 : 2.0 * rng.normal();
    for (std::size_t j = 0; j < nv; ++j) {
      const double side = std::tanh(grid.v[j]);
      f[j] = grid.F[j] * std::exp(spread * rng.normal() + tilt * side);
    }
    double rho = 0.0, m = 0.0, energy = 0.0;
    for (std::size_t j = 0; j < nv; ++j) {
      rho += grid.w[j] * f[j];
      m += grid.w[j] * grid.b[j] * f[j];
      energy += grid.w[j] * n0 * grid.b[j] * f[j] * f[j] / grid.F[j];
    }
    // Q(f)_j = nu0 (p_j m - b_j f_j), the discrete rank-one collision operator.
    double lhs = 0.0, dev = 0.0;
    for (std::size_t j = 0; j < nv; ++j) {
      const double q = n0 * (grid.p[j] * m - grid.b[j] * f[j]);
      lhs += grid.w[j] * q * f[j] / grid.F[j];
      const double g = f[j] - rho * grid.F[j];
      dev += grid.w[j] * n0 * grid.b[j] * g * g / grid.F[j];
    }
    const double rhs = -dev / (2.0 * r.constant);
    r.worst_dissipation = std::max(r.worst_dissipation, (lhs - rhs) / energy);
    // ||Q+(f)/nu||^2_{nu/F} = nu0 m^2 / c_beta_h
    const double qplus = std::sqrt(n0 * m * m / grid.c_beta_h);
    r.worst_boundedness = std::max(r.worst_boundedness, (qplus - std::sqrt(energy)) / std::sqrt(energy));
  }
  r.pass = r.worst_dissipation <= tol && r.worst_boundedness <= tol &&
           std::abs(r.constant - r.closed_form) <= 1e-8 * r.closed_form;
  return r;
}

CorrectorCheck check_correctors(const Model& model, const std::vector<double>& eps,
                                const std::vector<CorrectorTerms>& terms, double slack) {
  if (eps.size() < 3 || terms.size() != eps.size())
    throw InputError("corrector slopes need at least three eps values");
  CorrectorCheck c;
  c.eps = eps;
  c.terms = terms;
  const double g = model.gamma(), b = model.beta();
  c.exponent[0] = std::min((2.0 - g) / 2.0, g / 2.0);
  c.exponent[1] = std::min(1.0 - g / 2.0, 1.0 / (1.0 - b));
  c.exponent[2] = std::min(2.0 - g, 1.0 / (1.0 - b));
  for (int k = 0; k < 3; ++k) {
    std::vector<double> y;
    for (const auto& t : terms) y.push_back(k == 0 ? t.step1 : k == 1 ? t.step2 : t.step3);
    // Zero up to round-off (e.g. Q+(g) when beta = 0, where int g dv = 0).
    c.identically_zero[k] =
        std::all_of(y.begin(), y.end(), [](double v) { return std::abs(v) <= 1e-12; });
    if (c.identically_zero[k]) {
      c.decreasing[k] = true;
      c.pass[k] = true;
      continue;
    }
    c.decreasing[k] = true;
    for (std::size_t i = 1; i < y.size(); ++i)
      if (!(std::abs(y[i]) < std::abs(y[i - 1]))) c.decreasing[k] = false;
    c.slope[k] = loglog_slope(eps, y);
    c.pass[k] = c.decreasing[k] && c.slope[k] >= c.exponent[k] - slack;
  }
  return c;
}

McCrossCheck mc_cross_check(const DensityField& det, const ParticleEnsemble& ensemble, int bins) {
  if (bins < 2 || det.grid.nx % bins != 0)
    throw InputError("MC cross-check: bins must divide the deterministic nx");
  McCrossCheck r;
  r.particles = long(ensemble.size());
  r.bins = bins;
  const double length = det.grid.length, hb = length / bins;
  const auto hist = estimate_density(ensemble, length, bins);
  const int per = det.grid.nx / bins;
  for (int k = 0; k < bins; ++k) {
    // The finite-volume values are cell averages, so the bin average is
    // their plain mean.
    double avg = 0.0;
    for (int i = k * per; i < (k + 1) * per; ++i) avg += det.values[i];
    avg /= per;
    const double prob = hist.values[k] * hb;
    r.mass += prob;
    const double se = std::sqrt(std::max(prob * (1.0 - prob), 1e-300) / double(r.particles)) / hb;
    const double z = std::abs(hist.values[k] - avg) / se;
    r.max_z = std::max(r.max_z, z);
    if (z > 3.0) ++r.outside;
  }
  r.pass = r.outside == 0;
  return r;
}

bool SweepReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

namespace {

nlohmann::json terms_json(const CorrectorTerms& t) {
  return {{"eps", t.eps}, {"step1", t.step1}, {"step2", t.step2}, {"step3", t.step3}};
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

} // namespace

nlohmann::json SweepReport::to_json(bool with_timing) const {
  nlohmann::json j = manifest("sweep_report", config);
  j["code_version"] = kCodeVersion;
  j["seed"] = config.experiment.seed;
  nlohmann::json rows_j = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json x;
    x["eps"] = r.eps;
    if (!r.failure.empty()) {
      x["failure"] = r.failure;
      rows_j.push_back(x);
      continue;
    }
    x["error_l2"] = r.error_l2;
    x["mass_error"] = r.mass_error;
    x["mass_drift_rate"] = r.mass_drift_rate;
    x["gnorm_bound_ratio"] = r.apriori.max_gnorm_ratio;
    x["rho_norm_ratio"] = r.apriori.rho_ratio;
    x["dt"] = r.dt;
    x["steps"] = r.steps;
    x["warnings"] = r.warnings;
    if (r.correctors) x["correctors"] = terms_json(*r.correctors);
    if (with_timing) x["wall_seconds"] = r.wall_seconds;
    rows_j.push_back(x);
  }
  j["rows"] = rows_j;
  if (mc) {
    j["mc_cross_check"] = {{"eps", mc->eps},       {"particles", mc->particles},
                           {"bins", mc->bins},     {"max_z", mc->max_z},
                           {"outside_3se", mc->outside}, {"mass", mc->mass},
                           {"pass", mc->pass}};
  }
  if (correctors) {
    nlohmann::json c;
    const char* names[] = {"step1", "step2", "step3"};
    for (int k = 0; k < 3; ++k) {
      c[names[k]] = {{"target_exponent", correctors->exponent[k]},
                     {"slope", correctors->slope[k]},
                     {"identically_zero", correctors->identically_zero[k]},
                     {"decreasing", correctors->decreasing[k]},
                     {"pass", correctors->pass[k]}};
    }
    c["note"] = "the estimate constants are unspecified; rates are checked by log-log slope";
    j["corrector_check"] = c;
  }
  nlohmann::json v = nlohmann::json::array();
  for (const auto& x : verdicts)
    v.push_back({{"criterion", x.criterion}, {"pass", x.pass}, {"detail", x.detail}});
  j["verdicts"] = v;
  if (with_timing) j["macro_wall_seconds"] = macro_wall_seconds;
  return j;
}

std::string SweepReport::convergence_csv() const {
  std::vector<std::vector<double>> table;
  for (const auto& r : rows) {
    if (!r.failure.empty()) continue;
    const auto t = r.correctors.value_or(CorrectorTerms{r.eps, 0.0, 0.0, 0.0});
    table.push_back({r.eps, r.error_l2, r.apriori.max_gnorm_ratio, r.apriori.rho_ratio,
                     r.mass_error, t.step1, t.step2, t.step3});
  }
  return table_csv({"eps", "error_l2", "gnorm_bound_ratio", "rho_norm_ratio", "mass_error",
                    "step1", "step2", "step3"},
                   table);
}

std::string SweepReport::gnuplot_script(const std::string& csv_name) const {
  std::ostringstream s;
  s << "# usage: gnuplot -p " << "convergence.gp\n"
    << "set datafile separator ','\n"
    << "set key top left\n"
    << "set logscale xy\n"
    << "set xlabel 'eps'\n"
    << "set ylabel 'L2 error at T'\n"
    << "plot '" << csv_name << "' using 1:2 skip 1 with linespoints title 'E(eps)'\n";
  return s.str();
}

SweepReport run_sweep(const RunConfig& config, const SweepOptions& opt) {
  validate(config);
  SweepReport rep;
  rep.config = config;
  const Model model(config.model);
  const SpatialGrid grid{config.discretization.nx, model.length()};
  const auto profile = initial_profile(config.experiment);
  const auto rho0 = profile.sample(grid);
  const double T = config.experiment.t_final;

  auto clock0 = std::chrono::steady_clock::now();
  const auto op = assemble(model, grid, config.discretization.images);
  MacroOptions mopt;
  mopt.dt = config.discretization.macro_dt;
  mopt.t_final = T;
  const auto macro = solve_macro(model, op, rho0, mopt);
  rep.macro_wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock0).count();

  std::unique_ptr<TestFunction> phi;
  if (opt.correctors)
    phi = make_test_function(config.experiment.phi_choice, model.length(),
                             config.experiment.phi_envelope);

  auto kopt = kinetic_options(config);
  if (phi) kopt.record_count = std::max(kopt.record_count, 2);
  std::optional<DensityField> mc_density;

  for (double eps : config.experiment.eps_list) {
    EpsRow row;
    row.eps = eps;
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto run = run_kinetic_det(model, kopt, eps);
      const auto rho = run.density();
      row.error_l2 = l2_distance(rho, macro.final_field);
      row.mass_error = std::abs(rho.mass() - 1.0);
      const double m0 = rho0.mass();
      for (const auto& d : run.diagnostics)
        row.mass_drift_rate = std::max(row.mass_drift_rate, std::abs(d.mass - m0) / T);
      row.apriori = check_apriori(run);
      row.dt = run.dt;
      row.steps = run.steps;
      row.warnings = run.warnings;
      if (phi) row.correctors = corrector_terms(model, *phi, run);
      if (eps == config.experiment.mc_eps) mc_density = rho;
    } catch (const std::exception& e) {
      row.failure = e.what();
    }
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rep.rows.push_back(std::move(row));
  }

  std::vector<const EpsRow*> ok;
  for (const auto& r : rep.rows)
    if (r.failure.empty()) ok.push_back(&r);

  for (const auto& r : rep.rows) {
    if (!r.failure.empty())
      rep.verdicts.push_back({"solver run at eps = " + fmt(r.eps), false, r.failure});
  }
  {
    bool pass = !ok.empty();
    std::string worst;
    double w = 0.0;
    for (const auto* r : ok) {
      if (!(r->mass_error < 1e-9)) pass = false;
      w = std::max(w, r->mass_error);
    }
    rep.verdicts.push_back({"C10 mass conservation |int rho - 1| < 1e-9", pass,
                            "max error " + fmt(w)});
  }
  {
    bool pass = !ok.empty();
    double w = 0.0;
    for (const auto* r : ok) {
      if (!r->apriori.pass) pass = false;
      w = std::max(w, r->apriori.max_gnorm_ratio);
    }
    rep.verdicts.push_back({"C7 a-priori bound ||g||^2 <= 1.05 M ||f0||^2 eps^gamma", pass,
                            "max ratio " + fmt(w)});
  }
  if (ok.size() >= 2) {
    bool pass = true;
    for (std::size_t i = 1; i < ok.size(); ++i)
      if (!(ok[i]->error_l2 < ok[i - 1]->error_l2)) pass = false;
    std::string detail = "E = ";
    for (std::size_t i = 0; i < ok.size(); ++i) detail += (i ? ", " : "") + fmt(ok[i]->error_l2);
    rep.verdicts.push_back({"C8 E(eps) strictly decreasing", pass, detail});
  }

  if (opt.mc && config.experiment.particles > 0) {
    const double eps = config.experiment.mc_eps;
    try {
      if (!mc_density) mc_density = run_kinetic_det(model, kopt, eps).density();
      auto ens = init_ensemble(model, profile, std::size_t(config.experiment.particles),
                               config.experiment.seed);
      advance(ens, model, T, eps);
      auto mc = mc_cross_check(*mc_density, ens, config.experiment.mc_bins);
      mc.eps = eps;
      rep.mc = mc;
      rep.verdicts.push_back({"C8 MC cross-check within 3 standard errors per bin", mc.pass,
                              "max z " + fmt(mc.max_z)});
    } catch (const std::exception& e) {
      rep.verdicts.push_back({"C8 MC cross-check within 3 standard errors per bin", false,
                              e.what()});
    }
  }

  if (phi) {
    std::vector<double> eps;
    std::vector<CorrectorTerms> terms;
    for (const auto* r : ok) {
      eps.push_back(r->eps);
      terms.push_back(*r->correctors);
    }
    if (eps.size() >= 3) {
      rep.correctors = check_correctors(model, eps, terms);
      const auto& c = *rep.correctors;
      rep.verdicts.push_back({"C9 Step-1 term slope >= target exponent - 0.15", c.pass[0],
                              c.identically_zero[0] ? "identically zero"
                                                    : "slope " + fmt(c.slope[0])});
      rep.verdicts.push_back({"C9 drift terms vanish or decay at the target rate",
                              c.pass[1] && c.pass[2],
                              "slopes " + fmt(c.slope[1]) + ", " + fmt(c.slope[2])});
    }
  }
  return rep;
}

} // namespace fracdiff
