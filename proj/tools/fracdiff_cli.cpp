#include "fracdiff/auxiliary.hpp"
#include "fracdiff/config.hpp"
#include "fracdiff/errors.hpp"
#include "fracdiff/harness.hpp"
#include "fracdiff/io.hpp"
#include "fracdiff/kinetic_fv.hpp"
#include "fracdiff/kinetic_mc.hpp"
#include "fracdiff/model.hpp"
#include "fracdiff/nonlocal.hpp"

#include "CLI11.hpp"

#include <omp.h>

#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>

using namespace fracdiff;

namespace {

struct Globals {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int threads = 0;
  bool quiet = false;
};

RunConfig load(const Globals& g) {
  RunConfig c = g.config_path.empty() ? RunConfig{} : load_config(g.config_path);
  if (!g.out_dir.empty()) c.output.dir = g.out_dir;
  if (g.seed >= 0) c.experiment.seed = std::uint64_t(g.seed);
  validate(c);
  return c;
}

bool wants(const RunConfig& c, const std::string& format) {
  for (const auto& f : c.output.formats)
    if (f == format) return true;
  return false;
}

std::string path_in(const RunConfig& c, const std::string& name) {
  ensure_directory(c.output.dir);
  return c.output.dir + "/" + name;
}

void say(const Globals& g, const std::string& text) {
  if (!g.quiet) std::cout << text << std::flush;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool strictly_decreasing(const std::vector<double>& y) {
  for (std::size_t i = 1; i < y.size(); ++i)
    if (!(y[i] < y[i - 1])) return false;
  return true;
}

int cmd_model_info(const Globals& g) {
  const auto c = load(g);
  const Model m(c.model);
  nlohmann::json j = manifest("model_info", c);
  j["gamma"] = m.gamma();
  j["core_height"] = m.core_height();
  j["c_beta"] = m.c_beta();
  j["c_negbeta"] = m.c_negbeta();
  j["nu1"] = m.nu1();
  j["nu2"] = m.nu2();
  j["first_moment"] = m.first_moment();
  j["coercivity_closed_form"] = m.coercivity_closed_form();
  nlohmann::json eps_rows = nlohmann::json::array();
  for (double eps : c.experiment.eps_list)
    eps_rows.push_back({{"eps", eps},
                        {"time_scale", m.time_scale(eps)},
                        {"drift", m.drift(eps)},
                        {"critical_speed", m.critical_speed(eps)}});
  j["per_eps"] = eps_rows;
  say(g, dump_json(j));
  return 0;
}

int cmd_kinetic_det(const Globals& g, double eps) {
  const auto c = load(g);
  const Model m(c.model);
  const auto run = run_kinetic_det(m, kinetic_options(c), eps);
  const auto apr = check_apriori(run);
  nlohmann::json j = manifest("kinetic_det", c);
  j["eps"] = eps;
  j["dt"] = run.dt;
  j["steps"] = run.steps;
  j["coercivity_constant"] = run.coercivity;
  j["gnorm_bound_ratio"] = apr.max_gnorm_ratio;
  j["rho_norm_ratio"] = apr.rho_ratio;
  j["final_mass"] = run.final_field.mass();
  j["warnings"] = run.warnings;
  if (wants(c, "csv")) {
    write_density_csv(path_in(c, "rho_det.csv"), run.density());
    write_text(path_in(c, "gnorm.csv"), diagnostics_csv(run.diagnostics));
    for (std::size_t k = 0; k < run.snapshots.size(); ++k)
      write_density_csv(path_in(c, "rho_det_snapshot_" + std::to_string(k) + ".csv"),
                        run.snapshots[k].density());
  }
  if (wants(c, "binary")) write_phase_binary(path_in(c, "phase_final.bin"), run.final_field);
  if (wants(c, "json")) write_json(path_in(c, "kinetic_det.json"), j);
  for (const auto& w : run.warnings) std::cerr << "warning: " << w << "\n";
  say(g, "kinetic-det eps=" + fmt(eps) + " steps=" + std::to_string(run.steps) +
             " gnorm/bound=" + fmt(apr.max_gnorm_ratio) + "\n");
  return apr.pass ? 0 : 1;
}

int cmd_kinetic_mc(const Globals& g, double eps, long particles, int bins, bool smooth) {
  const auto c = load(g);
  const Model m(c.model);
  const long n = particles > 0 ? particles : (c.experiment.particles > 0 ? c.experiment.particles
                                                                         : 100000);
  auto e = init_ensemble(m, initial_profile(c.experiment), std::size_t(n), c.experiment.seed);
  advance(e, m, c.experiment.t_final, eps);
  const auto rho = estimate_density(e, m.length(), bins, smooth);
  nlohmann::json j = manifest("kinetic_mc", c);
  j["eps"] = eps;
  j["particles"] = n;
  j["bins"] = bins;
  j["candidates"] = e.candidates;
  j["collisions"] = e.collisions;
  j["mass"] = rho.mass();
  if (wants(c, "csv")) write_density_csv(path_in(c, "rho_mc.csv"), rho);
  if (wants(c, "json")) write_json(path_in(c, "kinetic_mc.json"), j);
  say(g, "kinetic-mc eps=" + fmt(eps) + " particles=" + std::to_string(n) +
             " collisions=" + std::to_string(e.collisions) + "\n");
  return 0;
}

int cmd_chi_check(const Globals& g, std::vector<double> eps_list) {
  const auto c = load(g);
  const Model m(c.model);
  if (eps_list.empty()) eps_list = {0.2, 0.1, 0.05};
  const auto phi = make_test_function(c.experiment.phi_choice, m.length(),
                                      c.experiment.phi_envelope);
  std::vector<std::vector<double>> rows;
  std::vector<double> gap, gap_dt;
  bool bounded = true, sup_ok = true;
  for (double eps : eps_list) {
    const auto r = chi_gap_report(m, *phi, eps);
    rows.push_back({eps, r.gap, r.gap_dt, r.sup_bound_ok ? 1.0 : 0.0});
    gap.push_back(r.gap);
    gap_dt.push_back(r.gap_dt);
    const double ratio = m.nu2() / m.nu1();
    if (r.chi_norm2 > ratio * r.phi_norm2 * (1 + 1e-9) ||
        r.chi_dt_norm2 > ratio * r.phi_dt_norm2 * (1 + 1e-9))
      bounded = false;
    sup_ok = sup_ok && r.sup_bound_ok;
  }
  const bool dec = strictly_decreasing(gap) && strictly_decreasing(gap_dt);
  nlohmann::json j = manifest("chi_check", c);
  j["eps_list"] = eps_list;
  j["verdicts"] = {{"gaps_strictly_decreasing", dec},
                   {"norms_bounded_by_nu2_over_nu1", bounded},
                   {"pointwise_bound", sup_ok}};
  if (wants(c, "csv"))
    write_text(path_in(c, "chi_check.csv"), table_csv({"eps", "gap", "gap_dt", "sup_bound_ok"}, rows));
  if (wants(c, "json")) write_json(path_in(c, "chi_check.json"), j);
  say(g, dump_json(j["verdicts"]));
  return dec && bounded && sup_ok ? 0 : 1;
}

int cmd_kernel(const Globals& g) {
  const auto c = load(g);
  const Model m(c.model);
  const SpatialGrid grid{c.discretization.nx, m.length()};
  const KernelTable table(m, grid, c.discretization.images);
  std::ostringstream csv;
  for (int i = 0; i < grid.nx; ++i) {
    for (int k = 0; k < grid.nx; ++k) {
      const double v = table.value(i, k);
      require_finite(v, "kernel table");
      csv << (k ? "," : "") << v;
    }
    csv << "\n";
  }
  nlohmann::json j = manifest("kernel", c);
  j["gamma"] = m.gamma();
  j["eta_lower_bound"] = eta_lower_bound(m);
  j["eta_upper_bound"] = eta_upper_bound(m);
  j["layout"] = "row i, column j: eta(x_i, x_j), x_i = (i + 1/2) L / nx";
  if (wants(c, "csv")) write_text(path_in(c, "kernel.csv"), csv.str());
  if (wants(c, "json")) write_json(path_in(c, "kernel.json"), j);
  say(g, "kernel nx=" + std::to_string(grid.nx) + " written to " + c.output.dir + "\n");
  return 0;
}

int cmd_macro_solve(const Globals& g) {
  const auto c = load(g);
  const Model m(c.model);
  const SpatialGrid grid{c.discretization.nx, m.length()};
  const auto op = assemble(m, grid, c.discretization.images);
  const auto rho0 = initial_profile(c.experiment).sample(grid);
  MacroOptions mo;
  mo.dt = c.discretization.macro_dt;
  mo.t_final = c.experiment.t_final;
  mo.snapshot_times = c.experiment.snapshot_times;
  const auto sol = solve_macro(m, op, rho0, mo);
  nlohmann::json j = manifest("macro_solve", c);
  j["gamma"] = m.gamma();
  j["kappa"] = m.kappa();
  if (m.params().nu0_delta == 0.0) j["c_star"] = fourier_multiplier_constant(m);
  j["dt"] = mo.dt;
  j["nx"] = grid.nx;
  j["images"] = op.images;
  j["tail_bound"] = op.tail_bound;
  j["m_matrix"] = op.m_matrix;
  j["max_principle_excess"] = sol.max_principle_excess;
  j["warnings"] = sol.warnings;
  nlohmann::json files = nlohmann::json::array();
  if (wants(c, "csv")) {
    for (std::size_t k = 0; k < sol.snapshots.size(); ++k) {
      const std::string name = "rho_macro_snapshot_" + std::to_string(k) + ".csv";
      write_density_csv(path_in(c, name), sol.snapshots[k]);
      files.push_back({{"t", sol.snapshots[k].t}, {"file", name}});
    }
    write_density_csv(path_in(c, "rho_macro_final.csv"), sol.final_field);
    files.push_back({{"t", sol.final_field.t}, {"file", "rho_macro_final.csv"}});
  }
  j["snapshots"] = files;
  if (wants(c, "json")) write_json(path_in(c, "macro_solve.json"), j);
  for (const auto& w : sol.warnings) std::cerr << "warning: " << w << "\n";
  say(g, "macro-solve T=" + fmt(mo.t_final) + " mass=" + fmt(sol.final_field.mass()) + "\n");
  return 0;
}

int cmd_limit_check(const Globals& g, std::vector<double> eps_list, std::vector<double> xs,
                    double t) {
  const auto c = load(g);
  const Model m(c.model);
  if (eps_list.empty()) eps_list = {0.2, 0.1, 0.05, 0.025};
  if (xs.empty()) xs = {0.5 * m.length(), 0.52 * m.length(), 0.59 * m.length()};
  const auto phi = make_test_function(c.experiment.phi_choice, m.length(),
                                      c.experiment.phi_envelope);
  const TestSlice slice{phi.get(), t, false};
  std::vector<std::vector<double>> rows;
  bool pass = true;
  nlohmann::json points = nlohmann::json::array();
  for (double x : xs) {
    const double ref = -m.kappa() * apply_continuous(m, slice, x);
    std::vector<double> errs;
    for (double eps : eps_list) {
      const double lhs = operator_limit_lhs(m, *phi, eps, t, x);
      const double err = std::abs(lhs - ref);
      errs.push_back(err);
      rows.push_back({eps, t, x, lhs, ref, err, err / std::abs(ref)});
    }
    const bool dec = strictly_decreasing(errs);
    const double rel = errs.back() / std::abs(ref);
    pass = pass && dec && rel < 0.05;
    points.push_back({{"x", x}, {"reference", ref}, {"decreasing", dec}, {"final_rel_error", rel}});
  }
  nlohmann::json j = manifest("limit_check", c);
  j["t"] = t;
  j["points"] = points;
  j["pass"] = pass;
  if (wants(c, "csv"))
    write_text(path_in(c, "limit_check.csv"),
               table_csv({"eps", "t", "x", "lhs", "reference", "abs_error", "rel_error"}, rows));
  if (wants(c, "json")) write_json(path_in(c, "limit_check.json"), j);
  say(g, dump_json(points));
  return pass ? 0 : 1;
}

int cmd_sweep(const Globals& g, bool no_mc, bool no_correctors) {
  const auto c = load(g);
  SweepOptions opt;
  opt.mc = !no_mc;
  opt.correctors = !no_correctors;
  const auto rep = run_sweep(c, opt);
  if (wants(c, "json")) write_json(path_in(c, "report.json"), rep.to_json());
  if (wants(c, "csv")) write_text(path_in(c, "convergence.csv"), rep.convergence_csv());
  if (wants(c, "gnuplot")) write_text(path_in(c, "convergence.gp"), rep.gnuplot_script("convergence.csv"));
  for (const auto& v : rep.verdicts)
    say(g, std::string(v.pass ? "PASS " : "FAIL ") + v.criterion + " (" + v.detail + ")\n");
  return rep.all_pass() ? 0 : 1;
}

int cmd_invariants(const Globals& g) {
  const auto c = load(g);
  const Model m(c.model);
  std::vector<Verdict> out;

  const auto vg = make_velocity_grid(m, {});
  const auto coer = check_coercivity(m, vg, 1000, c.experiment.seed);
  out.push_back({"coercivity inequality and Q+ boundedness", coer.pass,
                 "worst " + fmt(coer.worst_dissipation) + ", M = " + fmt(coer.constant)});

  double asym = 0.0;
  CounterRng rng(c.experiment.seed, 77);
  for (int k = 0; k < 1000; ++k) {
    const double x = rng.uniform() * m.length(), y = rng.uniform() * m.length();
    asym = std::max(asym, std::abs(eta(m, x, y) - eta(m, y, x)));
  }
  out.push_back({"eta symmetric", asym <= 1e-12, "max |eta(x,y) - eta(y,x)| = " + fmt(asym)});

  const SpatialGrid grid{128, m.length()};
  const auto op = assemble(m, grid, c.discretization.images);
  const double rows = op.A.rowwise().sum().cwiseAbs().maxCoeff();
  const double sym = (op.A - op.A.transpose()).cwiseAbs().maxCoeff();
  out.push_back({"nonlocal row sums vanish", rows <= 1e-10, fmt(rows)});
  out.push_back({"nonlocal operator symmetric", sym <= 1e-10, fmt(sym)});

  const auto one = make_constant(1.0, m.length());
  double chi_err = 0.0, weight_err = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double eps = 0.01 + 0.99 * rng.uniform();
    const CorrectorEval ce(m, eps);
    const double x = rng.uniform() * m.length();
    const double v = std::sinh(8.0 * (rng.uniform() - 0.5));
    chi_err = std::max(chi_err, std::abs(ce.chi(*one, rng.uniform(), x, v) - 1.0));
    weight_err = std::max(weight_err, std::abs(ce.hazard_weight_integral(x, v) - 1.0));
  }
  out.push_back({"corrector of a constant is the constant", chi_err <= 1e-12, fmt(chi_err)});
  out.push_back({"hazard weight integrates to 1", weight_err <= 1e-12, fmt(weight_err)});

  auto ens = init_ensemble(m, initial_profile(c.experiment), 10000, c.experiment.seed);
  advance(ens, m, 0.1, 0.4);
  const auto hist = estimate_density(ens, m.length(), 64);
  long count = 0;
  for (double x : ens.x) count += (x >= 0.0 && x < m.length());
  out.push_back({"MC mass exact by count", count == long(ens.size()) &&
                                               std::abs(hist.mass() - 1.0) <= 1e-12,
                 fmt(hist.mass())});

  bool all = true;
  nlohmann::json j = manifest("invariants", c);
  nlohmann::json v = nlohmann::json::array();
  for (const auto& x : out) {
    all = all && x.pass;
    v.push_back({{"check", x.criterion}, {"pass", x.pass}, {"detail", x.detail}});
    say(g, std::string(x.pass ? "PASS " : "FAIL ") + x.criterion + " (" + x.detail + ")\n");
  }
  j["checks"] = v;
  if (wants(c, "json")) write_json(path_in(c, "invariants.json"), j);
  return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinetic equation with heavy-tail equilibrium and its fractional diffusion limit"};
  app.require_subcommand(1);
  // Global options may also follow the subcommand.
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "flat key = value configuration file");
  app.add_option("--out", g.out_dir, "output directory (overrides output.dir)");
  app.add_option("--seed", g.seed, "random seed (overrides experiment.seed)");
  app.add_option("--threads", g.threads, "OpenMP threads (0: runtime default)");
  app.add_flag("--quiet", g.quiet, "suppress stdout summaries");

  auto* info = app.add_subcommand("model-info", "derived constants of the model");

  double eps = 0.2;
  auto* det = app.add_subcommand("kinetic-det", "deterministic kinetic solve at one eps");
  det->add_option("--eps", eps, "Knudsen number");

  long particles = 0;
  int bins = 64;
  bool smooth = false;
  auto* mc = app.add_subcommand("kinetic-mc", "Monte Carlo particle solve at one eps");
  mc->add_option("--eps", eps, "Knudsen number");
  mc->add_option("--particles", particles, "particle count (default: experiment.particles)");
  mc->add_option("--bins", bins, "histogram bins");
  mc->add_flag("--smooth", smooth, "linear sharing between neighbouring bins");

  std::vector<double> eps_list;
  auto* chi = app.add_subcommand("chi-check", "corrector gaps over an eps list");
  chi->add_option("--eps-list", eps_list, "eps values")->delimiter(',');

  auto* kernel = app.add_subcommand("kernel", "dump eta(x_i, x_j) as a CSV matrix");
  auto* macro = app.add_subcommand("macro-solve", "Crank-Nicolson solve of the limit equation");

  std::vector<double> xs;
  double t = 0.25;
  auto* limit = app.add_subcommand("limit-check", "operator limit against the nonlocal operator");
  limit->add_option("--eps-list", eps_list, "eps values")->delimiter(',');
  limit->add_option("--x", xs, "sample positions")->delimiter(',');
  limit->add_option("--t", t, "sample time");

  bool no_mc = false, no_correctors = false;
  auto* sweep = app.add_subcommand("sweep", "eps sweep with convergence verdicts");
  sweep->add_flag("--no-mc", no_mc, "skip the Monte Carlo cross-check");
  sweep->add_flag("--no-correctors", no_correctors, "skip the corrector terms");

  auto* inv = app.add_subcommand("invariants", "structural invariants of all modules");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (g.threads > 0) omp_set_num_threads(g.threads);

  try {
    if (*info) return cmd_model_info(g);
    if (*det) return cmd_kinetic_det(g, eps);
    if (*mc) return cmd_kinetic_mc(g, eps, particles, bins, smooth);
    if (*chi) return cmd_chi_check(g, eps_list);
    if (*kernel) return cmd_kernel(g);
    if (*macro) return cmd_macro_solve(g);
    if (*limit) return cmd_limit_check(g, eps_list, xs, t);
    if (*sweep) return cmd_sweep(g, no_mc, no_correctors);
    if (*inv) return cmd_invariants(g);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "invalid parameters: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
