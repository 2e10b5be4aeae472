#pragma once

#include "fracdiff/auxiliary.hpp"
#include "fracdiff/config.hpp"
#include "fracdiff/kinetic_fv.hpp"
#include "fracdiff/kinetic_mc.hpp"
#include "fracdiff/model.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fracdiff {

inline constexpr const char* kCodeVersion = "fracdiff 1.0.0";

struct Verdict {
  std::string criterion;
  bool pass = false;
  std::string detail;
};

// Least-squares slope of log|y| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct AprioriResult {
  double max_gnorm_ratio = 0.0;  // max_t ||g||^2 / (M ||f0||^2 eps^gamma)
  double rho_ratio = 0.0;        // max_t ||rho|| / ||f0||
  bool pass = false;
};

// Throws InputError when the run carries no diagnostics.
AprioriResult check_apriori(const KineticRun& run, double tol = 0.05);

struct CoercivityResult {
  int samples = 0;
  double constant = 0.0;        // M from the grid supremum
  double closed_form = 0.0;
  double worst_dissipation = 0.0;  // max of lhs - rhs over samples (<= 0 passes)
  double worst_boundedness = 0.0;  // max of ||Q+(f)/nu|| - ||f||
  bool pass = false;
};

// Random nonnegative discrete f on the velocity grid at random x: checks
// int Q(f) f / F <= -(1/2M) ||f - rho F||^2_{nu/F} and the boundedness of
// Q+ / nu, both at absolute-relative tolerance tol.
CoercivityResult check_coercivity(const Model& model, const VelocityGrid& grid, int samples,
                                  std::uint64_t seed, double tol = 1e-10);

struct CorrectorCheck {
  std::vector<double> eps;
  std::vector<CorrectorTerms> terms;
  double exponent[3] = {0, 0, 0};  // expected rates for Step 1, 2, 3
  double slope[3] = {0, 0, 0};
  bool identically_zero[3] = {false, false, false};  // |term| <= 1e-12 throughout
  bool decreasing[3] = {false, false, false};
  bool pass[3] = {false, false, false};
};

// Slope and monotonicity checks on the three corrector terms. Needs at
// least three eps values (InputError otherwise).
CorrectorCheck check_correctors(const Model& model, const std::vector<double>& eps,
                                const std::vector<CorrectorTerms>& terms, double slack = 0.15);

struct McCrossCheck {
  double eps = 0.0;
  long particles = 0;
  int bins = 0;
  double max_z = 0.0;  // max |det - mc| / standard error
  int outside = 0;     // bins beyond 3 standard errors
  double mass = 0.0;   // histogram mass (exactly 1 by count)
  bool pass = false;
};

// Compares bin averages of a deterministic density (nx divisible by bins)
// with the histogram of the ensemble.
McCrossCheck mc_cross_check(const DensityField& det, const ParticleEnsemble& ensemble,
                            int bins);

struct EpsRow {
  double eps = 0.0;
  double error_l2 = 0.0;  // ||rho^eps(T) - rho(T)||
  double mass_error = 0.0;
  double mass_drift_rate = 0.0;  // max |mass(t) - mass(0)| / T
  AprioriResult apriori;
  std::optional<CorrectorTerms> correctors;
  double dt = 0.0;
  long steps = 0;
  std::vector<std::string> warnings;
  std::string failure;
  double wall_seconds = 0.0;
};

struct SweepReport {
  RunConfig config;
  std::vector<EpsRow> rows;
  std::optional<McCrossCheck> mc;
  std::optional<CorrectorCheck> correctors;
  std::vector<Verdict> verdicts;
  double macro_wall_seconds = 0.0;

  bool all_pass() const;
  // Deterministic for a given config and seed unless with_timing is set.
  nlohmann::json to_json(bool with_timing = false) const;
  std::string convergence_csv() const;
  std::string gnuplot_script(const std::string& csv_name) const;
};

struct SweepOptions {
  bool correctors = true;  // evaluate the corrector terms (needs records)
  bool mc = true;          // Monte Carlo cross-check when particles > 0
};

SweepReport run_sweep(const RunConfig& config, const SweepOptions& opt = {});

} // namespace fracdiff
