#pragma once

#include "fracdiff/fields.hpp"
#include "fracdiff/kinetic_fv.hpp"
#include "fracdiff/model.hpp"
#include "fracdiff/velocity_grid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fracdiff {

struct DiscretizationConfig {
  int nx = 256;
  int nv = 257;
  VelocityLayout velocity_layout = VelocityLayout::LogPanels;
  std::string vmax_policy = "tail_mass";  // or "fixed"
  double v_max = 0.0;
  double tail_mass = 1e-8;
  std::string scheme_order = "spectral";  // "1" upwind, "2" MUSCL
  DtPolicy dt_policy = DtPolicy::Collision;
  double dt_factor = 0.01;
  double dt_fixed = 0.0;
  int diagnostic_count = 200;
  int record_count = 21;
  int images = 8;
  double macro_dt = 1e-3;

  bool operator==(const DiscretizationConfig&) const = default;
};

struct ExperimentConfig {
  std::vector<double> eps_list{0.4, 0.2, 0.1, 0.05};
  double t_final = 0.5;
  std::vector<double> snapshot_times;
  long particles = 0;  // 0: no Monte Carlo cross-check
  double mc_eps = 0.2;
  int mc_bins = 32;
  std::uint64_t seed = 20240611;
  std::string phi_choice = "gaussian";
  double phi_envelope = 0.5;
  ProfileKind rho0_profile = ProfileKind::Gaussian;
  double rho0_width = 1.0;
  double rho0_center = -1.0;

  bool operator==(const ExperimentConfig&) const = default;
};

struct OutputConfig {
  std::string dir = "out";
  std::vector<std::string> formats{"csv", "json"};

  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  ModelParams model;
  DiscretizationConfig discretization;
  ExperimentConfig experiment;
  OutputConfig output;

  bool operator==(const RunConfig&) const = default;
};

// Flat `section.key = value` text, `#` comments. Unknown or repeated keys
// and malformed values raise ConfigError with the line number; the model
// block is validated afterwards (ValidationError).
RunConfig parse_config(const std::string& text, const std::string& source = "<string>");
RunConfig load_config(const std::string& path);
std::string serialize(const RunConfig& config);
void validate(const RunConfig& config);

TransportScheme transport_scheme(const DiscretizationConfig& d);
InitialProfile initial_profile(const ExperimentConfig& e);
KineticOptions kinetic_options(const RunConfig& config);

} // namespace fracdiff
