#pragma once

#include "fracdiff/fields.hpp"
#include "fracdiff/model.hpp"
#include "fracdiff/velocity_grid.hpp"

#include <memory>
#include <string>
#include <vector>

namespace fracdiff {

// f(x_i, v_j), stored x-major: value(i, j) = data[i * nv + j].
class PhaseField {
public:
  PhaseField() = default;
  PhaseField(const SpatialGrid& grid, std::shared_ptr<const VelocityGrid> vgrid,
             double t = 0.0);

  int nx() const { return grid_.nx; }
  int nv() const { return static_cast<int>(vgrid_->size()); }
  const SpatialGrid& grid() const { return grid_; }
  const VelocityGrid& velocity() const { return *vgrid_; }
  std::shared_ptr<const VelocityGrid> velocity_ptr() const { return vgrid_; }

  double& operator()(int i, int j) { return data_[std::size_t(i) * nv() + j]; }
  double operator()(int i, int j) const { return data_[std::size_t(i) * nv() + j]; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double t = 0.0;

  // rho_i = sum_j w_j f_ij
  DensityField density() const;
  double mass() const;
  double min_value() const;

  // f = rho(x) F(v)
  static PhaseField local_equilibrium(const DensityField& rho,
                                      std::shared_ptr<const VelocityGrid> vgrid);

private:
  SpatialGrid grid_;
  std::shared_ptr<const VelocityGrid> vgrid_;
  std::vector<double> data_;
};

enum class TransportScheme { Upwind, Muscl, Spectral };

TransportScheme parse_transport_scheme(const std::string& name);
std::string to_string(TransportScheme scheme);

// Backward-Euler collision step over a collision time dt_coll (macro dt
// divided by eps^gamma), solved in closed form per column.
void collision_apply(PhaseField& field, const Model& model, double dt_coll);

// Largest dt admitted by the CFL condition for the upwind/MUSCL schemes.
double transport_cfl_limit(const PhaseField& field, const Model& model, double eps);

// Periodic transport at speed eps^{1-gamma}(v_j - drift). Throws
// NumericError naming the admissible dt when an explicit scheme violates
// the CFL condition.
void transport_apply(PhaseField& field, const Model& model, double dt, double eps,
                     TransportScheme scheme);

// Weighted norms used by the a-priori estimate.
double gnorm2(const PhaseField& f, const Model& model);  // ||f - rho F||^2 in L2(nu/F)
double inv_f_norm2(const PhaseField& f);                  // ||f||^2 in L2(1/F)

enum class DtPolicy { Collision, Cfl, Fixed };

struct KineticOptions {
  int nx = 256;
  VelocityGridOptions velocity;
  TransportScheme scheme = TransportScheme::Spectral;
  InitialProfile rho0;
  double t_final = 0.5;
  DtPolicy dt_policy = DtPolicy::Collision;
  double dt_factor = 0.01;  // Collision: dt = dt_factor eps^gamma / nu2
  double dt_fixed = 0.0;    // Fixed
  std::vector<double> snapshot_times;
  int diagnostic_count = 200;  // evenly spaced g-norm samples in (0, T]
  int record_count = 0;        // evenly spaced full-field records in [0, T]
};

struct KineticDiagnostic {
  double t = 0.0;
  double gnorm2 = 0.0;
  double bound = 0.0;  // M ||f0||^2 eps^gamma
  double mass = 0.0;
  double min_f = 0.0;
  double rho_l2 = 0.0;
};

struct KineticRun {
  double eps = 0.0;
  double dt = 0.0;
  long steps = 0;
  double coercivity = 0.0;
  double f0_norm2 = 0.0;  // ||f0||^2 in L2(1/F)
  std::vector<PhaseField> snapshots;
  std::vector<PhaseField> records;
  PhaseField final_field;
  std::vector<KineticDiagnostic> diagnostics;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;

  DensityField density() const { return final_field.density(); }
};

std::shared_ptr<const VelocityGrid> make_shared_velocity_grid(const Model& model,
                                                              const VelocityGridOptions& opt);

KineticRun run_kinetic_det(const Model& model, const KineticOptions& opt, double eps);

} // namespace fracdiff
