#pragma once

#include <string>
#include <vector>

namespace fracdiff {

// Uniform cell-centred grid on the torus [0, L).
struct SpatialGrid {
  int nx = 256;
  double length = 20.0;

  double dx() const { return length / nx; }
  double x(int i) const { return (i + 0.5) * dx(); }
};

struct DensityField {
  SpatialGrid grid;
  std::vector<double> values;
  double t = 0.0;
  std::string provenance;  // "mc_histogram", "kinetic_marginal", "macro", ...

  double mass() const;
  double l2_norm() const;
};

double l2_distance(const DensityField& a, const DensityField& b);

enum class ProfileKind { Gaussian, Uniform };

// Initial density on the torus; the Gaussian is periodized (sum over
// images), so it integrates to 1 over one period.
struct InitialProfile {
  ProfileKind kind = ProfileKind::Gaussian;
  double width = 1.0;
  double center = -1.0;  // negative: L / 2

  double value(double x, double length) const;
  DensityField sample(const SpatialGrid& grid) const;
};

ProfileKind parse_profile_kind(const std::string& name);
std::string to_string(ProfileKind kind);

} // namespace fracdiff
