#include "fracdiff/fields.hpp"

#include "fracdiff/errors.hpp"

#include <cmath>
#include <numbers>

namespace fracdiff {

double DensityField::mass() const {
  double s = 0.0;
  for (double r : values) s += r;
  return s * grid.dx();
}

double DensityField::l2_norm() const {
  double s = 0.0;
  for (double r : values) s += r * r;
  return std::sqrt(s * grid.dx());
}

double l2_distance(const DensityField& a, const DensityField& b) {
  if (a.values.size() != b.values.size())
    throw InputError("l2_distance: density fields live on different grids");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    s += d * d;
  }
  return std::sqrt(s * a.grid.dx());
}

double InitialProfile::value(double x, double length) const {
  if (kind == ProfileKind::Uniform) return 1.0 / length;
  if (!(width > 0.0)) throw ConfigError("initial profile width must be positive");
  const double c = center < 0.0 ? 0.5 * length : center;
  // Enough images that the truncation is below round-off for width <= L/4.
  double s = 0.0;
  for (int m = -4; m <= 4; ++m) {
    const double z = (x - c + m * length) / width;
    s += std::exp(-0.5 * z * z);
  }
  return s / (width * std::sqrt(2.0 * std::numbers::pi));
}

DensityField InitialProfile::sample(const SpatialGrid& grid) const {
  DensityField d;
  d.grid = grid;
  d.values.resize(grid.nx);
  for (int i = 0; i < grid.nx; ++i) d.values[i] = value(grid.x(i), grid.length);
  d.provenance = "initial";
  return d;
}

ProfileKind parse_profile_kind(const std::string& name) {
  if (name == "gaussian") return ProfileKind::Gaussian;
  if (name == "uniform") return ProfileKind::Uniform;
  throw ConfigError("unknown initial profile '" + name + "' (expected gaussian or uniform)");
}

std::string to_string(ProfileKind kind) {
  return kind == ProfileKind::Gaussian ? "gaussian" : "uniform";
}

} // namespace fracdiff
