#pragma once

#include "fracdiff/fields.hpp"
#include "fracdiff/model.hpp"

#include <cstdint>
#include <vector>

namespace fracdiff {

struct ParticleEnsemble {
  std::vector<double> x;  // in [0, L)
  std::vector<double> v;
  // Per-particle position in its random stream, so that a run split into
  // several advance() calls continues every stream where it stopped.
  std::vector<std::uint64_t> stream_pos;
  std::uint64_t seed = 0;
  double t = 0.0;
  std::uint64_t candidates = 0;  // thinning proposals over all advances
  std::uint64_t collisions = 0;  // accepted proposals

  std::size_t size() const { return x.size(); }
};

struct McOptions {
  bool freeze_positions = false;  // collisions only, no free flight
};

ParticleEnsemble init_ensemble(const Model& model, const InitialProfile& rho0,
                               std::size_t count, std::uint64_t seed);

// Exact jump process over dt_macro by thinning against the majorant rate
// nu2 <v>^beta / eps^gamma.
void advance(ParticleEnsemble& ensemble, const Model& model, double dt_macro, double eps,
             const McOptions& opt = {});

// Histogram on nx cells of width L / nx, normalized to unit mass. With
// smoothing each particle is shared linearly between the two nearest cell
// centres.
DensityField estimate_density(const ParticleEnsemble& ensemble, double length, int nx,
                              bool smoothing = false);

} // namespace fracdiff
