#include "fracdiff/kinetic_mc.hpp"

#include "fracdiff/errors.hpp"
#include "fracdiff/rng.hpp"

#include <algorithm>
#include <cmath>

namespace fracdiff {

namespace {

double wrap(double x, double length) {
  double y = x - length * std::floor(x / length);
  if (y >= length) y -= length;  // floor rounding at the upper edge
  return y < 0.0 ? 0.0 : y;
}

CounterRng stream_at(std::uint64_t seed, std::size_t index, std::uint64_t pos) {
  CounterRng rng(seed, index);
  rng.seek(pos);
  return rng;
}

} // namespace

ParticleEnsemble init_ensemble(const Model& model, const InitialProfile& rho0,
                               std::size_t count, std::uint64_t seed) {
  if (count == 0) throw ConfigError("particle count must be >= 1");
  if (rho0.kind == ProfileKind::Gaussian && !(rho0.width > 0.0))
    throw ConfigError("initial profile is not normalizable: width must be positive");
  const double length = model.length();
  ParticleEnsemble e;
  e.seed = seed;
  e.x.resize(count);
  e.v.resize(count);
  e.stream_pos.resize(count);
  const double center = rho0.center < 0.0 ? 0.5 * length : rho0.center;
#pragma omp parallel for schedule(static)
  for (std::size_t n = 0; n < count; ++n) {
    CounterRng rng(seed, n);
    double x = rho0.kind == ProfileKind::Uniform ? length * rng.uniform()
                                                  : center + rho0.width * rng.normal();
    // Wrapping a Gaussian sample gives the periodized Gaussian exactly.
    e.x[n] = wrap(x, length);
    e.v[n] = model.sample_equilibrium(rng);
    e.stream_pos[n] = rng.counter();
  }
  return e;
}

void advance(ParticleEnsemble& e, const Model& model, double dt_macro, double eps,
             const McOptions& opt) {
  if (!(dt_macro > 0.0)) throw InputError("advance: dt_macro must be positive");
  if (!(eps > 0.0 && eps <= 1.0)) throw ValidationError("eps must lie in (0, 1]");
  const double length = model.length();
  const double theta = model.time_scale(eps);
  const double speed_scale = std::pow(eps, 1.0 - model.gamma());
  const double drift = model.drift(eps);
  const double nu2 = model.nu2();
  const double beta = model.beta();
  const long n = static_cast<long>(e.size());
  std::uint64_t candidates = 0, collisions = 0;
#pragma omp parallel for schedule(static) reduction(+ : candidates, collisions)
  for (long k = 0; k < n; ++k) {
    CounterRng rng = stream_at(e.seed, k, e.stream_pos[k]);
    double x = e.x[k], v = e.v[k];
    double left = dt_macro;
    for (;;) {
      const double rate = nu2 * bracket_pow(v, beta) / theta;
      const double tau = rng.exponential() / rate;
      const double c = opt.freeze_positions ? 0.0 : speed_scale * (v - drift);
      if (tau >= left) {
        x = wrap(x + c * left, length);
        break;
      }
      x = wrap(x + c * tau, length);
      left -= tau;
      ++candidates;
      if (rng.uniform() * nu2 < model.nu0(x)) {
        v = model.sample_post_collision(rng);
        ++collisions;
      }
    }
    e.x[k] = x;
    e.v[k] = v;
    e.stream_pos[k] = rng.counter();
  }
  e.candidates += candidates;
  e.collisions += collisions;
  e.t += dt_macro;
}

DensityField estimate_density(const ParticleEnsemble& e, double length, int nx,
                              bool smoothing) {
  if (nx < 2) throw InputError("estimate_density: nx must be >= 2");
  DensityField d;
  d.grid = SpatialGrid{nx, length};
  d.t = e.t;
  d.provenance = "mc_histogram";
  const double h = length / nx;
  const double norm = 1.0 / (double(e.size()) * h);
  if (!smoothing) {
    std::vector<std::uint64_t> counts(nx, 0);
    for (double x : e.x) {
      int i = static_cast<int>(x / h);
      counts[std::min(std::max(i, 0), nx - 1)] += 1;
    }
    d.values.resize(nx);
    for (int i = 0; i < nx; ++i) d.values[i] = counts[i] * norm;
    return d;
  }
  // Linear sharing between neighbouring cell centres, accumulated in
  // particle order so the sum is reproducible.
  d.values.assign(nx, 0.0);
  for (double x : e.x) {
    const double s = x / h - 0.5;
    const double fl = std::floor(s);
    const double frac = s - fl;
    const int i0 = ((static_cast<int>(fl) % nx) + nx) % nx;
    const int i1 = (i0 + 1) % nx;
    d.values[i0] += (1.0 - frac) * norm;
    d.values[i1] += frac * norm;
  }
  return d;
}

} // namespace fracdiff
