#include "fracdiff/kinetic_fv.hpp"

#include "fracdiff/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

namespace fracdiff {

PhaseField::PhaseField(const SpatialGrid& grid, std::shared_ptr<const VelocityGrid> vgrid,
                       double t0)
    : t(t0), grid_(grid), vgrid_(std::move(vgrid)),
      data_(std::size_t(grid.nx) * vgrid_->size(), 0.0) {}

DensityField PhaseField::density() const {
  DensityField d;
  d.grid = grid_;
  d.t = t;
  d.provenance = "kinetic_marginal";
  d.values.assign(nx(), 0.0);
  const auto& w = vgrid_->w;
  for (int i = 0; i < nx(); ++i) {
    double s = 0.0;
    const double* row = &data_[std::size_t(i) * nv()];
    for (int j = 0; j < nv(); ++j) s += w[j] * row[j];
    d.values[i] = s;
  }
  return d;
}

double PhaseField::mass() const { return density().mass(); }

double PhaseField::min_value() const {
  return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end());
}

PhaseField PhaseField::local_equilibrium(const DensityField& rho,
                                         std::shared_ptr<const VelocityGrid> vgrid) {
  PhaseField f(rho.grid, vgrid, rho.t);
  for (int i = 0; i < f.nx(); ++i)
    for (int j = 0; j < f.nv(); ++j) f(i, j) = rho.values[i] * f.velocity().F[j];
  return f;
}

TransportScheme parse_transport_scheme(const std::string& name) {
  if (name == "upwind") return TransportScheme::Upwind;
  if (name == "muscl") return TransportScheme::Muscl;
  if (name == "spectral") return TransportScheme::Spectral;
  throw ConfigError("unknown transport scheme '" + name +
                    "' (expected upwind, muscl or spectral)");
}

std::string to_string(TransportScheme scheme) {
  switch (scheme) {
  case TransportScheme::Upwind: return "upwind";
  case TransportScheme::Muscl: return "muscl";
  case TransportScheme::Spectral: return "spectral";
  }
  return "unknown";
}

void collision_apply(PhaseField& field, const Model& model, double dt_coll) {
  if (!(dt_coll > 0.0)) throw InputError("collision_apply: dt_coll must be positive");
  const VelocityGrid& vg = field.velocity();
  const int nv = field.nv();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < field.nx(); ++i) {
    const double tau = dt_coll * model.nu0(field.grid().x(i));
    double* f = &field(i, 0);
    // Backward Euler: f' (1 + tau b) = f + tau p m', m' = sum w b f'.
    double s1 = 0.0, d = 0.0;
    for (int j = 0; j < nv; ++j) {
      const double r = 1.0 / (1.0 + tau * vg.b[j]);
      s1 += vg.w[j] * vg.b[j] * f[j] * r;
      d += vg.w[j] * vg.p[j] * r;
    }
    const double m = s1 / d;
    for (int j = 0; j < nv; ++j) f[j] = (f[j] + tau * vg.p[j] * m) / (1.0 + tau * vg.b[j]);
  }
}

namespace {

std::vector<double> transport_speeds(const PhaseField& field, const Model& model,
                                     double eps) {
  const double scale = std::pow(eps, 1.0 - model.gamma());
  const double j = model.drift(eps);
  std::vector<double> c(field.nv());
  for (int k = 0; k < field.nv(); ++k) c[k] = scale * (field.velocity().v[k] - j);
  return c;
}

double van_leer(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return 2.0 * a * b / (a + b);
}

void advect_row_upwind(std::vector<double>& row, double nu) {
  const int n = static_cast<int>(row.size());
  std::vector<double> old = row;
  for (int i = 0; i < n; ++i) {
    if (nu >= 0.0)
      row[i] = old[i] - nu * (old[i] - old[(i - 1 + n) % n]);
    else
      row[i] = old[i] - nu * (old[(i + 1) % n] - old[i]);
  }
}

// MUSCL-Hancock with the van Leer limiter; nu is the signed Courant number.
void advect_row_muscl(std::vector<double>& row, double nu) {
  const int n = static_cast<int>(row.size());
  std::vector<double> slope(n), face(n);
  for (int i = 0; i < n; ++i)
    slope[i] = van_leer(row[i] - row[(i - 1 + n) % n], row[(i + 1) % n] - row[i]);
  // face[i]: upwind state at the interface i + 1/2 times nu.
  for (int i = 0; i < n; ++i) {
    if (nu >= 0.0)
      face[i] = nu * (row[i] + 0.5 * (1.0 - nu) * slope[i]);
    else {
      const int r = (i + 1) % n;
      face[i] = nu * (row[r] - 0.5 * (1.0 + nu) * slope[r]);
    }
  }
  for (int i = 0; i < n; ++i) row[i] -= face[i] - face[(i - 1 + n) % n];
}

// Exact periodic shift of every velocity row through its Fourier series.
class SpectralShift {
public:
  SpectralShift(int nx, int nv) : nx_(nx), nv_(nv) {
    real_ = fftw_alloc_real(std::size_t(nx) * nv);
    spec_ = fftw_alloc_complex(std::size_t(nx / 2 + 1) * nv);
    std::lock_guard<std::mutex> lock(planner_mutex());
    int n[1] = {nx};
    forward_ = fftw_plan_many_dft_r2c(1, n, nv, real_, nullptr, nv, 1, spec_, nullptr, nv, 1,
                                      FFTW_ESTIMATE);
    backward_ = fftw_plan_many_dft_c2r(1, n, nv, spec_, nullptr, nv, 1, real_, nullptr, nv, 1,
                                       FFTW_ESTIMATE);
  }
  ~SpectralShift() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(real_);
    fftw_free(spec_);
  }
  SpectralShift(const SpectralShift&) = delete;
  SpectralShift& operator=(const SpectralShift&) = delete;

  void apply(PhaseField& field, const std::vector<double>& shift) {
    std::copy(field.data().begin(), field.data().end(), real_);
    fftw_execute(forward_);
    const double length = field.grid().length;
    const int half = nx_ / 2;
    for (int j = 0; j < nv_; ++j) {
      // Reduce the shift modulo L first so huge flights keep full phase accuracy.
      const double s = shift[j] - length * std::floor(shift[j] / length);
      const double theta = 2.0 * std::numbers::pi * s / length;
      for (int k = 0; k <= half; ++k) {
        auto& c = reinterpret_cast<std::complex<double>&>(spec_[std::size_t(k) * nv_ + j]);
        const double ph = std::remainder(k * theta, 2.0 * std::numbers::pi);
        if (nx_ % 2 == 0 && k == half)
          c *= std::cos(ph);
        else
          c *= std::polar(1.0, -ph);
      }
    }
    fftw_execute(backward_);
    const double scale = 1.0 / nx_;
    for (std::size_t k = 0; k < field.data().size(); ++k) field.data()[k] = real_[k] * scale;
  }

private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
  int nx_, nv_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan forward_ = nullptr, backward_ = nullptr;
};

std::string admissible_dt_message(double dt, double limit) {
  std::ostringstream os;
  os.precision(6);
  os << "transport CFL violated: dt = " << dt << " exceeds the admissible dt <= " << limit;
  return os.str();
}

} // namespace

double transport_cfl_limit(const PhaseField& field, const Model& model, double eps) {
  double cmax = 0.0;
  for (double c : transport_speeds(field, model, eps)) cmax = std::max(cmax, std::abs(c));
  return cmax > 0.0 ? field.grid().dx() / cmax : std::numeric_limits<double>::infinity();
}

void transport_apply(PhaseField& field, const Model& model, double dt, double eps,
                     TransportScheme scheme) {
  const std::vector<double> c = transport_speeds(field, model, eps);
  if (scheme == TransportScheme::Spectral) {
    std::vector<double> shift(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) shift[j] = c[j] * dt;
    thread_local std::unique_ptr<SpectralShift> cache;
    thread_local int cached_nx = 0, cached_nv = 0;
    if (!cache || cached_nx != field.nx() || cached_nv != field.nv()) {
      cache = std::make_unique<SpectralShift>(field.nx(), field.nv());
      cached_nx = field.nx();
      cached_nv = field.nv();
    }
    cache->apply(field, shift);
    return;
  }
  const double limit = transport_cfl_limit(field, model, eps);
  if (dt > limit * (1.0 + 1e-12)) throw NumericError(admissible_dt_message(dt, limit));
  const double h = field.grid().dx();
  const int nx = field.nx();
#pragma omp parallel
  {
    std::vector<double> row(nx);
#pragma omp for schedule(static)
    for (int j = 0; j < field.nv(); ++j) {
      if (c[j] == 0.0) continue;
      for (int i = 0; i < nx; ++i) row[i] = field(i, j);
      if (scheme == TransportScheme::Upwind)
        advect_row_upwind(row, c[j] * dt / h);
      else
        advect_row_muscl(row, c[j] * dt / h);
      for (int i = 0; i < nx; ++i) field(i, j) = row[i];
    }
  }
}

double gnorm2(const PhaseField& f, const Model& model) {
  const VelocityGrid& vg = f.velocity();
  const DensityField rho = f.density();
  double total = 0.0;
  for (int i = 0; i < f.nx(); ++i) {
    const double nu0 = model.nu0(f.grid().x(i));
    double s = 0.0;
    for (int j = 0; j < f.nv(); ++j) {
      const double g = f(i, j) - rho.values[i] * vg.F[j];
      s += vg.w[j] * vg.b[j] * g * g / vg.F[j];
    }
    total += nu0 * s;
  }
  return total * f.grid().dx();
}

double inv_f_norm2(const PhaseField& f) {
  const VelocityGrid& vg = f.velocity();
  double total = 0.0;
  for (int i = 0; i < f.nx(); ++i)
    for (int j = 0; j < f.nv(); ++j) total += vg.w[j] * f(i, j) * f(i, j) / vg.F[j];
  return total * f.grid().dx();
}

std::shared_ptr<const VelocityGrid> make_shared_velocity_grid(const Model& model,
                                                              const VelocityGridOptions& opt) {
  return std::make_shared<const VelocityGrid>(make_velocity_grid(model, opt));
}

namespace {

// Sorted, de-duplicated stop times in (0, T].
std::vector<double> merge_times(std::vector<double> times, double t_final) {
  std::vector<double> out;
  times.push_back(t_final);
  std::sort(times.begin(), times.end());
  for (double t : times) {
    if (t <= 0.0 || t > t_final * (1.0 + 1e-14)) continue;
    if (out.empty() || t - out.back() > 1e-12 * t_final) out.push_back(std::min(t, t_final));
  }
  return out;
}

bool contains_time(const std::vector<double>& times, double t, double t_final) {
  for (double s : times)
    if (std::abs(s - t) <= 1e-12 * t_final) return true;
  return false;
}

} // namespace

KineticRun run_kinetic_det(const Model& model, const KineticOptions& opt, double eps) {
  const auto start = std::chrono::steady_clock::now();
  if (!(eps > 0.0 && eps <= 1.0)) throw ValidationError("eps must lie in (0, 1]");
  if (!(opt.t_final > 0.0)) throw ConfigError("t_final must be positive");
  if (opt.nx < 2) throw ConfigError("nx must be >= 2");

  KineticRun run;
  run.eps = eps;
  run.coercivity = model.coercivity_closed_form();

  SpatialGrid grid{opt.nx, model.length()};
  auto vgrid = make_shared_velocity_grid(model, opt.velocity);
  if (vgrid->v_max < model.critical_speed(eps)) {
    std::ostringstream os;
    os << "velocity grid v_max = " << vgrid->v_max << " is below the critical speed "
       << model.critical_speed(eps) << " for eps = " << eps
       << "; equilibrium mass beyond v_max: "
       << 2.0 * model.kappa() * std::pow(vgrid->v_max, -model.alpha()) / model.alpha();
    run.warnings.push_back(os.str());
  }

  PhaseField f = PhaseField::local_equilibrium(opt.rho0.sample(grid), vgrid);
  run.f0_norm2 = inv_f_norm2(f);
  const double theta = model.time_scale(eps);
  const double bound = run.coercivity * run.f0_norm2 * theta;

  double dt_target = 0.0;
  switch (opt.dt_policy) {
  case DtPolicy::Collision: dt_target = opt.dt_factor * theta / model.nu2(); break;
  case DtPolicy::Cfl: dt_target = 0.9 * transport_cfl_limit(f, model, eps); break;
  case DtPolicy::Fixed: dt_target = opt.dt_fixed; break;
  }
  if (!(dt_target > 0.0)) throw ConfigError("time step must be positive");
  if (opt.scheme != TransportScheme::Spectral) {
    const double limit = transport_cfl_limit(f, model, eps);
    // Strang uses half steps, so the full step may be twice the CFL limit.
    if (dt_target > 2.0 * limit) throw NumericError(admissible_dt_message(dt_target, 2.0 * limit));
  }

  std::vector<double> diag_times, record_times;
  for (int k = 1; k <= opt.diagnostic_count; ++k)
    diag_times.push_back(opt.t_final * k / opt.diagnostic_count);
  for (int k = 1; k <= opt.record_count; ++k)
    record_times.push_back(opt.t_final * k / opt.record_count);
  std::vector<double> all = diag_times;
  all.insert(all.end(), record_times.begin(), record_times.end());
  all.insert(all.end(), opt.snapshot_times.begin(), opt.snapshot_times.end());
  const std::vector<double> stops = merge_times(all, opt.t_final);

  auto diagnose = [&](const PhaseField& field) {
    KineticDiagnostic d;
    d.t = field.t;
    d.gnorm2 = gnorm2(field, model);
    d.bound = bound;
    const DensityField rho = field.density();
    d.mass = rho.mass();
    d.min_f = field.min_value();
    d.rho_l2 = rho.l2_norm();
    run.diagnostics.push_back(d);
  };
  diagnose(f);
  if (opt.record_count > 0) run.records.push_back(f);
  if (contains_time(opt.snapshot_times, 0.0, opt.t_final)) run.snapshots.push_back(f);

  const double dt_coll_scale = 1.0 / theta;
  double t = 0.0;
  double dt_used = 0.0;
  for (double stop : stops) {
    const long n = std::max(1L, static_cast<long>(std::ceil((stop - t) / dt_target - 1e-9)));
    const double dt = (stop - t) / n;
    dt_used = std::max(dt_used, dt);
    for (long k = 0; k < n; ++k) {
      transport_apply(f, model, 0.5 * dt, eps, opt.scheme);
      collision_apply(f, model, dt * dt_coll_scale);
      transport_apply(f, model, 0.5 * dt, eps, opt.scheme);
      ++run.steps;
    }
    t = stop;
    f.t = stop;
    if (contains_time(diag_times, stop, opt.t_final) || stop == opt.t_final) diagnose(f);
    if (contains_time(record_times, stop, opt.t_final)) run.records.push_back(f);
    if (contains_time(opt.snapshot_times, stop, opt.t_final)) run.snapshots.push_back(f);
  }
  run.dt = dt_used;
  run.final_field = std::move(f);
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

} // namespace fracdiff
