#include "fracdiff/auxiliary.hpp"

#include "fracdiff/errors.hpp"
#include "fracdiff/quadrature.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace fracdiff {

namespace {

constexpr double kHazardCutoff = 40.0;  // e^{-40} ~ 4e-18

// Spectral d/dx of each column of an x-major nx-by-nv array on a torus of
// length L. The Nyquist mode is dropped.
std::vector<double> spectral_dx_columns(const std::vector<double>& data, int nx, int nv,
                                        double length) {
  const int nc = nx / 2 + 1;
  std::vector<double> in(data);
  std::vector<std::complex<double>> spec(std::size_t(nc) * nv);
  std::vector<double> out(data.size());
  int n[] = {nx};
  auto* cspec = reinterpret_cast<fftw_complex*>(spec.data());
  fftw_plan fwd = fftw_plan_many_dft_r2c(1, n, nv, in.data(), nullptr, nv, 1, cspec, nullptr,
                                         nv, 1, FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_many_dft_c2r(1, n, nv, cspec, nullptr, nv, 1, out.data(), nullptr,
                                         nv, 1, FFTW_ESTIMATE);
  fftw_execute(fwd);
  const double k0 = 2.0 * std::numbers::pi / length;
  for (int m = 0; m < nc; ++m) {
    const std::complex<double> mult =
        (nx % 2 == 0 && m == nx / 2) ? 0.0 : std::complex<double>(0.0, k0 * m) / double(nx);
    for (int j = 0; j < nv; ++j) spec[std::size_t(m) * nv + j] *= mult;
  }
  fftw_execute(bwd);
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
  return out;
}

} // namespace

CorrectorEval::CorrectorEval(const Model& model, double eps, CorrectorOptions opt)
    : model_(model), eps_(eps), opt_(opt) {
  if (!(eps > 0.0 && eps <= 1.0)) throw ValidationError("corrector: eps must lie in (0, 1]");
}

double CorrectorEval::flight_speed(double v) const {
  return eps_ * v * bracket_pow(v, -model_.beta());
}

double CorrectorEval::hazard(double x, double c, double z) const {
  if (c == 0.0) return model_.nu0(x) * z;
  return z * model_.nu0_mean_along(x, c * z);
}

double CorrectorEval::laguerre_weight_sum() const {
  const auto& q = gauss_laguerre(opt_.laguerre_nodes);
  double s = 0.0;
  for (double w : q.weights) s += w;
  return s;
}

bool CorrectorEval::use_laguerre(const TestSlice& phi, double c) const {
  const double period = phi.phi->period();
  if (period <= 0.0) return true;
  const double length = model_.length();
  if (model_.params().nu0_delta > 0.0 && std::abs(period - length) > 1e-12 * length)
    return true;
  const double scale = phi.phi->length_scale();
  if (!std::isfinite(scale)) return std::abs(c) / model_.nu1() <= opt_.regime_threshold * period;
  return std::abs(c) / model_.nu1() <= opt_.regime_threshold * scale;
}

double CorrectorEval::invert_hazard(double x, double c, double u) const {
  if (model_.params().nu0_delta == 0.0) return u / model_.params().nu0_mean;
  // U is increasing with slope in [nu1, nu2]: safeguarded Newton.
  double lo = u / model_.nu2(), hi = u / model_.nu1();
  double z = u / model_.params().nu0_mean;
  for (int it = 0; it < 80; ++it) {
    const double f = hazard(x, c, z) - u;
    if (f == 0.0) return z;
    if (f > 0.0) hi = z; else lo = z;
    double zn = z - f / model_.nu0(x + c * z);
    if (!(zn > lo && zn < hi)) zn = 0.5 * (lo + hi);
    if (std::abs(zn - z) <= 1e-15 * z) return zn;
    z = zn;
  }
  if (std::abs(hazard(x, c, z) - u) > 1e-10 * std::max(u, 1.0))
    throw NumericError("hazard inversion did not converge");
  return z;
}

double CorrectorEval::chi_laguerre(const TestSlice& phi, double x, double c) const {
  // Substituting u = U(z) turns the flight integral into int e^{-u} phi du.
  const auto& q = gauss_laguerre(opt_.laguerre_nodes);
  double s = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (q.weights[k] == 0.0) continue;
    s += q.weights[k] * phi(x + c * invert_hazard(x, c, q.nodes[k]));
  }
  return s;
}

double CorrectorEval::panel_width(const TestSlice& phi, double c) const {
  const double period = phi.phi->period();
  double w = std::abs(c) / model_.nu2();
  const double scale = phi.phi->length_scale();
  if (std::isfinite(scale)) w = std::min(w, scale / opt_.panels_per_scale);
  return std::min(w, 0.25 * period);
}

double CorrectorEval::chi_periodic(const TestSlice& phi, double x, double c) const {
  // Over one period P the flight picks up hazard U(P); summing the
  // geometric series of laps gives chi = int_0^P (...) / (1 - e^{-U(P)}).
  const double period = phi.phi->period();
  const double a = std::abs(c), sigma = c > 0.0 ? 1.0 : -1.0;
  const int panels = std::max(1, int(std::ceil(period / panel_width(phi, c))));
  const double h = period / panels;
  const auto& q = gauss_legendre(opt_.panel_order);
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double r0 = p * h;
    if (r0 > 0.0 && (r0 / a) * model_.nu0_mean_along(x, sigma * r0) > kHazardCutoff) break;
    for (std::size_t k = 0; k < q.size(); ++k) {
      const double r = r0 + 0.5 * h * (1.0 + q.nodes[k]);
      const double y = x + sigma * r;
      const double u = (r / a) * model_.nu0_mean_along(x, sigma * r);
      s += 0.5 * h * q.weights[k] * model_.nu0(y) / a * std::exp(-u) * phi(y);
    }
  }
  const double total = (period / a) * model_.nu0_mean_along(x, sigma * period);
  return s / -std::expm1(-total);
}

double CorrectorEval::chi(const TestSlice& phi, double x, double v) const {
  const double c = flight_speed(v);
  if (c == 0.0) return phi(x);
  return use_laguerre(phi, c) ? chi_laguerre(phi, x, c) : chi_periodic(phi, x, c);
}

double CorrectorEval::chi(const TestFunction& phi, double t, double x, double v) const {
  return chi(TestSlice{&phi, t, false}, x, v);
}

double CorrectorEval::chi_dt(const TestFunction& phi, double t, double x, double v) const {
  return chi(TestSlice{&phi, t, true}, x, v);
}

std::vector<double> CorrectorEval::chi_row(const TestSlice& phi, const SpatialGrid& grid,
                                           double v) const {
  const int n = grid.nx;
  std::vector<double> out(n);
  const double c = flight_speed(v);
  const double period = phi.phi->period();
  const bool periodic_grid =
      period > 0.0 && std::abs(period - grid.length) <= 1e-12 * grid.length &&
      std::abs(grid.length - model_.length()) <= 1e-12 * grid.length;
  if (c == 0.0 || !periodic_grid || use_laguerre(phi, c)) {
    for (int i = 0; i < n; ++i) out[i] = chi(phi, grid.x(i), v);
    return out;
  }

  // Flight from cell i: the part of the integral before reaching the next
  // cell centre (I_i) plus the survival factor D_i times chi there.
  const double a = std::abs(c), sigma = c > 0.0 ? 1.0 : -1.0, h = grid.dx();
  const int sub = std::max(1, int(std::ceil(h / panel_width(phi, c))));
  const double hs = h / sub;
  const auto& q = gauss_legendre(opt_.panel_order);
  std::vector<double> I(n), logD(n);
  for (int i = 0; i < n; ++i) {
    const double x = grid.x(i);
    double s = 0.0;
    for (int p = 0; p < sub; ++p) {
      for (std::size_t k = 0; k < q.size(); ++k) {
        const double r = (p + 0.5 * (1.0 + q.nodes[k])) * hs;
        const double y = x + sigma * r;
        const double u = (r / a) * model_.nu0_mean_along(x, sigma * r);
        s += 0.5 * hs * q.weights[k] * model_.nu0(y) / a * std::exp(-u) * phi(y);
      }
    }
    I[i] = s;
    logD[i] = -(h / a) * model_.nu0_mean_along(x, sigma * h);
  }
  auto idx = [&](int k) { return sigma > 0.0 ? k % n : (n - k % n) % n; };
  double acc = 0.0, cum = 0.0;  // cum = log of the survival product so far
  for (int k = 0; k < n; ++k) {
    const int i = idx(k);
    acc += std::exp(cum) * I[i];
    cum += logD[i];
  }
  out[idx(0)] = acc / -std::expm1(cum);
  for (int k = n - 1; k >= 1; --k) {
    const int i = idx(k);
    out[i] = I[i] + std::exp(logD[i]) * out[idx(k + 1)];
  }
  return out;
}

double CorrectorEval::hazard_weight_integral(double x, double v) const {
  const double c = flight_speed(v);
  double dz = 0.5 / model_.nu2();
  // Resolve the oscillation of nu0 along the flight.
  if (model_.params().nu0_delta > 0.0 && c != 0.0)
    dz = std::min(dz, model_.length() / (16.0 * std::abs(c)));
  const auto& q = gauss_legendre(opt_.panel_order);
  double s = 0.0, z0 = 0.0;
  for (int p = 0; p < 10000000; ++p) {
    if (hazard(x, c, z0) > kHazardCutoff) break;
    for (std::size_t k = 0; k < q.size(); ++k) {
      const double z = z0 + 0.5 * dz * (1.0 + q.nodes[k]);
      s += 0.5 * dz * q.weights[k] * model_.nu0(x + c * z) * std::exp(-hazard(x, c, z));
    }
    z0 += dz;
  }
  return s + std::exp(-hazard(x, c, z0));
}

VelocityQuadrature continuous_velocity_quadrature(const Model& model, double eps) {
  VelocityQuadrature out;
  const auto& core = gauss_legendre(16);
  for (int p = 0; p < 4; ++p) {
    const double a = -1.0 + 0.5 * p;
    for (std::size_t k = 0; k < core.size(); ++k) {
      out.v.push_back(a + 0.25 * (1.0 + core.nodes[k]));
      out.w.push_back(0.25 * core.weights[k]);
    }
  }
  const double beta = model.beta();
  const double reach = 1e6 * model.length() * model.nu2() / eps;
  const double vcut = std::clamp(std::pow(reach, 1.0 / (1.0 - beta)), 1e3, 1e30);
  const double smax = std::log(vcut);
  const int panels = int(std::ceil(smax / 0.25));
  const double hs = smax / panels;
  const auto& tail = gauss_legendre(8);
  for (int p = 0; p < panels; ++p) {
    for (std::size_t k = 0; k < tail.size(); ++k) {
      const double s = (p + 0.5 * (1.0 + tail.nodes[k])) * hs;
      const double v = std::exp(s);
      const double w = 0.5 * hs * tail.weights[k] * v;
      out.v.push_back(v);
      out.w.push_back(w);
      out.v.push_back(-v);
      out.w.push_back(w);
    }
  }
  out.v_cut = vcut;
  return out;
}

double chi_limit_value(const Model& model, const TestSlice& phi) {
  const int n = 4096;
  const double length = model.length(), h = length / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = i * h;
    s += model.nu0(x) * phi(x);
  }
  return s * h / (length * model.params().nu0_mean);
}

namespace {

struct SliceSums {
  double gap = 0.0, chi2 = 0.0, phi2 = 0.0;
};

// int_x int_v F (chi - phi)^2 etc. for one time slice; x by the periodic
// trapezoid rule, v by the continuous quadrature plus its analytic tail.
SliceSums slice_sums(const Model& model, const CorrectorEval& ce, const TestSlice& slice,
                     const VelocityQuadrature& vq, const SpatialGrid& grid) {
  SliceSums out;
  const int n = grid.nx;
  const double h = grid.dx();
  std::vector<double> phi(n);
  for (int i = 0; i < n; ++i) phi[i] = slice(grid.x(i));
  for (std::size_t k = 0; k < vq.v.size(); ++k) {
    const double wf = vq.w[k] * model.equilibrium_pdf(vq.v[k]);
    const auto row = ce.chi_row(slice, grid, vq.v[k]);
    double g = 0.0, c2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = row[i] - phi[i];
      g += d * d;
      c2 += row[i] * row[i];
    }
    out.gap += wf * g * h;
    out.chi2 += wf * c2 * h;
  }
  const double tail_mass = 2.0 * model.kappa() * std::pow(vq.v_cut, -model.alpha()) / model.alpha();
  const double cinf = chi_limit_value(model, slice);
  double g = 0.0, p2 = 0.0;
  for (int i = 0; i < n; ++i) {
    g += (cinf - phi[i]) * (cinf - phi[i]);
    p2 += phi[i] * phi[i];
  }
  out.gap += tail_mass * g * h;
  out.chi2 += tail_mass * cinf * cinf * n * h;
  out.phi2 = p2 * h;
  return out;
}

void require_gap_input(const Model& model, const TestFunction& phi) {
  const double period = phi.period();
  if (!(period > 0.0) || std::abs(period - model.length()) > 1e-12 * model.length())
    throw InputError("chi gap: phi must be periodic with the domain length");
  if (!std::isfinite(phi.time_support()))
    throw InputError("chi gap: phi must be compactly supported in time");
}

} // namespace

ChiGapResult chi_gap_report(const Model& model, const TestFunction& phi, double eps,
                            const GapOptions& opt, const CorrectorOptions& copt) {
  require_gap_input(model, phi);
  CorrectorEval ce(model, eps, copt);
  const auto vq = continuous_velocity_quadrature(model, eps);
  const SpatialGrid grid{opt.nx, model.length()};
  const double T = phi.time_support();
  ChiGapResult r;
  r.eps = eps;

  if (phi.separable()) {
    // phi = psi(t) Phi(x) and chi is linear in phi: the time integrals factor.
    const double psi0 = phi.time_factor(0.0);
    if (psi0 == 0.0) throw InputError("chi gap: separable phi needs psi(0) != 0");
    auto psi2 = [&](double t) { const double p = phi.time_factor(t); return p * p; };
    auto dpsi2 = [&](double t) { const double p = phi.time_factor_dt(t); return p * p; };
    const double P0 = integrate_adaptive(psi2, 0.0, T, 1e-12) / (psi0 * psi0);
    const double P1 = integrate_adaptive(dpsi2, 0.0, T, 1e-12) / (psi0 * psi0);
    const auto s = slice_sums(model, ce, TestSlice{&phi, 0.0, false}, vq, grid);
    r.gap = s.gap * P0;
    r.chi_norm2 = s.chi2 * P0;
    r.phi_norm2 = s.phi2 * P0;
    r.gap_dt = s.gap * P1;
    r.chi_dt_norm2 = s.chi2 * P1;
    r.phi_dt_norm2 = s.phi2 * P1;
  } else {
    const auto q = gauss_legendre(opt.time_nodes, 0.0, T);
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto s = slice_sums(model, ce, TestSlice{&phi, q.nodes[k], false}, vq, grid);
      const auto d = slice_sums(model, ce, TestSlice{&phi, q.nodes[k], true}, vq, grid);
      r.gap += q.weights[k] * s.gap;
      r.chi_norm2 += q.weights[k] * s.chi2;
      r.phi_norm2 += q.weights[k] * s.phi2;
      r.gap_dt += q.weights[k] * d.gap;
      r.chi_dt_norm2 += q.weights[k] * d.chi2;
      r.phi_dt_norm2 += q.weights[k] * d.phi2;
    }
  }

  // Pointwise bound |chi - phi| <= (nu2/nu1) eps |v| <v>^{-beta} ||phi_x||_inf.
  const double t = 0.25 * T;
  double sup_dx = 0.0;
  for (int i = 0; i < 4096; ++i)
    sup_dx = std::max(sup_dx, std::abs(phi.dx(t, model.length() * i / 4096.0)));
  const double vs[] = {0.05, 0.3, 0.9, 1.5, 4.0, 20.0, 300.0};
  double worst = 0.0;
  for (int i = 0; i < 16; ++i) {
    const double x = model.length() * (i + 0.37) / 16.0;
    for (double vv : vs) {
      for (double v : {vv, -vv}) {
        const double diff = std::abs(ce.chi(phi, t, x, v) - phi.value(t, x));
        const double bound = model.nu2() / model.nu1() * std::abs(ce.flight_speed(v)) * sup_dx;
        if (bound > 0.0) worst = std::max(worst, diff / bound);
        else if (diff > 1e-14) worst = std::numeric_limits<double>::infinity();
      }
    }
  }
  r.sup_bound_ratio = worst;
  r.sup_bound_ok = worst <= 1.0 + 1e-6;
  return r;
}

double chi_l2f_gap(const Model& model, const TestFunction& phi, double eps,
                   bool use_time_derivative, const GapOptions& opt) {
  const auto r = chi_gap_report(model, phi, eps, opt);
  return use_time_derivative ? r.gap_dt : r.gap;
}

double operator_limit_lhs(const Model& model, const TestFunction& phi, double eps, double t,
                          double x, const CorrectorOptions& copt) {
  CorrectorEval ce(model, eps, copt);
  const TestSlice slice{&phi, t, false};
  const auto vq = continuous_velocity_quadrature(model, eps);
  const double p = phi.value(t, x);
  const double n0 = model.nu0(x);
  double s = 0.0;
  for (std::size_t k = 0; k < vq.v.size(); ++k) {
    const double v = vq.v[k];
    s += vq.w[k] * n0 * bracket_pow(v, model.beta()) * model.equilibrium_pdf(v) *
         (ce.chi(slice, x, v) - p);
  }
  const double a = model.alpha(), b = model.beta();
  if (phi.period() > 0.0)
    s += 2.0 * n0 * model.kappa() * std::pow(vq.v_cut, b - a) / (a - b) *
         (chi_limit_value(model, slice) - p);
  const double g = model.gamma();
  return std::pow(eps, -g) * s - std::pow(eps, 1.0 - g) * model.drift(eps) * phi.dx(t, x);
}

double small_velocity_part(const Model& model, const TestFunction& phi, double eps, double t,
                           double x, const CorrectorOptions& copt) {
  CorrectorEval ce(model, eps, copt);
  const TestSlice slice{&phi, t, false};
  const double p = phi.value(t, x), px = phi.dx(t, x);
  const double n0 = model.nu0(x);
  const auto& q = gauss_legendre(16);
  double s = 0.0;
  for (int panel = 0; panel < 4; ++panel) {
    const double a = -1.0 + 0.5 * panel;
    for (std::size_t k = 0; k < q.size(); ++k) {
      const double v = a + 0.25 * (1.0 + q.nodes[k]);
      const double F = model.equilibrium_pdf(v);
      const double nu = n0 * bracket_pow(v, model.beta());
      s += 0.25 * q.weights[k] * (nu * F * (ce.chi(slice, x, v) - p) - eps * v * F * px);
    }
  }
  return s;
}

namespace {

struct StepSeries {
  std::vector<double> t, s1, s2, s3;
};

StepSeries step_series(const Model& model, const TestFunction& phi, const KineticRun& run,
                       const CorrectorOptions& copt, bool only_first) {
  if (run.records.size() < 2)
    throw InputError("corrector terms need at least two g records (set record_count >= 2)");
  const auto& first = run.records.front();
  const SpatialGrid grid = first.grid();
  const auto& vg = first.velocity();
  const int nx = grid.nx, nv = int(vg.size());
  const double h = grid.dx();
  const double j = model.drift(run.eps);
  CorrectorEval ce(model, run.eps, copt);

  auto matrices = [&](double t, std::vector<double>& X, std::vector<double>& P,
                      std::vector<double>& DX, std::vector<double>& DP) {
    const TestSlice slice{&phi, t, false};
    X.assign(std::size_t(nx) * nv, 0.0);
    for (int jv = 0; jv < nv; ++jv) {
      const auto row = ce.chi_row(slice, grid, vg.v[jv]);
      for (int i = 0; i < nx; ++i) X[std::size_t(i) * nv + jv] = row[i];
    }
    P.resize(nx);
    DP.resize(nx);
    for (int i = 0; i < nx; ++i) {
      P[i] = phi.value(t, grid.x(i));
      DP[i] = phi.dx(t, grid.x(i));
    }
    if (!only_first && j != 0.0) DX = spectral_dx_columns(X, nx, nv, grid.length);
    else DX.assign(X.size(), 0.0);
  };

  std::vector<double> X, P, DX, DP;
  double psi0 = 1.0;
  if (phi.separable()) {
    psi0 = phi.time_factor(0.0);
    if (psi0 == 0.0) throw InputError("corrector terms: separable phi needs psi(0) != 0");
    matrices(0.0, X, P, DX, DP);
  }

  StepSeries out;
  for (const auto& f : run.records) {
    const double t = f.t;
    double scale = 1.0;
    if (phi.separable()) scale = phi.time_factor(t) / psi0;
    else matrices(t, X, P, DX, DP);
    const auto rho = f.density();
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (int i = 0; i < nx; ++i) {
      const double ri = rho.values[i];
      double m = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
      for (int jv = 0; jv < nv; ++jv) {
        const std::size_t ij = std::size_t(i) * nv + jv;
        const double g = f(i, jv) - ri * vg.F[jv];
        m += vg.w[jv] * vg.b[jv] * g;
        a1 += vg.w[jv] * vg.p[jv] * (X[ij] - P[i]);
        a2 += vg.w[jv] * DX[ij] * g;
        a3 += vg.w[jv] * vg.F[jv] * (DX[ij] - DP[i]);
      }
      s1 += h * model.nu0(grid.x(i)) * m * a1;
      s2 += h * a2;
      s3 += h * ri * a3;
    }
    out.t.push_back(t);
    out.s1.push_back(scale * s1);
    out.s2.push_back(j * scale * s2);
    out.s3.push_back(j * scale * s3);
  }
  return out;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) s += 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
  return s;
}

} // namespace

CorrectorTerms corrector_terms(const Model& model, const TestFunction& phi,
                               const KineticRun& run, const CorrectorOptions& copt) {
  const auto s = step_series(model, phi, run, copt, false);
  const double g = model.gamma(), eps = run.eps;
  CorrectorTerms out;
  out.eps = eps;
  out.step1 = std::pow(eps, -g) * trapezoid(s.t, s.s1);
  out.step2 = std::pow(eps, 1.0 - g) * trapezoid(s.t, s.s2);
  out.step3 = std::pow(eps, 1.0 - g) * trapezoid(s.t, s.s3);
  return out;
}

double corrector_term_Qplus(const Model& model, const TestFunction& phi, const KineticRun& run) {
  const auto s = step_series(model, phi, run, {}, true);
  return std::pow(run.eps, -model.gamma()) * trapezoid(s.t, s.s1);
}

} // namespace fracdiff
