#include "fracdiff/nonlocal.hpp"

#include "fracdiff/errors.hpp"
#include "fracdiff/quadrature.hpp"

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <sstream>

namespace fracdiff {

double eta_offset(const Model& model, double x, double w) {
  const double g = model.gamma();
  const double avg = model.nu0_mean_along(x, w);
  return model.nu0(x) * model.nu0(x + w) * std::tgamma(g + 1.0) / std::pow(avg, g + 1.0);
}

double eta(const Model& model, double x, double y) { return eta_offset(model, x, y - x); }

double eta_lower_bound(const Model& model) {
  const double g = model.gamma();
  return model.nu1() * model.nu1() * std::tgamma(g + 1.0) / std::pow(model.nu2(), g + 1.0);
}

double eta_upper_bound(const Model& model) {
  const double g = model.gamma();
  return model.nu2() * model.nu2() * std::tgamma(g + 1.0) / std::pow(model.nu1(), g + 1.0);
}

namespace {

void require_order(double g) {
  if (!(g > 0.0 && g < 2.0)) {
    std::ostringstream os;
    os << "operator order gamma = " << g << " outside (0, 2)";
    throw ValidationError(os.str());
  }
}

} // namespace

double fractional_constant(double g) {
  require_order(g);
  // [0, 1]: termwise integration of the cosine series.
  double near = 0.0, fact = 1.0;
  for (int k = 1; k < 30; ++k) {
    fact *= (2.0 * k - 1.0) * (2.0 * k);
    const double term = 1.0 / (fact * (2.0 * k - g));
    near += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  // [1, inf): int w^{-1-g} = 1/g minus the oscillatory part, shifted to
  // start at 0 and split into cosine and sine transforms.
  boost::math::quadrature::ooura_fourier_cos<double> cosq(1e-13);
  boost::math::quadrature::ooura_fourier_sin<double> sinq(1e-13);
  auto f = [g](double u) { return std::pow(1.0 + u, -1.0 - g); };
  const double ic = cosq.integrate(f, 1.0).first;
  const double is = sinq.integrate(f, 1.0).first;
  const double osc = std::cos(1.0) * ic - std::sin(1.0) * is;
  return 2.0 * (near + 1.0 / g - osc);
}

double fractional_constant_closed_form(double g) {
  require_order(g);
  return std::numbers::pi / (std::tgamma(1.0 + g) * std::sin(0.5 * std::numbers::pi * g));
}

double fourier_multiplier_constant(const Model& model) {
  if (model.params().nu0_delta != 0.0)
    throw ValidationError("Fourier reference needs a constant nu0 (nu0_delta = 0)");
  const double g = model.gamma();
  const double eta0 = std::tgamma(g + 1.0) * std::pow(model.params().nu0_mean, 1.0 - g);
  return eta0 * fractional_constant(g) / (1.0 - model.beta());
}

KernelTable::KernelTable(const Model& model, const SpatialGrid& grid, int images)
    : model_(model), grid_(grid), images_(images) {
  if (images < 1) throw ValidationError("kernel table needs at least one periodic image");
  const int n = grid.nx;
  base_.resize(std::size_t(n) * n);
  average_.resize(std::size_t(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double w = grid.x(j) - grid.x(i);
      base_[std::size_t(i) * n + j] = eta_offset(model, grid.x(i), w);
      average_[std::size_t(i) * n + j] = model.nu0_mean_along(grid.x(i), w);
    }
  }
}

double KernelTable::value(int i, int j, int m) const {
  if (m == 0) return base_[std::size_t(i) * grid_.nx + j];
  return eta_offset(model_, grid_.x(i), grid_.x(j) + m * grid_.length - grid_.x(i));
}

double KernelTable::line_average(int i, int j, int m) const {
  if (m == 0) return average_[std::size_t(i) * grid_.nx + j];
  return model_.nu0_mean_along(grid_.x(i), grid_.x(j) + m * grid_.length - grid_.x(i));
}

std::vector<double> lattice_weights(double g, int n_max, double* near_correction) {
  require_order(g);
  const auto& q = gauss_legendre(20);
  auto ramp = [&](double a, double b, bool rising) {
    // int over [a, b] of the hat's linear piece times s^{-1-g}
    double s = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      const double t = 0.5 * (1.0 + q.nodes[k]);
      const double sv = a + (b - a) * t;
      s += 0.5 * q.weights[k] * (rising ? t : 1.0 - t) * std::pow(sv, -1.0 - g);
    }
    return s * (b - a);
  };
  // Piecewise-linear interpolation misses int_0^1 s^{1-g} on the first cell
  // and over-counts the curvature t(1-t) on every other; adding the balance
  // to the n = 1 weight makes the symmetric rule exact for quadratics.
  const int n0 = 20000;
  double defect = 0.0;
  for (int n = n0; n >= 1; --n) {
    double s = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      const double t = 0.5 * (1.0 + q.nodes[k]);
      s += 0.5 * q.weights[k] * t * (1.0 - t) * std::pow(n + t, -1.0 - g);
    }
    defect += s;
  }
  defect += std::pow(n0 + 1.0, -g) / (6.0 * g);
  const double mu = 1.0 / (2.0 - g) - defect;
  if (near_correction) *near_correction = mu;

  std::vector<double> w(std::max(n_max, 1) + 1, 0.0);
  w[1] = ramp(1.0, 2.0, false) + mu;
  for (int n = 2; n <= n_max; ++n)
    w[n] = ramp(n - 1.0, n, true) + ramp(n, n + 1.0, false);
  return w;
}

NonlocalOperator assemble(const Model& model, const SpatialGrid& grid, int images) {
  if (grid.nx < 16) throw ValidationError("nonlocal assembly needs nx >= 16");
  if (images < 1) throw ValidationError("nonlocal assembly needs K >= 1 periodic images");
  if (std::abs(grid.length - model.length()) > 1e-12 * model.length())
    throw ValidationError("nonlocal assembly: grid length differs from the domain length");
  const double g = model.gamma();
  require_order(g);
  const int nx = grid.nx;
  const double h = grid.dx();
  const int n_max = int(std::floor((images + 0.5) * nx));

  NonlocalOperator op;
  op.gamma = g;
  op.images = images;
  op.h = h;
  op.weights = lattice_weights(g, n_max, &op.near_correction);
  const double scale = std::pow(h, -g) / (1.0 - model.beta());
  const bool constant = model.params().nu0_delta == 0.0;
  const double eta_const = constant ? eta_offset(model, 0.0, 0.0) : 0.0;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nx, nx);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nx; ++i) {
    const double x = grid.x(i);
    for (int n = 1; n <= n_max; ++n) {
      for (int sgn : {1, -1}) {
        const double e = constant ? eta_const : eta_offset(model, x, sgn * n * h);
        const int j = ((i + sgn * n) % nx + nx) % nx;
        A(i, j) -= scale * op.weights[n] * e;
      }
    }
  }
  // Symmetrize and close the rows so that constants are annihilated.
  Eigen::MatrixXd S = 0.5 * (A + A.transpose());
  op.m_matrix = true;
  for (int i = 0; i < nx; ++i) {
    double off = 0.0;
    for (int j = 0; j < nx; ++j) {
      if (j == i) continue;
      off += S(i, j);
      if (S(i, j) > 0.0) op.m_matrix = false;
    }
    S(i, i) = -off;
  }
  // Far field |w| > R: y runs over the torus many times and the segment
  // average of nu0 tends to its mean, so the neglected part is a rank-one
  // interaction (2 R^{-g} / g) (h / L) eta_far(x_i, x_j) (rho_i - rho_j).
  const double reach = (n_max + 0.5) * h;
  const double nbar = model.params().nu0_mean;
  const double far = 2.0 * std::pow(reach, -g) / g * (h / grid.length) * std::tgamma(g + 1.0) /
                     std::pow(nbar, g + 1.0) / (1.0 - model.beta());
  std::vector<double> n0(nx);
  for (int i = 0; i < nx; ++i) n0[i] = model.nu0(grid.x(i));
  for (int i = 0; i < nx; ++i) {
    double row = 0.0;
    for (int j = 0; j < nx; ++j) {
      if (j == i) continue;
      const double c = far * n0[i] * n0[j];
      S(i, j) -= c;
      row += c;
    }
    S(i, i) += row;
  }
  op.A = std::move(S);
  op.tail_bound = 2.0 * eta_upper_bound(model) * std::pow(reach, -g) / (g * (1.0 - model.beta()));
  return op;
}

double apply_continuous(const Model& model, const TestSlice& phi, double x) {
  if (phi.time_derivative)
    throw InputError("apply_continuous: slice must hold phi itself, not d_t phi");
  const double g = model.gamma();
  const double length = model.length();
  const double scale = std::min(1.0, phi.phi->length_scale());
  const double p0 = phi(x);
  auto pair = [&](double w) {
    return eta_offset(model, x, w) * (p0 - phi(x + w)) +
           eta_offset(model, x, -w) * (p0 - phi(x - w));
  };

  // [0, w0]: the pair sum is S2 w^2 + O(w^4).
  const double w0 = 1e-3 * scale;
  const double d = 1e-4 * scale;
  const double eta0 = eta_offset(model, x, 0.0);
  const double eta1 = (eta_offset(model, x, d) - eta_offset(model, x, -d)) / (2.0 * d);
  const double s2 = -(eta0 * phi.phi->dxx(phi.t, x) + 2.0 * eta1 * phi.dx(x));
  double total = s2 * std::pow(w0, 2.0 - g) / (2.0 - g);

  const auto& q = gauss_legendre(12);
  auto panel = [&](double a, double b) {
    double s = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      const double w = a + 0.5 * (b - a) * (1.0 + q.nodes[k]);
      s += q.weights[k] * pair(w) * std::pow(w, -1.0 - g);
    }
    return 0.5 * (b - a) * s;
  };
  double a = w0;
  while (a < scale) {
    const double b = std::min(2.0 * a, scale);
    total += panel(a, b);
    a = b;
  }
  const double far = 400.0 * length;
  const int panels = int(std::ceil((far - scale) / (0.25 * scale)));
  const double hw = (far - scale) / panels;
  for (int p = 0; p < panels; ++p) total += panel(scale + p * hw, scale + (p + 1) * hw);

  // Beyond `far` the segment average is nu0_mean and the periodic factor
  // averages out: 2 Gamma(g+1) nu0(x) (mean * phi(x) - <nu0 phi>) far^{-g} / (g mean^{g+1}).
  const int m = 4096;
  double avg = 0.0;
  for (int i = 0; i < m; ++i) {
    const double y = length * i / m;
    avg += model.nu0(y) * phi(y);
  }
  avg /= m;
  const double mean = model.params().nu0_mean;
  total += 2.0 * std::tgamma(g + 1.0) * model.nu0(x) * (mean * p0 - avg) * std::pow(far, -g) /
           (g * std::pow(mean, g + 1.0));
  return total / (1.0 - model.beta());
}

double apply_fourier(const Model& model, const TestSlice& phi, double x, int modes) {
  const double cstar = fourier_multiplier_constant(model);
  const double length = model.length();
  const double g = model.gamma();
  std::vector<double> in(modes);
  for (int i = 0; i < modes; ++i) in[i] = phi(length * i / modes);
  std::vector<std::complex<double>> spec(modes / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(modes, in.data(),
                                        reinterpret_cast<fftw_complex*>(spec.data()),
                                        FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  double s = 0.0;
  for (int k = 1; k < (modes + 1) / 2; ++k) {
    const double xi = 2.0 * std::numbers::pi * k / length;
    const std::complex<double> e = std::polar(1.0, xi * x);
    s += 2.0 * cstar * std::pow(xi, g) * (spec[k] * e).real();
  }
  return s / modes;
}

DensityField fourier_reference(const Model& model, const DensityField& rho0, double t) {
  const double cstar = fourier_multiplier_constant(model);
  const int n = rho0.grid.nx;
  const double length = rho0.grid.length;
  const double g = model.gamma();
  std::vector<double> data(rho0.values);
  std::vector<std::complex<double>> spec(n / 2 + 1);
  auto* cs = reinterpret_cast<fftw_complex*>(spec.data());
  fftw_plan fwd = fftw_plan_dft_r2c_1d(n, data.data(), cs, FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_dft_c2r_1d(n, cs, data.data(), FFTW_ESTIMATE);
  fftw_execute(fwd);
  for (int k = 0; k <= n / 2; ++k) {
    const double xi = 2.0 * std::numbers::pi * k / length;
    const double decay = k == 0 ? 1.0 : std::exp(-model.kappa() * cstar * std::pow(xi, g) * t);
    spec[k] *= decay / n;
  }
  fftw_execute(bwd);
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
  DensityField out{rho0.grid, std::move(data), rho0.t + t, "fourier_reference"};
  return out;
}

MacroSolution solve_macro(const Model& model, const NonlocalOperator& op,
                          const DensityField& rho0, const MacroOptions& opt) {
  if (!(opt.dt > 0.0)) throw ValidationError("macro solve: dt must be positive");
  if (!(opt.t_final >= 0.0)) throw ValidationError("macro solve: t_final must be >= 0");
  const int n = rho0.grid.nx;
  if (op.A.rows() != n) throw ValidationError("macro solve: operator size differs from rho0");
  const double kappa = model.kappa();
  const double h = rho0.grid.dx();

  MacroSolution sol;
  const double amax = op.A.diagonal().maxCoeff();
  if (kappa * opt.dt * amax / 2.0 > 1.0) {
    std::ostringstream os;
    os << "Crank-Nicolson dt = " << opt.dt << " exceeds the maximum-principle limit "
       << 2.0 / (kappa * amax) << "; grid-scale oscillations may appear";
    sol.warnings.push_back(os.str());
  }

  std::vector<double> stops(opt.snapshot_times);
  stops.push_back(opt.t_final);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  for (double s : stops)
    if (s < 0.0 || s > opt.t_final)
      throw ValidationError("macro solve: snapshot times must lie in [0, t_final]");

  std::map<double, Eigen::LLT<Eigen::MatrixXd>> factors;
  auto factor_for = [&](double dt) -> const Eigen::LLT<Eigen::MatrixXd>& {
    auto it = factors.find(dt);
    if (it != factors.end()) return it->second;
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n) + 0.5 * kappa * dt * op.A;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
      throw NumericError("macro solve: Crank-Nicolson matrix is not positive definite");
    return factors.emplace(dt, std::move(llt)).first->second;
  };

  Eigen::VectorXd rho = Eigen::Map<const Eigen::VectorXd>(rho0.values.data(), n);
  const double max0 = rho.maxCoeff();
  double t = 0.0;
  auto snapshot = [&](double time) {
    DensityField f{rho0.grid, std::vector<double>(rho.data(), rho.data() + n), rho0.t + time,
                   "macro"};
    return f;
  };
  for (double stop : stops) {
    const double span = stop - t;
    if (span > 0.0) {
      const long steps = std::max(1L, long(std::ceil(span / opt.dt - 1e-9)));
      const double dt = span / steps;
      const auto& llt = factor_for(dt);
      for (long s = 0; s < steps; ++s) {
        Eigen::VectorXd rhs = rho - 0.5 * kappa * dt * (op.A * rho);
        rho = llt.solve(rhs);
        sol.energy.push_back(h * rho.squaredNorm());
        sol.max_principle_excess = std::max(sol.max_principle_excess, rho.maxCoeff() - max0);
      }
      t = stop;
    }
    if (std::find(opt.snapshot_times.begin(), opt.snapshot_times.end(), stop) !=
        opt.snapshot_times.end())
      sol.snapshots.push_back(snapshot(stop));
  }
  sol.final_field = snapshot(opt.t_final);
  if (!rho.allFinite()) throw NumericError("macro solve produced non-finite values");
  return sol;
}

} // namespace fracdiff
