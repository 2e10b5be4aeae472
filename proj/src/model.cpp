#include "fracdiff/model.hpp"

#include "fracdiff/errors.hpp"
#include "fracdiff/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fracdiff {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

void require_exponents(double alpha, double beta) {
  if (!(alpha > 0.0))
    throw ValidationError("alpha <= 0: the tail exponent must be positive (alpha = " +
                          fmt(alpha) + ")");
  if (!(beta < alpha))
    throw ValidationError("beta >= min(alpha, 2-alpha): need beta < alpha = " +
                          fmt(alpha) + " (beta = " + fmt(beta) + ")");
  if (!(beta < 2.0 - alpha))
    throw ValidationError("beta >= min(alpha, 2-alpha): need beta < 2-alpha = " +
                          fmt(2.0 - alpha) + " (beta = " + fmt(beta) + ")");
  if (!(beta > -alpha))
    throw ValidationError(
        "beta <= -alpha: the coercivity integrals diverge; need beta > -alpha = " +
        fmt(-alpha) + " (beta = " + fmt(beta) + ")");
}

} // namespace

void validate(const ModelParams& p) {
  require_exponents(p.alpha, p.beta);
  if (!(p.kappa > 0.0))
    throw ValidationError("kappa <= 0: the tail constant must be positive");
  if (!(p.kappa < 0.5 * p.alpha))
    throw ValidationError("kappa >= alpha/2: need kappa < " + fmt(0.5 * p.alpha) +
                          " so the core height is positive (kappa = " +
                          fmt(p.kappa) + ")");
  if (!(p.core_asym > -1.0 && p.core_asym < 1.0))
    throw ValidationError("core_asym outside (-1, 1): the core density must stay positive");
  if (!(p.nu0_mean > 0.0))
    throw ValidationError("nu0_mean <= 0: the mean collision frequency must be positive");
  if (!(p.nu0_delta >= 0.0 && p.nu0_delta < 1.0))
    throw ValidationError("nu0_delta outside [0, 1): nu0 must stay bounded away from 0");
  if (!(p.domain_length > 0.0))
    throw ValidationError("domain_length <= 0");
}

double gamma_exponent(double alpha, double beta) {
  require_exponents(alpha, beta);
  return (alpha - beta) / (1.0 - beta);
}

Model::Model(const ModelParams& params) : p_(params) {
  validate(p_);
  gamma_ = gamma_exponent(p_.alpha, p_.beta);
  core_height_ = 0.5 * (1.0 - 2.0 * p_.kappa / p_.alpha);
  c_beta_ = moment(p_.beta);
  c_negbeta_ = moment(-p_.beta);
}

double Model::nu0_gradient_bound() const {
  return 2.0 * std::numbers::pi * p_.nu0_mean * p_.nu0_delta / p_.domain_length;
}

double Model::moment(double s) const {
  if (!(s < p_.alpha))
    throw ValidationError("moment of order s >= alpha diverges");
  return 2.0 * core_height_ + 2.0 * p_.kappa / (p_.alpha - s);
}

double Model::truncated_first_moment(double r) const {
  // The power tails are even, so only the affine core contributes.
  const double rc = std::min(std::abs(r), 1.0);
  return 2.0 * core_height_ * p_.core_asym * rc * rc * rc / 3.0;
}

double Model::first_moment() const { return truncated_first_moment(1.0); }

double Model::equilibrium_pdf(double v) const {
  const double a = std::abs(v);
  if (a < 1.0) return core_height_ * (1.0 + p_.core_asym * v);
  return p_.kappa * std::pow(a, -(1.0 + p_.alpha));
}

double Model::post_collision_pdf(double v) const {
  return bracket_pow(v, p_.beta) * equilibrium_pdf(v) / c_beta_;
}

double Model::cdf_weighted(double v, double s) const {
  const double q = p_.alpha - s;
  const double tail = p_.kappa / q;
  if (v <= -1.0) return tail * std::pow(-v, -q);
  if (v < 1.0)
    return tail +
           core_height_ * ((v + 1.0) + 0.5 * p_.core_asym * (v * v - 1.0));
  return moment(s) - tail * std::pow(v, -q);
}

double Model::equilibrium_cdf(double v) const { return cdf_weighted(v, 0.0); }

double Model::post_collision_cdf(double v) const {
  return cdf_weighted(v, p_.beta) / c_beta_;
}

double Model::inverse_cdf(double u, double s) const {
  const double q = p_.alpha - s;
  const double tail = p_.kappa / q;
  const double cs = moment(s);
  const double mass = u * cs;
  if (mass <= tail) return -std::pow(mass / tail, -1.0 / q);
  if (mass >= tail + 2.0 * core_height_) {
    const double upper = (1.0 - u) * cs;
    return std::pow(upper / tail, -1.0 / q);
  }
  // Core: A[(v+1) + a(v^2-1)/2] = mass - tail, solved in the form that
  // stays accurate as a -> 0.
  const double a = p_.core_asym;
  const double c0 = 1.0 - 0.5 * a - (mass - tail) / core_height_;
  const double disc = std::max(1.0 - 2.0 * a * c0, 0.0);
  const double v = -2.0 * c0 / (1.0 + std::sqrt(disc));
  return std::clamp(v, -1.0, 1.0);
}

double Model::nu0(double x) const {
  return p_.nu0_mean *
         (1.0 + p_.nu0_delta * std::cos(2.0 * std::numbers::pi * x / p_.domain_length));
}

double Model::nu0_integral(double x0, double x1) const {
  return (x1 - x0) * nu0_mean_along(x0, x1 - x0);
}

double Model::nu0_segment_average(double x, double y) const {
  return nu0_mean_along(x, y - x);
}

double Model::nu0_mean_along(double x, double d) const {
  // (1/d) int_x^{x+d} cos(k s) ds = cos(k (x + d/2)) sinc(k d / 2)
  const double k = 2.0 * std::numbers::pi / p_.domain_length;
  const double half = 0.5 * k * d;
  const double sinc = std::abs(half) < 1e-4
                          ? 1.0 - half * half / 6.0 * (1.0 - half * half / 20.0)
                          : std::sin(half) / half;
  return p_.nu0_mean * (1.0 + p_.nu0_delta * std::cos(k * (x + 0.5 * d)) * sinc);
}

double Model::collision_frequency(double x, double v) const {
  return nu0(x) * bracket_pow(v, p_.beta);
}

double Model::kernel_b(double x, double v, double vp) const {
  return nu0(x) * bracket_pow(v, p_.beta) * bracket_pow(vp, p_.beta) / c_beta_;
}

double Model::cross_section(double x, double v, double vp) const {
  return kernel_b(x, v, vp) * equilibrium_pdf(v);
}

double Model::time_scale(double eps) const { return std::pow(eps, gamma_); }

double Model::critical_speed(double eps) const {
  return std::pow(eps, -1.0 / (1.0 - p_.beta));
}

double Model::drift(double eps) const {
  if (!(eps > 0.0 && eps <= 1.0))
    throw ValidationError("drift: eps must lie in (0, 1]");
  if (p_.alpha < 1.0) return 0.0;
  if (p_.alpha == 1.0) return truncated_first_moment(critical_speed(eps));
  return first_moment();
}

namespace {

// int_R g(v') dv' split at 0 and +-1; tails integrated in s = ln|v'|.
double integrate_velocity(const std::function<double(double)>& g) {
  const double core = integrate_adaptive(g, -1.0, 0.0, 1e-14) +
                      integrate_adaptive(g, 0.0, 1.0, 1e-14);
  auto right = [&](double s) {
    if (s > 700.0) return 0.0;  // e^s overflows; the tail is long negligible
    const double v = std::exp(s);
    return g(v) * v;
  };
  auto left = [&](double s) {
    if (s > 700.0) return 0.0;  // e^s overflows; the tail is long negligible
    const double v = std::exp(s);
    return g(-v) * v;
  };
  return core + integrate_to_infinity(right, 0.0, 1e-14) +
         integrate_to_infinity(left, 0.0, 1e-14);
}

} // namespace

double Model::coercivity_constant(int nx, int nv) const {
  double sup = 0.0;
  for (int i = 0; i < nx; ++i) {
    const double x = p_.domain_length * i / nx;
    for (int j = 0; j < nv; ++j) {
      // Velocities spread over the core and well into both tails.
      const double t = -1.0 + 2.0 * (j + 0.5) / nv;
      const double v = 50.0 * std::sinh(3.0 * t) / std::sinh(3.0);
      const double nu_v = collision_frequency(x, v);
      auto first = [&](double vp) {
        return equilibrium_pdf(vp) * nu_v / kernel_b(x, v, vp);
      };
      auto second = [&](double vp) {
        const double b = kernel_b(x, v, vp);
        return equilibrium_pdf(vp) / collision_frequency(x, vp) * b * b / (nu_v * nu_v);
      };
      const double value =
          integrate_velocity(first) + std::sqrt(integrate_velocity(second));
      sup = std::max(sup, value);
    }
  }
  return sup;
}

double Model::coercivity_closed_form() const {
  return c_beta_ * c_negbeta_ + 1.0 / std::sqrt(nu1() * c_beta_);
}

} // namespace fracdiff
