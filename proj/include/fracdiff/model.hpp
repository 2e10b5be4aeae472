#pragma once

#include "fracdiff/rng.hpp"

#include <cmath>

namespace fracdiff {

// Parameters of the heavy-tail equilibrium / separable cross-section family.
struct ModelParams {
  double alpha = 1.5;      // tail exponent
  double beta = 0.0;       // collision-frequency exponent
  double kappa = 0.2;      // tail constant
  double core_asym = 0.5;  // slope of the affine core, |a| < 1
  double nu0_mean = 1.0;
  double nu0_delta = 0.0;  // relative modulation of nu0(x)
  double domain_length = 20.0;

  bool operator==(const ModelParams&) const = default;
};

// Throws ValidationError naming the first violated inequality.
void validate(const ModelParams& p);

// (alpha - beta) / (1 - beta), after checking the exponent constraints.
double gamma_exponent(double alpha, double beta);

// <v>^s: 1 inside the unit ball, |v|^s outside.
inline double bracket_pow(double v, double s) {
  const double a = std::abs(v);
  return a <= 1.0 ? 1.0 : std::pow(a, s);
}

class Model {
public:
  explicit Model(const ModelParams& params);

  const ModelParams& params() const { return p_; }
  double alpha() const { return p_.alpha; }
  double beta() const { return p_.beta; }
  double kappa() const { return p_.kappa; }
  double length() const { return p_.domain_length; }
  double gamma() const { return gamma_; }
  double core_height() const { return core_height_; }
  double c_beta() const { return c_beta_; }
  double c_negbeta() const { return c_negbeta_; }
  double nu1() const { return p_.nu0_mean * (1.0 - p_.nu0_delta); }
  double nu2() const { return p_.nu0_mean * (1.0 + p_.nu0_delta); }
  // sup |d nu0/dx|
  double nu0_gradient_bound() const;

  // int <v>^s F dv, finite for s < alpha.
  double moment(double s) const;
  // int_{-r}^{r} v F dv
  double truncated_first_moment(double r) const;
  double first_moment() const;

  double equilibrium_pdf(double v) const;
  double equilibrium_cdf(double v) const;
  double post_collision_pdf(double v) const;
  double post_collision_cdf(double v) const;

  double nu0(double x) const;
  // int_{x0}^{x1} nu0, along the unwrapped line.
  double nu0_integral(double x0, double x1) const;
  // Average of nu0 over the segment between x and y (nu0(x) when x == y).
  double nu0_segment_average(double x, double y) const;
  // Average of nu0 over [x, x + d], accurate for any |d| (no cancellation).
  double nu0_mean_along(double x, double d) const;

  double collision_frequency(double x, double v) const;
  // Symmetric part b of the cross-section sigma = b F(v).
  double kernel_b(double x, double v, double vp) const;
  double cross_section(double x, double v, double vp) const;

  double time_scale(double eps) const;  // eps^gamma
  double drift(double eps) const;
  // Truncation radius eps^{-1/(1-beta)} entering the drift for alpha = 1.
  double critical_speed(double eps) const;

  // Inverse CDF of the density <v>^s F / c_s (s = 0: equilibrium,
  // s = beta: post-collision law).
  double inverse_cdf(double u, double s) const;
  double sample_equilibrium(CounterRng& rng) const {
    return inverse_cdf(rng.uniform(), 0.0);
  }
  double sample_post_collision(CounterRng& rng) const {
    return inverse_cdf(rng.uniform(), p_.beta);
  }

  // Coercivity constant: sup over an (x, v) grid of the two integrals,
  // each evaluated by adaptive quadrature.
  double coercivity_constant(int nx = 64, int nv = 64) const;
  // c_beta c_{-beta} + (nu1 c_beta)^{-1/2}
  double coercivity_closed_form() const;

private:
  double cdf_weighted(double v, double s) const;

  ModelParams p_;
  double gamma_ = 0.0;
  double core_height_ = 0.0;
  double c_beta_ = 0.0;
  double c_negbeta_ = 0.0;
};

} // namespace fracdiff
