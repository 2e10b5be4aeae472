#pragma once

#include "fracdiff/fields.hpp"
#include "fracdiff/kinetic_fv.hpp"
#include "fracdiff/model.hpp"
#include "fracdiff/test_function.hpp"

#include <vector>

namespace fracdiff {

struct CorrectorOptions {
  int laguerre_nodes = 64;
  // Gauss-Laguerre in the hazard variable while the mean flight length
  // |c| / nu1 stays below threshold * (length scale of phi); beyond that the
  // exact periodic formula over one period is used.
  double regime_threshold = 0.4;
  int panel_order = 12;
  double panels_per_scale = 4.0;
};

// Evaluates the corrector
//   chi(t,x,v) = int_0^inf nu0(x + c z) exp(-U(z)) phi(t, x + c z) dz,
//   c = eps <v>^{-beta} v,  U(z) = int_0^z nu0(x + c s) ds,
// (the <v>^{-beta} renormalization turns the rate nu into nu0 exactly).
class CorrectorEval {
public:
  CorrectorEval(const Model& model, double eps, CorrectorOptions opt = {});

  double eps() const { return eps_; }
  const Model& model() const { return model_; }
  // Displacement per unit hazard time, eps <v>^{-beta} v.
  double flight_speed(double v) const;
  // Cumulative hazard U(z) for the flight from x at speed c (closed form).
  double hazard(double x, double c, double z) const;

  double chi(const TestSlice& phi, double x, double v) const;
  double chi(const TestFunction& phi, double t, double x, double v) const;
  double chi_dt(const TestFunction& phi, double t, double x, double v) const;

  // chi at the cells of `grid` for one velocity. For long flights a
  // cell-to-cell recurrence closed periodically replaces pointwise
  // evaluation.
  std::vector<double> chi_row(const TestSlice& phi, const SpatialGrid& grid, double v) const;

  // int_0^inf nu0(x + c z) exp(-U(z)) dz by composite quadrature in z plus
  // the closed-form remainder; equals 1 when U is the antiderivative of the
  // rate.
  double hazard_weight_integral(double x, double v) const;

  // Gauss-Laguerre weight sum used by chi (1 up to round-off).
  double laguerre_weight_sum() const;

private:
  bool use_laguerre(const TestSlice& phi, double c) const;
  double invert_hazard(double x, double c, double u) const;
  double chi_laguerre(const TestSlice& phi, double x, double c) const;
  double chi_periodic(const TestSlice& phi, double x, double c) const;
  double panel_width(const TestSlice& phi, double c) const;

  const Model& model_;
  double eps_;
  CorrectorOptions opt_;
};

// Velocity quadrature for continuous integrals over R: Gauss-Legendre panels
// on the core and in ln|v| for the tails up to v_cut.
struct VelocityQuadrature {
  std::vector<double> v;
  std::vector<double> w;
  double v_cut = 0.0;
};

// v_cut chosen so that flights beyond it cross the period at least 1e6
// times per unit hazard.
VelocityQuadrature continuous_velocity_quadrature(const Model& model, double eps);

// Torus average of nu0 phi divided by mean(nu0): the limit of chi as |v| -> inf.
double chi_limit_value(const Model& model, const TestSlice& phi);

struct ChiGapResult {
  double eps = 0.0;
  double gap = 0.0;     // int int int F (chi - phi)^2
  double gap_dt = 0.0;  // same for d_t chi - d_t phi
  double chi_norm2 = 0.0, phi_norm2 = 0.0;
  double chi_dt_norm2 = 0.0, phi_dt_norm2 = 0.0;
  // sup over the sample grid of |chi - phi| / ((nu2/nu1) eps |v| <v>^{-beta} ||phi_x||_inf)
  double sup_bound_ratio = 0.0;
  bool sup_bound_ok = false;
};

struct GapOptions {
  int nx = 256;         // spatial cells over one period
  int time_nodes = 32;  // Gauss-Legendre nodes over the time support
};

ChiGapResult chi_gap_report(const Model& model, const TestFunction& phi, double eps,
                            const GapOptions& opt = {}, const CorrectorOptions& copt = {});

double chi_l2f_gap(const Model& model, const TestFunction& phi, double eps,
                   bool use_time_derivative, const GapOptions& opt = {});

// eps^{-gamma} int nu F (chi - phi - (eps/nu) drift d_x phi) dv at (t, x).
double operator_limit_lhs(const Model& model, const TestFunction& phi, double eps, double t,
                          double x, const CorrectorOptions& copt = {});

// int_{|v| <= 1} nu F (chi - phi - eps (v/nu) d_x phi) dv, without the
// eps^{-gamma} factor (bounded by C eps^2 ||phi||_{W^{2,inf}}).
double small_velocity_part(const Model& model, const TestFunction& phi, double eps, double t,
                           double x, const CorrectorOptions& copt = {});

struct CorrectorTerms {
  double eps = 0.0;
  double step1 = 0.0;  // eps^{-gamma} int Q+(g) (chi - phi)
  double step2 = 0.0;  // eps^{1-gamma} int drift d_x chi g
  double step3 = 0.0;  // eps^{1-gamma} int drift d_x (chi - phi) rho F
};

// Evaluates the three corrector terms on the run's grid from its records
// (trapezoid in time over evenly spaced records). Throws InputError when
// the run holds fewer than two records.
CorrectorTerms corrector_terms(const Model& model, const TestFunction& phi,
                               const KineticRun& run, const CorrectorOptions& copt = {});

double corrector_term_Qplus(const Model& model, const TestFunction& phi, const KineticRun& run);

} // namespace fracdiff
