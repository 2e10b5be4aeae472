#pragma once

#include "fracdiff/fields.hpp"
#include "fracdiff/model.hpp"
#include "fracdiff/test_function.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace fracdiff {

// eta(x, y) = nu0(x) nu0(y) Gamma(gamma+1) / avg(nu0 on [x, y])^{gamma+1}
double eta(const Model& model, double x, double y);
// Same with y = x + w, accurate for small |w|.
double eta_offset(const Model& model, double x, double w);
double eta_lower_bound(const Model& model);
double eta_upper_bound(const Model& model);

// C(g) = int_R (1 - cos w) / |w|^{1+g} dw by quadrature, and the classical
// closed form pi / (Gamma(1+g) sin(pi g / 2)).
double fractional_constant(double g);
double fractional_constant_closed_form(double g);

// Multiplier c* = eta C(gamma) / (1 - beta) of the constant-coefficient
// operator (delta = 0); throws ValidationError otherwise.
double fourier_multiplier_constant(const Model& model);

class KernelTable {
public:
  KernelTable(const Model& model, const SpatialGrid& grid, int images);

  const SpatialGrid& grid() const { return grid_; }
  int images() const { return images_; }
  // eta(x_i, x_j + m L)
  double value(int i, int j, int m = 0) const;
  // Segment average of nu0 between x_i and x_j + m L.
  double line_average(int i, int j, int m = 0) const;

private:
  const Model& model_;
  SpatialGrid grid_;
  int images_;
  std::vector<double> base_;     // m = 0, row-major nx * nx
  std::vector<double> average_;  // m = 0
};

struct NonlocalOperator {
  Eigen::MatrixXd A;
  double gamma = 0.0;
  int images = 0;
  double h = 0.0;
  // Weights of the rule on the unit lattice: weights[n] multiplies
  // h^{-gamma} eta (rho(x) - rho(x + n h)) / (1 - beta), n >= 1.
  std::vector<double> weights;
  double near_correction = 0.0;  // added to weights[1] for exactness on quadratics
  double tail_bound = 0.0;       // operator weight beyond the images (mean-field approximated)
  bool m_matrix = false;         // all off-diagonal entries <= 0

  Eigen::VectorXd apply(const Eigen::VectorXd& rho) const { return A * rho; }
};

// Lattice weights: int hat_n(s) s^{-1-g} ds for n >= 2 and the corrected
// n = 1 weight; entries 0..n_max.
std::vector<double> lattice_weights(double g, int n_max, double* near_correction = nullptr);

NonlocalOperator assemble(const Model& model, const SpatialGrid& grid, int images);

// (L phi)(x) = (1/(1-beta)) PV int eta(x,y) (phi(x) - phi(y)) / |x-y|^{1+gamma} dy
// for a smooth periodic slice by direct quadrature (symmetric pairing near
// w = 0, analytic tail for far images).
double apply_continuous(const Model& model, const TestSlice& phi, double x);
// Same for delta = 0 through the Fourier series of the slice.
double apply_fourier(const Model& model, const TestSlice& phi, double x, int modes = 4096);

DensityField fourier_reference(const Model& model, const DensityField& rho0, double t);

struct MacroOptions {
  double dt = 1e-3;
  double t_final = 0.5;
  std::vector<double> snapshot_times;
};

struct MacroSolution {
  std::vector<DensityField> snapshots;
  DensityField final_field;
  std::vector<double> energy;  // int rho^2 after each step
  std::vector<std::string> warnings;
  double max_principle_excess = 0.0;  // max(0, max rho(t) - max rho0)
};

MacroSolution solve_macro(const Model& model, const NonlocalOperator& op,
                          const DensityField& rho0, const MacroOptions& opt);

} // namespace fracdiff
