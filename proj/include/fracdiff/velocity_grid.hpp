#pragma once

#include "fracdiff/model.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace fracdiff {

enum class VelocityLayout {
  LogPanels,     // Gauss-Legendre panels on the core and in ln|v| on the tails
  Compactified,  // uniform in u = v / (1 + |v|), trapezoid weights
};

VelocityLayout parse_velocity_layout(const std::string& name);
std::string to_string(VelocityLayout layout);

struct VelocityGridOptions {
  VelocityLayout layout = VelocityLayout::LogPanels;
  int nv = 257;          // target node count (exact for Compactified, odd)
  double v_max = 0.0;    // 0: chosen from the tail-mass target
  double tail_mass_target = 1e-8;
  int panel_order = 8;   // Gauss-Legendre nodes per panel (LogPanels)
};

// Discrete velocity space. Weights w carry the Jacobian; the discrete
// equilibrium F is calibrated so that sum w F = 1 exactly, the tail mass
// beyond v_max being lumped into the two outermost nodes.
struct VelocityGrid {
  VelocityLayout layout = VelocityLayout::LogPanels;
  std::vector<double> v;
  std::vector<double> w;
  std::vector<double> F;
  std::vector<double> b;  // <v>^beta
  std::vector<double> p;  // b F / c_beta_h, sum w p = 1
  double c_beta_h = 1.0;
  double v_max = 0.0;
  double tail_mass = 0.0;          // analytic mass beyond v_max, both sides
  double quadrature_defect = 0.0;  // |sum w F(v) + tail_mass - 1| before calibration

  std::size_t size() const { return v.size(); }
};

// Speed beyond which the equilibrium carries at most `tail_mass` (both
// tails), capped at 1e8.
double vmax_for_tail_mass(const Model& model, double tail_mass);

VelocityGrid make_velocity_grid(const Model& model, const VelocityGridOptions& opt);

} // namespace fracdiff
