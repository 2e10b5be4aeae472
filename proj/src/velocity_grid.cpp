#include "fracdiff/velocity_grid.hpp"

#include "fracdiff/errors.hpp"
#include "fracdiff/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fracdiff {

VelocityLayout parse_velocity_layout(const std::string& name) {
  if (name == "log_panels") return VelocityLayout::LogPanels;
  if (name == "compactified") return VelocityLayout::Compactified;
  throw ConfigError("unknown velocity layout '" + name +
                    "' (expected log_panels or compactified)");
}

std::string to_string(VelocityLayout layout) {
  return layout == VelocityLayout::LogPanels ? "log_panels" : "compactified";
}

double vmax_for_tail_mass(const Model& model, double tail_mass) {
  const double v = std::pow(2.0 * model.kappa() / (model.alpha() * tail_mass),
                            1.0 / model.alpha());
  return std::clamp(v, 2.0, 1e8);
}

namespace {

void append_panel(std::vector<double>& v, std::vector<double>& w, double a,
                  double b, int order) {
  const QuadratureRule rule = gauss_legendre(order, a, b);
  v.insert(v.end(), rule.nodes.begin(), rule.nodes.end());
  w.insert(w.end(), rule.weights.begin(), rule.weights.end());
}

void log_panel_nodes(const VelocityGridOptions& opt, double vmax,
                     std::vector<double>& v, std::vector<double>& w) {
  const int order = opt.panel_order;
  // nv = order * (4 core panels + 2 * tail panels per side)
  const int tail_panels =
      std::max(1, static_cast<int>(std::lround((double(opt.nv) / order - 4.0) / 2.0)));
  const double smax = std::log(vmax);
  const double ds = smax / tail_panels;
  std::vector<double> sv, sw;
  for (int k = 0; k < tail_panels; ++k) append_panel(sv, sw, k * ds, (k + 1) * ds, order);
  for (std::size_t k = sv.size(); k-- > 0;) {
    const double s = std::exp(sv[k]);
    v.push_back(-s);
    w.push_back(sw[k] * s);
  }
  for (int k = 0; k < 4; ++k) append_panel(v, w, -1.0 + 0.5 * k, -0.5 + 0.5 * k, order);
  for (std::size_t k = 0; k < sv.size(); ++k) {
    const double s = std::exp(sv[k]);
    v.push_back(s);
    w.push_back(sw[k] * s);
  }
}

void compactified_nodes(const VelocityGridOptions& opt, double vmax,
                        std::vector<double>& v, std::vector<double>& w) {
  if (opt.nv < 3 || opt.nv % 2 == 0)
    throw ConfigError("compactified velocity grid needs an odd nv >= 3");
  const double umax = vmax / (1.0 + vmax);
  const double du = 2.0 * umax / (opt.nv - 1);
  for (int j = 0; j < opt.nv; ++j) {
    const double u = -umax + j * du;
    const double jac = 1.0 / ((1.0 - std::abs(u)) * (1.0 - std::abs(u)));
    const double trap = (j == 0 || j == opt.nv - 1) ? 0.5 : 1.0;
    v.push_back(u / (1.0 - std::abs(u)));
    w.push_back(trap * du * jac);
  }
  // Exact zero at the centre node.
  v[opt.nv / 2] = 0.0;
}

} // namespace

VelocityGrid make_velocity_grid(const Model& model, const VelocityGridOptions& opt) {
  VelocityGrid g;
  g.layout = opt.layout;
  const double vmax =
      opt.v_max > 0.0 ? opt.v_max : vmax_for_tail_mass(model, opt.tail_mass_target);
  if (!(vmax > 1.0)) throw ConfigError("velocity grid v_max must exceed 1");
  if (opt.layout == VelocityLayout::LogPanels)
    log_panel_nodes(opt, vmax, g.v, g.w);
  else
    compactified_nodes(opt, vmax, g.v, g.w);

  const std::size_t n = g.v.size();
  g.v_max = std::max(std::abs(g.v.front()), std::abs(g.v.back()));
  const double side_tail = model.kappa() / model.alpha() * std::pow(vmax, -model.alpha());
  g.tail_mass = 2.0 * side_tail;

  std::vector<double> mass(n);
  for (std::size_t j = 0; j < n; ++j) mass[j] = g.w[j] * model.equilibrium_pdf(g.v[j]);
  mass.front() += side_tail;
  mass.back() += side_tail;
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  g.quadrature_defect = std::abs(total - 1.0);

  g.F.resize(n);
  g.b.resize(n);
  g.p.resize(n);
  double cb = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    g.F[j] = mass[j] / total / g.w[j];
    g.b[j] = bracket_pow(g.v[j], model.beta());
    cb += g.w[j] * g.b[j] * g.F[j];
  }
  g.c_beta_h = cb;
  for (std::size_t j = 0; j < n; ++j) g.p[j] = g.b[j] * g.F[j] / cb;
  return g;
}

} // namespace fracdiff
