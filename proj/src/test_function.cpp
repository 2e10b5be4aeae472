#include "fracdiff/test_function.hpp"

#include "fracdiff/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

namespace fracdiff {

double BumpEnvelope::value(double t) const {
  if (support <= 0.0) return 1.0;
  const double s = t / support;
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double BumpEnvelope::derivative(double t) const {
  if (support <= 0.0) return 0.0;
  const double s = t / support;
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return value(t) * (-2.0 * s / (support * q * q));
}

double TestSlice::dx(double x) const {
  if (!time_derivative) return phi->dx(t, x);
  // d_x d_t phi by a centred difference in t; only used for sup norms.
  const double h = 1e-6 * std::max(1.0, std::abs(t));
  return (phi->dx(t + h, x) - phi->dx(t - h, x)) / (2.0 * h);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sum over the periodic images y = x - c + m L with |y| <= 39 w, the range
// outside which exp(-y^2 / 2w^2) underflows.
template <class Fn>
double image_sum(double x, double c, double w, double period, Fn fn) {
  if (period <= 0.0) return fn(x - c);
  const double reach = 39.0 * w;
  const double m_lo = std::ceil((c - x - reach) / period);
  const double m_hi = std::floor((c - x + reach) / period);
  double s = 0.0;
  for (double m = m_lo; m <= m_hi; m += 1.0) s += fn(x - c + m * period);
  return s;
}

class Constant final : public TestFunction {
public:
  Constant(double c, double period, double envelope) : c_(c), period_(period), env_{envelope} {}
  double value(double t, double) const override { return c_ * env_.value(t); }
  double dt(double t, double) const override { return c_ * env_.derivative(t); }
  double dx(double, double) const override { return 0.0; }
  double dxx(double, double) const override { return 0.0; }
  double period() const override { return period_; }
  double length_scale() const override { return kInf; }
  double time_support() const override { return env_.support > 0.0 ? env_.support : kInf; }
  bool separable() const override { return true; }
  double time_factor(double t) const override { return env_.value(t); }
  double time_factor_dt(double t) const override { return env_.derivative(t); }
  std::string name() const override { return "constant"; }

private:
  double c_, period_;
  BumpEnvelope env_;
};

class WavePacket final : public TestFunction {
public:
  WavePacket(double period, double center, double width, double k, double omega,
             double envelope, std::string name)
      : period_(period), c_(center), w_(width), k_(k), omega_(omega), env_{envelope},
        name_(std::move(name)) {
    if (!(width > 0.0)) throw ConfigError("test function width must be positive");
  }

  double value(double t, double x) const override {
    return env_.value(t) * spatial(t, x, 0);
  }
  double dt(double t, double x) const override {
    double d = env_.derivative(t) * spatial(t, x, 0);
    if (omega_ != 0.0) d += env_.value(t) * spatial(t, x, 3);
    return d;
  }
  double dx(double t, double x) const override { return env_.value(t) * spatial(t, x, 1); }
  double dxx(double t, double x) const override { return env_.value(t) * spatial(t, x, 2); }
  double period() const override { return period_; }
  double length_scale() const override { return k_ > 0.0 ? std::min(w_, 1.0 / k_) : w_; }
  double time_support() const override { return env_.support > 0.0 ? env_.support : kInf; }
  bool separable() const override { return omega_ == 0.0; }
  double time_factor(double t) const override { return env_.value(t); }
  double time_factor_dt(double t) const override { return env_.derivative(t); }
  std::string name() const override { return name_; }

private:
  // order 0..2: x-derivatives of G(y) cos(k y - omega t); order 3: d/dt.
  double spatial(double t, double x, int order) const {
    const double w2 = w_ * w_;
    return image_sum(x, c_, w_, period_, [&](double y) {
      const double g = std::exp(-0.5 * y * y / w2);
      const double ph = k_ * y - omega_ * t;
      const double cs = std::cos(ph), sn = k_ != 0.0 || omega_ != 0.0 ? std::sin(ph) : 0.0;
      switch (order) {
      case 0: return g * cs;
      case 1: return g * (-y / w2 * cs - k_ * sn);
      case 2: {
        const double g1 = -y / w2, g2 = y * y / (w2 * w2) - 1.0 / w2;
        return g * (g2 * cs - 2.0 * k_ * g1 * sn - k_ * k_ * cs);
      }
      default: return g * omega_ * sn;
      }
    });
  }

  double period_, c_, w_, k_, omega_;
  BumpEnvelope env_;
  std::string name_;
};

class PlaneWave final : public TestFunction {
public:
  PlaneWave(double period, int mode, double phase)
      : period_(period), k_(2.0 * std::numbers::pi * mode / period), phase_(phase) {}
  double value(double, double x) const override { return std::cos(k_ * x + phase_); }
  double dt(double, double) const override { return 0.0; }
  double dx(double, double x) const override { return -k_ * std::sin(k_ * x + phase_); }
  double dxx(double, double x) const override { return -k_ * k_ * std::cos(k_ * x + phase_); }
  double period() const override { return period_; }
  double length_scale() const override { return k_ > 0.0 ? 1.0 / k_ : kInf; }
  double time_support() const override { return kInf; }
  bool separable() const override { return true; }
  double time_factor(double) const override { return 1.0; }
  double time_factor_dt(double) const override { return 0.0; }
  std::string name() const override { return "plane_wave"; }

private:
  double period_, k_, phase_;
};

class Affine final : public TestFunction {
public:
  Affine(double a, double s) : a_(a), s_(s) {}
  double value(double, double x) const override { return a_ + s_ * x; }
  double dt(double, double) const override { return 0.0; }
  double dx(double, double) const override { return s_; }
  double dxx(double, double) const override { return 0.0; }
  double period() const override { return 0.0; }
  double length_scale() const override { return kInf; }
  double time_support() const override { return kInf; }
  bool separable() const override { return true; }
  double time_factor(double) const override { return 1.0; }
  double time_factor_dt(double) const override { return 0.0; }
  std::string name() const override { return "affine"; }

private:
  double a_, s_;
};

} // namespace

void TestFunction::self_check(double tol) const {
  const double ts = std::isfinite(time_support()) ? time_support() : 1.0;
  const double ls = std::isfinite(length_scale()) ? length_scale() : 1.0;
  const double p = period();
  std::vector<double> xs;
  if (p > 0.0)
    xs = {0.13 * p, 0.41 * p, 0.5 * p + 0.3 * ls, 0.5 * p - 0.7 * ls, 0.77 * p};
  else
    xs = {-1.3, 0.2, 2.7};
  const std::vector<double> tt = {0.1 * ts, 0.37 * ts, 0.6 * ts};

  double scale = 0.0;
  for (double t : tt)
    for (double x : xs) scale = std::max(scale, std::abs(value(t, x)));
  if (scale == 0.0) scale = 1.0;

  const double hx = 1e-4 * ls, ht = 1e-5 * ts;
  auto check = [&](const char* what, double analytic, double numeric, double ref, double t,
                   double x) {
    if (std::abs(analytic - numeric) > tol * (std::abs(analytic) + ref)) {
      std::ostringstream os;
      os << "test function '" << name() << "': analytic " << what << " = " << analytic
         << " disagrees with finite differences (" << numeric << ") at t = " << t
         << ", x = " << x;
      throw NumericError(os.str());
    }
  };
  for (double t : tt) {
    for (double x : xs) {
      const double fd_x = (value(t, x + hx) - value(t, x - hx)) / (2.0 * hx);
      const double fd_xx =
          (value(t, x + hx) - 2.0 * value(t, x) + value(t, x - hx)) / (hx * hx);
      const double fd_t = (value(t + ht, x) - value(t - ht, x)) / (2.0 * ht);
      check("d/dx", dx(t, x), fd_x, scale / ls, t, x);
      check("d2/dx2", dxx(t, x), fd_xx, 10.0 * scale / (ls * ls), t, x);
      check("d/dt", dt(t, x), fd_t, scale / ts, t, x);
    }
  }
}

std::unique_ptr<TestFunction> make_constant(double c, double period, double envelope) {
  auto f = std::make_unique<Constant>(c, period, envelope);
  f->self_check();
  return f;
}

std::unique_ptr<TestFunction> make_gaussian_bump(double period, double center, double width,
                                                 double envelope) {
  auto f = std::make_unique<WavePacket>(period, center, width, 0.0, 0.0, envelope, "gaussian");
  f->self_check();
  return f;
}

std::unique_ptr<TestFunction> make_wave_packet(double period, double center, double width,
                                               double wavenumber, double omega,
                                               double envelope) {
  auto f = std::make_unique<WavePacket>(period, center, width, wavenumber, omega, envelope,
                                        "wave_packet");
  f->self_check();
  return f;
}

std::unique_ptr<TestFunction> make_plane_wave(double period, int mode, double phase) {
  auto f = std::make_unique<PlaneWave>(period, mode, phase);
  f->self_check();
  return f;
}

std::unique_ptr<TestFunction> make_affine(double a, double s) {
  auto f = std::make_unique<Affine>(a, s);
  f->self_check();
  return f;
}

std::unique_ptr<TestFunction> make_test_function(const std::string& name, double period,
                                                 double envelope) {
  if (name == "gaussian") return make_gaussian_bump(period, 0.5 * period, 1.0, envelope);
  if (name == "wave_packet")
    return make_wave_packet(period, 0.5 * period, 1.0, 1.5, 0.0, envelope);
  if (name == "constant") return make_constant(1.0, period, envelope);
  throw ConfigError("unknown test function '" + name +
                    "' (expected gaussian, wave_packet or constant)");
}

} // namespace fracdiff
