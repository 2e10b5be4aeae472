#include "fracdiff/config.hpp"

#include "fracdiff/errors.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace fracdiff {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double to_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("expected a number, got '" + s + "'");
  return v;
}

long to_long(const std::string& s) {
  long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("expected a non-negative integer, got '" + s + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty entry in list '" + s + "'");
    out.push_back(item);
  }
  return out;
}

std::vector<double> to_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(to_double(item));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

DtPolicy parse_dt_policy(const std::string& s) {
  if (s == "collision") return DtPolicy::Collision;
  if (s == "cfl") return DtPolicy::Cfl;
  if (s == "fixed") return DtPolicy::Fixed;
  throw ConfigError("unknown dt_policy '" + s + "' (expected collision, cfl or fixed)");
}

std::string dt_policy_name(DtPolicy p) {
  switch (p) {
  case DtPolicy::Collision: return "collision";
  case DtPolicy::Cfl: return "cfl";
  case DtPolicy::Fixed: return "fixed";
  }
  return "collision";
}

struct Key {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define FD_DOUBLE(path)                                                             \
  Key{[](RunConfig& c, const std::string& v) { c.path = to_double(v); },           \
      [](const RunConfig& c) { return fmt(c.path); }}
#define FD_INT(path)                                                                \
  Key{[](RunConfig& c, const std::string& v) { c.path = static_cast<decltype(c.path)>(to_long(v)); }, \
      [](const RunConfig& c) { return std::to_string(c.path); }}

const std::vector<std::pair<std::string, Key>>& key_table() {
  static const std::vector<std::pair<std::string, Key>> table = {
      {"model.alpha", FD_DOUBLE(model.alpha)},
      {"model.beta", FD_DOUBLE(model.beta)},
      {"model.kappa", FD_DOUBLE(model.kappa)},
      {"model.core_asym", FD_DOUBLE(model.core_asym)},
      {"model.nu0_mean", FD_DOUBLE(model.nu0_mean)},
      {"model.nu0_delta", FD_DOUBLE(model.nu0_delta)},
      {"model.domain_length", FD_DOUBLE(model.domain_length)},
      {"discretization.nx", FD_INT(discretization.nx)},
      {"discretization.nv", FD_INT(discretization.nv)},
      {"discretization.velocity_layout",
       Key{[](RunConfig& c, const std::string& v) {
             try {
               c.discretization.velocity_layout = parse_velocity_layout(v);
             } catch (const std::exception& e) {
               throw ConfigError(e.what());
             }
           },
           [](const RunConfig& c) { return to_string(c.discretization.velocity_layout); }}},
      {"discretization.vmax_policy",
       Key{[](RunConfig& c, const std::string& v) {
             if (v != "tail_mass" && v != "fixed")
               throw ConfigError("unknown vmax_policy '" + v + "' (expected tail_mass or fixed)");
             c.discretization.vmax_policy = v;
           },
           [](const RunConfig& c) { return c.discretization.vmax_policy; }}},
      {"discretization.v_max", FD_DOUBLE(discretization.v_max)},
      {"discretization.tail_mass", FD_DOUBLE(discretization.tail_mass)},
      {"discretization.scheme_order",
       Key{[](RunConfig& c, const std::string& v) {
             if (v != "1" && v != "2" && v != "spectral")
               throw ConfigError("unknown scheme_order '" + v + "' (expected 1, 2 or spectral)");
             c.discretization.scheme_order = v;
           },
           [](const RunConfig& c) { return c.discretization.scheme_order; }}},
      {"discretization.dt_policy",
       Key{[](RunConfig& c, const std::string& v) { c.discretization.dt_policy = parse_dt_policy(v); },
           [](const RunConfig& c) { return dt_policy_name(c.discretization.dt_policy); }}},
      {"discretization.dt_factor", FD_DOUBLE(discretization.dt_factor)},
      {"discretization.dt_fixed", FD_DOUBLE(discretization.dt_fixed)},
      {"discretization.diagnostic_count", FD_INT(discretization.diagnostic_count)},
      {"discretization.record_count", FD_INT(discretization.record_count)},
      {"discretization.images", FD_INT(discretization.images)},
      {"discretization.macro_dt", FD_DOUBLE(discretization.macro_dt)},
      {"experiment.eps_list",
       Key{[](RunConfig& c, const std::string& v) { c.experiment.eps_list = to_doubles(v); },
           [](const RunConfig& c) { return join(c.experiment.eps_list); }}},
      {"experiment.t_final", FD_DOUBLE(experiment.t_final)},
      {"experiment.snapshot_times",
       Key{[](RunConfig& c, const std::string& v) { c.experiment.snapshot_times = to_doubles(v); },
           [](const RunConfig& c) { return join(c.experiment.snapshot_times); }}},
      {"experiment.particles", FD_INT(experiment.particles)},
      {"experiment.mc_eps", FD_DOUBLE(experiment.mc_eps)},
      {"experiment.mc_bins", FD_INT(experiment.mc_bins)},
      {"experiment.seed",
       Key{[](RunConfig& c, const std::string& v) { c.experiment.seed = to_u64(v); },
           [](const RunConfig& c) { return std::to_string(c.experiment.seed); }}},
      {"experiment.phi_choice",
       Key{[](RunConfig& c, const std::string& v) {
             if (v != "gaussian" && v != "wave_packet" && v != "constant")
               throw ConfigError("unknown phi_choice '" + v +
                                 "' (expected gaussian, wave_packet or constant)");
             c.experiment.phi_choice = v;
           },
           [](const RunConfig& c) { return c.experiment.phi_choice; }}},
      {"experiment.phi_envelope", FD_DOUBLE(experiment.phi_envelope)},
      {"experiment.rho0_profile",
       Key{[](RunConfig& c, const std::string& v) {
             try {
               c.experiment.rho0_profile = parse_profile_kind(v);
             } catch (const std::exception& e) {
               throw ConfigError(e.what());
             }
           },
           [](const RunConfig& c) { return to_string(c.experiment.rho0_profile); }}},
      {"experiment.rho0_width", FD_DOUBLE(experiment.rho0_width)},
      {"experiment.rho0_center", FD_DOUBLE(experiment.rho0_center)},
      {"output.dir",
       Key{[](RunConfig& c, const std::string& v) { c.output.dir = v; },
           [](const RunConfig& c) { return c.output.dir; }}},
      {"output.formats",
       Key{[](RunConfig& c, const std::string& v) {
             auto f = split_list(v);
             for (const auto& s : f)
               if (s != "csv" && s != "json" && s != "binary" && s != "gnuplot")
                 throw ConfigError("unknown output format '" + s +
                                   "' (expected csv, json, binary, gnuplot)");
             c.output.formats = f;
           },
           [](const RunConfig& c) { return join(c.output.formats); }}},
  };
  return table;
}

#undef FD_DOUBLE
#undef FD_INT

} // namespace

void validate(const RunConfig& c) {
  validate(c.model);
  const auto& d = c.discretization;
  if (d.nx < 16) throw ValidationError("discretization.nx must be >= 16");
  if (d.nv < 9) throw ValidationError("discretization.nv must be >= 9");
  if (d.vmax_policy == "fixed" && !(d.v_max > 1.0))
    throw ValidationError("discretization.v_max must exceed 1 when vmax_policy = fixed");
  if (!(d.tail_mass > 0.0 && d.tail_mass < 0.1))
    throw ValidationError("discretization.tail_mass must lie in (0, 0.1)");
  if (!(d.dt_factor > 0.0)) throw ValidationError("discretization.dt_factor must be positive");
  if (d.dt_policy == DtPolicy::Fixed && !(d.dt_fixed > 0.0))
    throw ValidationError("discretization.dt_fixed must be positive when dt_policy = fixed");
  if (d.diagnostic_count < 1) throw ValidationError("discretization.diagnostic_count must be >= 1");
  if (d.record_count < 0) throw ValidationError("discretization.record_count must be >= 0");
  if (d.images < 1) throw ValidationError("discretization.images must be >= 1");
  if (!(d.macro_dt > 0.0)) throw ValidationError("discretization.macro_dt must be positive");

  const auto& e = c.experiment;
  if (e.eps_list.empty()) throw ValidationError("experiment.eps_list is empty");
  for (std::size_t i = 0; i < e.eps_list.size(); ++i) {
    if (!(e.eps_list[i] > 0.0 && e.eps_list[i] <= 1.0))
      throw ValidationError("experiment.eps_list entries must lie in (0, 1]");
    if (i > 0 && !(e.eps_list[i] < e.eps_list[i - 1]))
      throw ValidationError("experiment.eps_list must be strictly decreasing");
  }
  if (!(e.t_final > 0.0)) throw ValidationError("experiment.t_final must be positive");
  for (double t : e.snapshot_times)
    if (!(t >= 0.0 && t <= e.t_final))
      throw ValidationError("experiment.snapshot_times must lie in [0, t_final]");
  if (e.particles < 0) throw ValidationError("experiment.particles must be >= 0");
  if (!(e.mc_eps > 0.0 && e.mc_eps <= 1.0))
    throw ValidationError("experiment.mc_eps must lie in (0, 1]");
  if (e.mc_bins < 2) throw ValidationError("experiment.mc_bins must be >= 2");
  if (!(e.phi_envelope > 0.0)) throw ValidationError("experiment.phi_envelope must be positive");
  if (!(e.rho0_width > 0.0)) throw ValidationError("experiment.rho0_width must be positive");
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  std::map<std::string, const Key*> keys;
  for (const auto& [name, key] : key_table()) keys[name] = &key;

  RunConfig c;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto where = [&] { return source + ":" + std::to_string(lineno) + ": "; };
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where() + "expected 'section.key = value', got '" + line + "'");
    const std::string name = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = keys.find(name);
    if (it == keys.end()) throw ConfigError(where() + "unknown key '" + name + "'");
    if (!seen.insert(name).second) throw ConfigError(where() + "key '" + name + "' repeated");
    try {
      it->second->set(c, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where() + name + ": " + e.what());
    }
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string serialize(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& [name, key] : key_table()) {
    const std::string sec = name.substr(0, name.find('.'));
    if (sec != section) {
      if (!section.empty()) out += "\n";
      section = sec;
    }
    out += name + " = " + key.get(config) + "\n";
  }
  return out;
}

TransportScheme transport_scheme(const DiscretizationConfig& d) {
  if (d.scheme_order == "1") return TransportScheme::Upwind;
  if (d.scheme_order == "2") return TransportScheme::Muscl;
  return TransportScheme::Spectral;
}

InitialProfile initial_profile(const ExperimentConfig& e) {
  InitialProfile p;
  p.kind = e.rho0_profile;
  p.width = e.rho0_width;
  p.center = e.rho0_center;
  return p;
}

KineticOptions kinetic_options(const RunConfig& c) {
  const auto& d = c.discretization;
  KineticOptions o;
  o.nx = d.nx;
  o.velocity.layout = d.velocity_layout;
  o.velocity.nv = d.nv;
  o.velocity.v_max = d.vmax_policy == "fixed" ? d.v_max : 0.0;
  o.velocity.tail_mass_target = d.tail_mass;
  o.scheme = transport_scheme(d);
  o.rho0 = initial_profile(c.experiment);
  o.t_final = c.experiment.t_final;
  o.dt_policy = d.dt_policy;
  o.dt_factor = d.dt_factor;
  o.dt_fixed = d.dt_fixed;
  o.snapshot_times = c.experiment.snapshot_times;
  o.diagnostic_count = d.diagnostic_count;
  o.record_count = d.record_count;
  return o;
}

} // namespace fracdiff
