#include "fracdiff/io.hpp"

#include "fracdiff/errors.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fracdiff {

namespace {

std::string num(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void check_tree(const nlohmann::json& j, const std::string& path) {
  if (j.is_number_float()) {
    require_finite(j.get<double>(), path.empty() ? "json value" : path);
  } else if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) check_tree(it.value(), path + "/" + it.key());
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) check_tree(j[i], path + "/" + std::to_string(i));
  }
}

} // namespace

void require_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw IoError("refusing to serialize non-finite value in " + what);
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::string density_csv(const DensityField& rho) {
  std::string s = "x,rho\n";
  for (int i = 0; i < rho.grid.nx; ++i) {
    require_finite(rho.values[i], "density field");
    s += num(rho.grid.x(i)) + "," + num(rho.values[i]) + "\n";
  }
  return s;
}

void write_density_csv(const std::string& path, const DensityField& rho) {
  write_text(path, density_csv(rho));
}

std::string diagnostics_csv(const std::vector<KineticDiagnostic>& diags) {
  std::vector<std::vector<double>> rows;
  for (const auto& d : diags) rows.push_back({d.t, d.gnorm2, d.bound, d.mass, d.min_f, d.rho_l2});
  return table_csv({"t", "gnorm2", "bound", "mass", "min_f", "rho_l2"}, rows);
}

std::string table_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::string s;
  for (std::size_t k = 0; k < header.size(); ++k) s += (k ? "," : "") + header[k];
  s += "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw IoError("csv row width differs from the header");
    for (std::size_t k = 0; k < row.size(); ++k) {
      require_finite(row[k], "csv column '" + header[k] + "'");
      s += (k ? "," : "") + num(row[k]);
    }
    s += "\n";
  }
  return s;
}

nlohmann::json config_json(const RunConfig& config) {
  // Echo through the flat key format so the manifest mirrors the file.
  nlohmann::json j = nlohmann::json::object();
  std::istringstream in(serialize(config));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

nlohmann::json manifest(const std::string& kind, const RunConfig& config) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = kind;
  j["config"] = config_json(config);
  return j;
}

std::string dump_json(const nlohmann::json& j) {
  check_tree(j, "");
  return j.dump(2) + "\n";
}

void write_json(const std::string& path, const nlohmann::json& j) {
  write_text(path, dump_json(j));
}

void write_phase_binary(const std::string& path, const PhaseField& f) {
  for (double v : f.data()) require_finite(v, "phase field");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  const std::int64_t nx = f.nx(), nv = f.nv();
  const double length = f.grid().length, t = f.t;
  out.write(reinterpret_cast<const char*>(&nx), sizeof nx);
  out.write(reinterpret_cast<const char*>(&nv), sizeof nv);
  out.write(reinterpret_cast<const char*>(&length), sizeof length);
  out.write(reinterpret_cast<const char*>(&t), sizeof t);
  out.write(reinterpret_cast<const char*>(f.data().data()),
            std::streamsize(f.data().size() * sizeof(double)));
  if (!out) throw IoError("write failed for '" + path + "'");
}

PhaseFieldDump read_phase_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  PhaseFieldDump d;
  in.read(reinterpret_cast<char*>(&d.nx), sizeof d.nx);
  in.read(reinterpret_cast<char*>(&d.nv), sizeof d.nv);
  in.read(reinterpret_cast<char*>(&d.length), sizeof d.length);
  in.read(reinterpret_cast<char*>(&d.t), sizeof d.t);
  if (!in || d.nx <= 0 || d.nv <= 0 || d.nx > (1 << 24) || d.nv > (1 << 24))
    throw IoError("'" + path + "' does not start with a valid phase-field header");
  d.values.resize(std::size_t(d.nx) * std::size_t(d.nv));
  in.read(reinterpret_cast<char*>(d.values.data()),
          std::streamsize(d.values.size() * sizeof(double)));
  if (!in) throw IoError("'" + path + "' is truncated");
  return d;
}

} // namespace fracdiff
