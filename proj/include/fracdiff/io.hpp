#pragma once

#include "fracdiff/config.hpp"
#include "fracdiff/fields.hpp"
#include "fracdiff/kinetic_fv.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fracdiff {

inline constexpr int kSchemaVersion = 1;

// Throws IoError naming `what` when v is NaN or infinite.
void require_finite(double v, const std::string& what);

void ensure_directory(const std::string& dir);
void write_text(const std::string& path, const std::string& text);

// Header `x,rho`, one row per cell.
std::string density_csv(const DensityField& rho);
void write_density_csv(const std::string& path, const DensityField& rho);

// Header `t,gnorm2,bound,mass,min_f,rho_l2`.
std::string diagnostics_csv(const std::vector<KineticDiagnostic>& diags);

// Generic table with a header row; every value must be finite.
std::string table_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

// Manifest skeleton: schema_version, kind and the full config echo.
nlohmann::json manifest(const std::string& kind, const RunConfig& config);
nlohmann::json config_json(const RunConfig& config);
// Pretty-printed; rejects non-finite numbers anywhere in the tree.
std::string dump_json(const nlohmann::json& j);
void write_json(const std::string& path, const nlohmann::json& j);

// Binary phase-field dump, little-endian host layout:
//   int64 nx, int64 nv, double L, double t, then nx*nv doubles (x-major).
struct PhaseFieldDump {
  std::int64_t nx = 0, nv = 0;
  double length = 0.0, t = 0.0;
  std::vector<double> values;
};

void write_phase_binary(const std::string& path, const PhaseField& f);
PhaseFieldDump read_phase_binary(const std::string& path);

} // namespace fracdiff
