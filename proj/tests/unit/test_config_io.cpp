#include "doctest.h"

#include "fracdiff/config.hpp"
#include "fracdiff/errors.hpp"
#include "fracdiff/io.hpp"

#include <cmath>
#include <filesystem>
#include <limits>

using namespace fracdiff;

namespace {

std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "fracdiff_unit";
  ensure_directory(dir.string());
  return (dir / name).string();
}

std::string message_of(const std::string& text) {
  try {
    parse_config(text, "test.cfg");
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

} // namespace

TEST_CASE("minimal config falls back to defaults") {
  const RunConfig c = parse_config("# only a comment\nmodel.alpha = 0.8\n\n");
  CHECK(c.model.alpha == 0.8);
  RunConfig d;
  d.model.alpha = 0.8;
  CHECK(c == d);
  CHECK(c.discretization.nx == 256);
  CHECK(c.experiment.eps_list == std::vector<double>{0.4, 0.2, 0.1, 0.05});
}

TEST_CASE("config errors carry the line and the violated inequality") {
  CHECK_THROWS_AS(parse_config("model.alpha = 1.5\nmodel.beta = 1.4\n"), ValidationError);
  CHECK(message_of("model.alpha = 1.5\nmodel.beta = 1.4\n").find("2-alpha = 0.5") !=
        std::string::npos);
  CHECK_THROWS_AS(parse_config("model.alpha = 1.5\nmodel.gamma = 2\n"), ConfigError);
  CHECK(message_of("model.alpha = 1.5\nmodel.gamma = 2\n").find("test.cfg:2:") == 0);
  CHECK(message_of("model.alpha = 1\nmodel.alpha = 1\n").find("repeated") != std::string::npos);
  CHECK(message_of("discretization.nx = many\n").find("test.cfg:1:") == 0);
  CHECK_THROWS_AS(parse_config("experiment.eps_list = 0.1, 0.2\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("output.formats = csv, xml\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/fracdiff.cfg"), ConfigError);
}

TEST_CASE("serialize and parse round-trip exactly") {
  RunConfig c;
  c.model.alpha = 11.0 / 15.0;
  c.model.beta = 0.1;
  c.model.nu0_delta = 0.3;
  c.discretization.scheme_order = "2";
  c.discretization.dt_policy = DtPolicy::Cfl;
  c.discretization.velocity_layout = VelocityLayout::Compactified;
  c.experiment.eps_list = {0.3, 0.1 / 3.0};
  c.experiment.snapshot_times = {0.1, 0.2};
  c.experiment.seed = 18446744073709551557ull;
  c.experiment.rho0_profile = ProfileKind::Uniform;
  c.output.formats = {"json", "binary"};
  CHECK(parse_config(serialize(RunConfig{})) == RunConfig{});
  const RunConfig back = parse_config(serialize(c));
  CHECK(back == c);
  CHECK(serialize(back) == serialize(c));
  CHECK(transport_scheme(back.discretization) == TransportScheme::Muscl);
}

TEST_CASE("csv writers") {
  DensityField rho{SpatialGrid{4, 2.0}, {0.1, 0.2, 0.3, 0.4}, 0.0, "test"};
  const std::string csv = density_csv(rho);
  CHECK(csv == "x,rho\n0.25,0.1\n0.75,0.2\n1.25,0.3\n1.75,0.4\n");
  rho.values[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(density_csv(rho), IoError);
  CHECK_THROWS_AS(table_csv({"a", "b"}, {{1.0}}), IoError);
  const std::string d = diagnostics_csv({{0.5, 1.0, 2.0, 1.0, 0.0, 0.3}});
  CHECK(d.rfind("t,gnorm2,bound,mass,min_f,rho_l2\n", 0) == 0);
}

TEST_CASE("json manifest echoes the config and refuses NaN") {
  RunConfig c;
  c.model.kappa = 0.15;
  const auto j = manifest("unit", c);
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["kind"] == "unit");
  CHECK(j["config"]["model.kappa"] == "0.15");
  CHECK(j["config"].size() == 35);
  nlohmann::json bad = j;
  bad["value"] = std::nan("");
  CHECK_THROWS_AS(dump_json(bad), IoError);
  bad["value"] = {1.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(dump_json(bad), IoError);
}

TEST_CASE("binary phase-field dump round-trips bit for bit") {
  const Model m(ModelParams{});
  VelocityGridOptions vo;
  vo.nv = 33;
  auto vg = make_shared_velocity_grid(m, vo);
  PhaseField f(SpatialGrid{8, m.length()}, vg, 0.125);
  for (std::size_t k = 0; k < f.data().size(); ++k) f.data()[k] = std::sin(1.0 + double(k)) / 3.0;
  const std::string path = temp_path("phase.bin");
  write_phase_binary(path, f);
  const auto d = read_phase_binary(path);
  CHECK(d.nx == 8);
  CHECK(d.nv == f.nv());
  CHECK(d.length == m.length());
  CHECK(d.t == 0.125);
  CHECK(d.values == f.data());
  CHECK(std::filesystem::file_size(path) == 32 + 8 * f.data().size());

  write_text(path, "short");
  CHECK_THROWS_AS(read_phase_binary(path), IoError);
  f.data()[3] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(write_phase_binary(path, f), IoError);
}
