#include "nanobus/cli/runner.hpp"

#include <gtest/gtest.h>

#include <regex>

namespace cli = nanobus::cli;
namespace fs = std::filesystem;
using cli::Json;

namespace {

Json sample(const std::string& name) { return cli::load_json_file(std::string(NANOBUS_CONFIG_DIR) + "/" + name + ".json"); }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "nanobus_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct Run {
  int code = -1;
  std::string err;
  fs::path out;
};

Run run_cli(const std::string& name, const Json& doc, std::vector<std::string> extra = {}) {
  Run r;
  const fs::path dir = scratch(name);
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << doc.dump(2);
  r.out = dir / "out";
  std::vector<std::string> args{"nanobus", "--config", cfg.string(), "--out", r.out.string()};
  args.insert(args.end(), extra.begin(), extra.end());
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  testing::internal::CaptureStderr();
  r.code = cli::run_main(static_cast<int>(argv.size()), argv.data());
  r.err = testing::internal::GetCapturedStderr();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(slurp(p));
  std::string line;
  while (std::getline(ss, line)) {
    EXPECT_FALSE(line.empty());
    EXPECT_EQ(line.back(), '\r');
    line.pop_back();
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  EXPECT_NE(it, header.end()) << name;
  return static_cast<std::size_t>(it - header.begin());
}

Json quick_four_pulse() {
  Json doc = sample("four_pulse");
  doc["four_pulse"]["random_pairs"] = 3;
  return doc;
}

}  // namespace

TEST(ConfigParsing, SamplesParse) {
  for (const char* name : {"four_pulse", "geometric_phase", "dispersive", "schedule", "network", "sweep_phi_x"}) {
    EXPECT_NO_THROW(cli::parse_config(sample(name))) << name;
  }
}

TEST(ConfigParsing, CyclicTagsScaleByTwoPi) {
  const auto cfg = cli::parse_config(sample("schedule"));
  EXPECT_DOUBLE_EQ(cfg.device.resonator.omega, 2.0 * std::numbers::pi * 100e6);
  EXPECT_DOUBLE_EQ(cfg.device.qubits[0].E_J0, 2.0 * std::numbers::pi * 5e9);
  Json doc = sample("schedule");
  doc["device"]["resonator"]["omega"] = {{"value", 1e8}, {"unit", "rad_per_s"}};
  EXPECT_DOUBLE_EQ(cli::parse_config(doc).device.resonator.omega, 1e8);
}

TEST(ConfigParsing, MalformedUnitNamesKeyPath) {
  Json doc = sample("schedule");
  doc["device"]["qubits"][0]["E_J0"]["unit"] = "gigaherz";
  const auto r = run_cli("bad_unit", doc);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("$.device.qubits.0.E_J0.unit"), std::string::npos) << r.err;
  const Json e = Json::parse(r.err);
  EXPECT_EQ(e["error"]["kind"], "config");
  EXPECT_FALSE(fs::exists(r.out / "report.json"));
}

TEST(ConfigParsing, WrongDimensionAndMissingTagRejected) {
  Json doc = sample("schedule");
  doc["device"]["B"]["unit"] = "meter";
  try {
    cli::parse_config(doc);
    FAIL() << "expected a config error";
  } catch (const cli::ConfigError& e) {
    EXPECT_EQ(e.path(), "$.device.B.unit");
  }
  doc = sample("schedule");
  doc["device"]["resonator"]["length"] = 30e-6;
  EXPECT_THROW(cli::parse_config(doc), cli::ConfigError);
  doc = sample("schedule");
  doc["device"]["resonator"]["length"].erase("unit");
  try {
    cli::parse_config(doc);
    FAIL() << "expected a config error";
  } catch (const cli::ConfigError& e) {
    EXPECT_EQ(e.path(), "$.device.resonator.length.unit");
  }
}

TEST(ConfigParsing, UnknownKeysRejected) {
  for (const char* where : {"", "numeric", "schedule"}) {
    Json doc = sample("schedule");
    Json& target = std::string(where).empty() ? doc : doc[where];
    target["n_cutt"] = 3;
    try {
      cli::parse_config(doc);
      FAIL() << "accepted unknown key under '" << where << "'";
    } catch (const cli::ConfigError& e) {
      const std::string expected = std::string(where).empty() ? "$.n_cutt" : "$." + std::string(where) + ".n_cutt";
      EXPECT_EQ(e.path(), expected);
    }
  }
  Json doc = sample("schedule");
  doc["device"]["B"]["scale"] = 1;
  EXPECT_THROW(cli::parse_config(doc), cli::ConfigError);
}

TEST(ConfigParsing, UnknownScenarioRejected) {
  Json doc = sample("schedule");
  doc["scenario"] = "teleport";
  EXPECT_THROW(cli::parse_config(doc), cli::ConfigError);
  EXPECT_EQ(run_cli("bad_override", sample("schedule"), {"--scenario", "teleport"}).code, 2);
}

TEST(Run, FourPulseReportMeetsGateOracles) {
  const auto art = cli::execute(cli::parse_config(quick_four_pulse()), {});
  const Json& g = art.report["result"]["gate"];
  EXPECT_GE(g["process_fidelity"].get<double>(), 1.0 - 1e-6);
  EXPECT_GE(g["resonator_purity"].get<double>(), 1.0 - 1e-8);
  // closed form from the realised displacements, scaled by the block count
  const Json& res = art.report["result"];
  const nanobus::Complex a1(res["alpha1"]["re"].get<double>(), res["alpha1"]["im"].get<double>());
  const nanobus::Complex a2(res["alpha2"]["re"].get<double>(), res["alpha2"]["im"].get<double>());
  const double theta = 2.0 * std::abs(a1) * std::abs(a2) * std::sin(std::arg(a2) - std::arg(a1));
  EXPECT_NEAR(g["theta"].get<double>(), g["repetitions"].get<int>() * theta, 1e-8);
  EXPECT_NEAR(g["theta"].get<double>(), std::numbers::pi / 4.0, 1e-8);
  EXPECT_LT(res["random_pairs"]["max_distance"].get<double>(), 1e-7);
  for (const char* key : {"tool", "scenario", "config", "result", "diagnostics", "determinism"}) {
    EXPECT_TRUE(art.report.contains(key)) << key;
  }
}

TEST(Run, FourPulseFluxScheduleFlipsSigns) {
  const auto art = cli::execute(cli::parse_config(quick_four_pulse()), {});
  const Json& segs = art.report["result"]["segments"];
  ASSERT_EQ(segs.size(), 4u);
  for (const auto& s : segs) {
    const double phi = s["Phi_x"].get<double>();
    EXPECT_EQ(phi, s["sign"].get<int>() < 0 ? 1.0 : 0.0);
  }
}

TEST(Run, ScheduleReportsBothPrefactorsAndInfeasibility) {
  const auto r = run_cli("schedule", sample("schedule"));
  ASSERT_EQ(r.code, 0) << r.err;
  const Json rep = Json::parse(slurp(r.out / "report.json"));
  const Json& res = rep["result"];
  ASSERT_EQ(res["prefactor_readings"].size(), 2u);
  EXPECT_EQ(res["prefactor_readings"][0]["prefactor"], 8.0);
  EXPECT_EQ(res["prefactor_readings"][1]["prefactor"], 4.0);
  EXPECT_NEAR(res["prefactor_readings"][1]["required_product"].get<double>(),
              2.0 * res["prefactor_readings"][0]["required_product"].get<double>(), 1e-12);
  EXPECT_FALSE(res["schedule"]["single_shot_feasible"].get<bool>());
  EXPECT_FALSE(res["quoted_product"]["feasible"].get<bool>());
  EXPECT_GT(res["schedule"]["repetitions"].get<int>(), 1);
}

TEST(Run, InfeasibleScheduleExitsFour) {
  Json doc = sample("schedule");
  doc["schedule"]["allow_repetitions"] = false;
  const auto r = run_cli("infeasible", doc);
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(Json::parse(r.err)["error"]["kind"], "infeasible");
}

TEST(Run, ScenarioOverrideFromCommandLine) {
  const auto r = run_cli("override", sample("four_pulse"), {"--scenario", "schedule"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json rep = Json::parse(slurp(r.out / "report.json"));
  EXPECT_EQ(rep["scenario"], "schedule");
  EXPECT_EQ(rep["config"]["scenario"], "schedule");
}

TEST(Run, ReportsAreByteIdentical) {
  const auto a = run_cli("det_a", quick_four_pulse(), {"--seed", "7"});
  const auto b = run_cli("det_b", quick_four_pulse(), {"--seed", "7"});
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(slurp(a.out / "report.json"), slurp(b.out / "report.json"));
  const Json rep = Json::parse(slurp(a.out / "report.json"));
  EXPECT_EQ(rep["determinism"]["seed"], 7);
  const auto c = run_cli("det_c", quick_four_pulse(), {"--seed", "8"});
  EXPECT_NE(Json::parse(slurp(c.out / "report.json"))["determinism"]["result_hash"],
            rep["determinism"]["result_hash"]);
}

TEST(Run, EchoedConfigReproducesReport) {
  const auto a = run_cli("echo_a", sample("geometric_phase"));
  ASSERT_EQ(a.code, 0);
  const Json rep = Json::parse(slurp(a.out / "report.json"));
  const auto b = run_cli("echo_b", rep["config"]);
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(slurp(a.out / "report.json"), slurp(b.out / "report.json"));
}

TEST(Hash, FnvKnownValues) {
  EXPECT_EQ(cli::fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(cli::fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Sweep, ParameterPathHandling) {
  EXPECT_EQ(cli::parameter_pointer("controls.qubits.0.Phi_x"), "/controls/qubits/0/Phi_x");
  const Json doc = sample("schedule");
  const Json moved = cli::with_parameter(doc, "controls.qubits.1.Phi_x", 0.25);
  EXPECT_EQ(moved["controls"]["qubits"][1]["Phi_x"]["value"], 0.25);
  EXPECT_EQ(moved["controls"]["qubits"][1]["Phi_x"]["unit"], "phi0");
  EXPECT_THROW(cli::with_parameter(doc, "controls.qubits.7.Phi_x", 0.1), cli::ConfigError);
  EXPECT_THROW(cli::with_parameter(doc, "device..B", 0.1), cli::ConfigError);
}

TEST(Sweep, UnknownPathExitsTwo) {
  Json doc = sample("sweep_phi_x");
  doc["sweep"]["parameter"] = "controls.qubits.0.Phi_y";
  const auto r = run_cli("bad_path", doc);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Phi_y"), std::string::npos);
}

TEST(Sweep, ZeroStepsGiveHeaderOnlyTable) {
  Json doc = sample("sweep_phi_x");
  doc["sweep"]["steps"] = 0;
  const auto r = run_cli("empty_sweep", doc);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(r.out / "sweep.csv"), std::string(cli::kCsvHeader) + "\r\n");
}

TEST(Sweep, FluxSweepCouplingFallsToZero) {
  const auto r = run_cli("phi_sweep", sample("sweep_phi_x"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(r.out / "sweep.csv");
  ASSERT_EQ(rows.size(), 7u);
  const std::size_t g = column(rows[0], "g1_rad_per_s"), h = column(rows[0], "config_hash");
  const std::regex sci(R"(-?\d\.\d{16}e[+-]\d{2,3})");
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_TRUE(std::regex_match(rows[k][g], sci)) << rows[k][g];
    const double v = std::stod(rows[k][g]);
    EXPECT_LT(v, previous);
    previous = v;
    EXPECT_EQ(rows[k][h], rows[1][h]);
    EXPECT_EQ(rows[k][0], std::to_string(k - 1));
  }
  EXPECT_EQ(previous, 0.0);
  // the decoupled end point cannot be scheduled; it is recorded, not fatal
  EXPECT_EQ(rows.back()[column(rows[0], "status")], "invalid_point");
}

TEST(Sweep, DispersiveFidelityRisesWithDetuning) {
  Json doc = sample("dispersive");
  doc["dispersive"]["delta_over_g"] = {5.0};
  doc["scenario"] = "sweep";
  doc["sweep"] = {{"scenario", "dispersive"}, {"parameter", "dispersive.delta_over_g.0"}, {"values", {5, 10, 20}}};
  const auto r = run_cli("dispersive_sweep", doc);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(r.out / "sweep.csv");
  ASSERT_EQ(rows.size(), 4u);
  const std::size_t f = column(rows[0], "process_fidelity");
  EXPECT_LT(std::stod(rows[1][f]), std::stod(rows[2][f]));
  EXPECT_LT(std::stod(rows[2][f]), std::stod(rows[3][f]));
}
