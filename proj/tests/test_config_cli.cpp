#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spinflow/cli.hpp"
#include "spinflow/config.hpp"
#include "spinflow/pipeline.hpp"

using namespace spinflow;
namespace fs = std::filesystem;

namespace {

json minimal_dimer() {
  return json{
      {"crystal",
       {{"species",
         json::array({{{"name", "Mg25"}, {"mass_amu", 24.985837}, {"role", "spin"}},
                      {{"name", "Mg26"},
                       {"mass_amu", 25.982593},
                       {"role", "coolant"},
                       {"linewidth_MHz", 41.4}},
                      {{"name", "Mg25"}, {"mass_amu", 24.985837}, {"role", "spin"}}})},
        {"trap_x_MHz", 4.0},
        {"trap_y_MHz", 3.5},
        {"trap_z_MHz", 1.0}}},
      {"cooling", {{"rabi_MHz", 20.7}, {"detuning_MHz", -20.7}, {"wavelength_nm", 280.353}}},
      {"magnet", {{"kind", "ising"}, {"coupling_kHz", 0.16}}},
      {"drive",
       {{"source",
         {{"mode", 1}, {"g_Hz", 0.4}, {"delta_Hz", -320.0}, {"kappa_Hz", 8.0}, {"nbar", 0.12}}},
        {"drain",
         {{"mode", 3}, {"g_Hz", 0.4}, {"delta_Hz", -320.0}, {"kappa_Hz", 8.0}, {"nbar", 0.04}}}}}};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("spinflow_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string write_config(const TempDir& dir, const json& j, const std::string& name = "cfg.json") {
  const std::string p = dir.file(name);
  std::ofstream out(p);
  out << j.dump(2);
  return p;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"spinflow"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run(int(argv.size()), argv.data());
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("minimal dimer config parses with documented defaults") {
  const RunConfig cfg = parse_config_json(minimal_dimer());
  REQUIRE(cfg.arrangement.size() == 3);
  REQUIRE(cfg.arrangement.spin_sites() == std::vector<int>{0, 2});
  REQUIRE(cfg.magnet_kind == SpinModelKind::Ising);
  REQUIRE(cfg.steady_method == SteadyMethod::Nullspace);
  REQUIRE(cfg.coherence_mode == CoherenceMode::Secular);
  REQUIRE(cfg.initial_state == "all_down");
  REQUIRE(cfg.spin_cap == kDefaultSpinCap);
  REQUIRE(cfg.oracle.n_max == 6);
  REQUIRE(cfg.output_path == "out.csv");
  REQUIRE(cfg.drive[0].mode == 0);
  REQUIRE(cfg.drive[1].mode == 2);
  REQUIRE(cfg.drive[0].kappa_override);
  REQUIRE(*cfg.drive[0].nbar_override == 0.12);
}

TEST_CASE("schema violations name the offending field and accumulate") {
  json bad = minimal_dimer();
  bad["crystal"]["trap_z_MHz"] = -1.0;
  bad["drive"]["source"]["nbar"] = -0.5;
  try {
    parse_config_json(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    REQUIRE(what.find("crystal.trap_z_MHz") != std::string::npos);
    REQUIRE(what.find("drive.source.nbar") != std::string::npos);
    REQUIRE(e.errors().size() >= 2);
  }
}

TEST_CASE("unknown keys are rejected") {
  json bad = minimal_dimer();
  bad["magnet"]["couplng_kHz"] = 0.2;  // typo
  bad["novel_section"] = {{"x", 1}};
  try {
    parse_config_json(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    REQUIRE(what.find("magnet.couplng_kHz") != std::string::npos);
    REQUIRE(what.find("novel_section.x") != std::string::npos);
  }
}

TEST_CASE("config round-trips through serialization") {
  const RunConfig cfg = parse_config_json(minimal_dimer());
  const json dumped = cfg.serialize();
  const RunConfig again = parse_config_json(dumped);
  REQUIRE(again.serialize() == dumped);
}

TEST_CASE("shipped fixtures parse") {
  for (const char* name : {"dimer_blockade.json", "fig_temperatures.json",
                           "blockade_pipeline.json", "oracle_check.json"}) {
    const fs::path p = fs::path(SPINFLOW_CONFIG_DIR) / name;
    REQUIRE_NOTHROW(parse_config(p.string()));
  }
}

TEST_CASE("invalid usage exits with code 2, runtime errors with 1") {
  REQUIRE(run_cli({"frobnicate", "--config", "x.json"}) == 2);
  REQUIRE(run_cli({}) == 2);
  REQUIRE(run_cli({"modes", "--config", "/nonexistent/path.json"}) == 1);

  TempDir dir;
  json bad = minimal_dimer();
  bad["crystal"]["trap_z_MHz"] = -1.0;
  const std::string path = write_config(dir, bad);
  REQUIRE(run_cli({"modes", "--config", path}) == 1);
}

TEST_CASE("modes subcommand emits one row per branch and mode") {
  TempDir dir;
  const std::string cfg = write_config(dir, minimal_dimer());
  const std::string out = dir.file("modes.csv");
  REQUIRE(run_cli({"modes", "--config", cfg, "--output", out}) == 0);
  const auto lines = read_lines(out);
  REQUIRE(lines.size() == 1 + 9);  // header + 3 branches x 3 modes
  REQUIRE(lines[0] == "branch,n,frequency_Hz,M_1,M_2,M_3");
}

TEST_CASE("steady subcommand reports populations and currents") {
  TempDir dir;
  const std::string cfg = write_config(dir, minimal_dimer());
  const std::string out = dir.file("steady.csv");
  REQUIRE(run_cli({"steady", "--config", cfg, "--output", out}) == 0);
  const auto lines = read_lines(out);
  REQUIRE(lines[0] == "record,l,lp,value");
  int populations = 0;
  bool has_total = false;
  for (const auto& l : lines) {
    if (l.rfind("population", 0) == 0) ++populations;
    if (l.rfind("current_source", 0) == 0) has_total = true;
  }
  REQUIRE(populations == 4);
  REQUIRE(has_total);
}

TEST_CASE("dos, spectrum, reservoirs and dimer subcommands produce well-formed tables") {
  TempDir dir;
  json j = minimal_dimer();
  j["cooling"]["scan_MHz"] = {{"start", -40.0}, {"stop", -10.0}, {"points", 4}};
  j["drive"]["sweep"] = {{"delta_Hz", {{"start", -500.0}, {"stop", 100.0}, {"points", 7}}}};
  const std::string cfg = write_config(dir, j);

  const std::string dos_out = dir.file("dos.csv");
  REQUIRE(run_cli({"dos", "--config", cfg, "--output", dos_out}) == 0);
  REQUIRE(read_lines(dos_out).size() == 1 + 2 * 401);

  const std::string spec_out = dir.file("spectrum.csv");
  REQUIRE(run_cli({"spectrum", "--config", cfg, "--output", spec_out}) == 0);
  REQUIRE(read_lines(spec_out).size() > 5);

  const std::string res_out = dir.file("reservoirs.csv");
  REQUIRE(run_cli({"reservoirs", "--config", cfg, "--output", res_out}) == 0);
  REQUIRE(read_lines(res_out).size() == 1 + 4 * 3);  // grid x modes

  const std::string dim_out = dir.file("dimer.csv");
  REQUIRE(run_cli({"dimer", "--config", cfg, "--output", dim_out}) == 0);
  const auto dim_lines = read_lines(dim_out);
  REQUIRE(dim_lines.size() == 1 + 7);
  REQUIRE(dim_lines[0] == "delta_Hz,kappa_S_Hz,I_numeric,I_analytic,validity,status");
}

TEST_CASE("sweep output is identical for one and four threads") {
  TempDir dir;
  json j = minimal_dimer();
  j["drive"]["sweep"] = {{"delta_Hz", {{"start", -500.0}, {"stop", 100.0}, {"points", 25}}},
                         {"kappa_scales", {1.0, 4.0}}};
  const std::string cfg = write_config(dir, j);
  const std::string out1 = dir.file("sweep1.csv");
  const std::string out4 = dir.file("sweep4.csv");
  REQUIRE(run_cli({"sweep", "--config", cfg, "--output", out1, "--threads", "1"}) == 0);
  REQUIRE(run_cli({"sweep", "--config", cfg, "--output", out4, "--threads", "4"}) == 0);
  const auto lines1 = read_lines(out1);
  const auto lines4 = read_lines(out4);
  REQUIRE(lines1.size() == 1 + 50);
  REQUIRE(lines1 == lines4);
}

TEST_CASE("protocol subcommand emits the estimator row") {
  TempDir dir;
  json j = minimal_dimer();
  j["solver"]["protocol"] = {{"t_q_s", 13.0}, {"dt_s", 0.00043}};
  const std::string cfg = write_config(dir, j);
  const std::string out = dir.file("protocol.csv");
  REQUIRE(run_cli({"protocol", "--config", cfg, "--output", out}) == 0);
  const auto lines = read_lines(out);
  REQUIRE(lines.size() == 2);
  REQUIRE(lines[0] ==
          "t_q_s,dt_s,rho_dd_tq,rho_dd_tq_dt,I_est,I_S,bias_bound,dt_warning");
}

TEST_CASE("oracle subcommand compares effective against full") {
  TempDir dir;
  json j = minimal_dimer();
  // cheap oracle: moderate separation, low occupations, small truncation
  j["drive"]["source"] = {{"mode", 1}, {"g_Hz", 4.0}, {"delta_Hz", -320.0},
                          {"kappa_Hz", 80.0}, {"nbar", 0.15}};
  j["drive"]["drain"] = {{"mode", 3}, {"g_Hz", 4.0}, {"delta_Hz", -320.0},
                         {"kappa_Hz", 80.0}, {"nbar", 0.05}};
  j["solver"]["oracle"] = {{"n_max", 3}};
  const std::string cfg = write_config(dir, j);
  const std::string out = dir.file("oracle.csv");
  REQUIRE(run_cli({"oracle", "--config", cfg, "--output", out}) == 0);
  const auto lines = read_lines(out);
  REQUIRE(lines[0] == "quantity,effective,full,rel_diff");
  REQUIRE(lines.size() >= 5);
}

TEST_CASE("pipeline fixture reproduces the blockade sweep end to end") {
  TempDir dir;
  const fs::path fixture = fs::path(SPINFLOW_CONFIG_DIR) / "blockade_pipeline.json";
  const RunConfig cfg = parse_config(fixture.string());

  // the mediated coupling defines the resonance the sweep should find
  const CrystalResult crystal = build_crystal(cfg);
  const TransportSetup setup = build_transport_setup(cfg, crystal.modes);
  const double j = setup.model.jz(0, 1);
  REQUIRE(j > 0.0);  // antiferromagnetic

  const std::string out = dir.file("pipeline.csv");
  REQUIRE(run_cli({"sweep", "--config", fixture.string(), "--output", out, "--threads", "2"}) == 0);
  const auto lines = read_lines(out);
  REQUIRE(lines.size() == 1 + 160);

  // find the peak row
  double best_delta = 0.0, best_current = -1.0;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::istringstream ss(lines[i]);
    std::string field;
    std::getline(ss, field, ',');
    const double delta_hz = std::stod(field);
    for (int skip = 0; skip < 3; ++skip) std::getline(ss, field, ',');
    std::getline(ss, field, ',');
    const double current = std::stod(field);
    if (current > best_current) {
      best_current = current;
      best_delta = delta_hz;
    }
  }
  const double grid_step = 800.0 / 159.0;
  REQUIRE(best_current > 0.0);
  REQUIRE(std::abs(best_delta - (-2.0 * j / units::two_pi)) < 2.0 * grid_step);
}
