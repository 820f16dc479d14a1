#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
const fs::path kRoot = fs::path(HEAVYQ_TEST_DIR) / "cli_runs";

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::create_directories(kRoot);
  const auto p = kRoot / (name + ".json");
  std::ofstream(p) << text;
  return p;
}

// Runs the CLI and returns its exit status.
int run(const std::string& cmd, const fs::path& cfg, const fs::path& out, const std::string& extra = "") {
  const std::string line = std::string("\"") + HEAVYQ_CLI + "\" " + cmd + " --config \"" + cfg.string() +
                           "\" --out \"" + out.string() + "\" " + extra + " > \"" + out.string() + ".log\" 2>&1";
  fs::remove_all(out);
  const int st = std::system(line.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

json manifest(const fs::path& out) { return json::parse(slurp(out / "manifest.json")); }
}  // namespace

TEST_CASE("evolve records the trajectory constants") {
  const auto cfg = write_config("fig", R"({"lattice":{"L":4,"m":0.1,"g":0.8},
    "charges":[{"Q":1,"trajectory":{"v_max":0.2,"a_max":0.04,"x0":1,"xf":5}}],
    "observables":{"tangles":[2]}})");
  const auto out = kRoot / "fig";
  REQUIRE(run("evolve", cfg, out) == 0);
  const auto m = manifest(out);
  CHECK(m["trajectory"]["t0"] == 9);
  CHECK(m["trajectory"]["T"].get<double>() == doctest::Approx(20.0));
  CHECK(m["command"] == "evolve");
  CHECK(m["config_hash"].get<std::string>().size() == 16);
  CHECK(m["max_norm_error"].get<double>() < 1e-10);
  const auto csv = slurp(out / "series.csv");
  CHECK(csv.rfind("step,t,x,v,E,dE_dx,q_0", 0) == 0);
  CHECK(csv.find("\r\n") != std::string::npos);
  CHECK(fs::exists(out / "tangles.csv"));

  SUBCASE("outputs are byte-identical across runs and thread counts") {
    const auto out2 = kRoot / "fig_t1";
    REQUIRE(run("evolve", cfg, out2, "--threads 1") == 0);
    CHECK(slurp(out2 / "series.csv") == csv);
    CHECK(slurp(out2 / "tangles.csv") == slurp(out / "tangles.csv"));
    const auto out3 = kRoot / "fig_t3";
    REQUIRE(run("evolve", cfg, out3, "--threads 3") == 0);
    CHECK(slurp(out3 / "series.csv") == csv);
  }
}

TEST_CASE("a configuration without a moving charge reports the vacuum and hadron mass") {
  const auto cfg = write_config("vac", R"({"lattice":{"L":4,"m":0.1,"g":0.8}})");
  const auto out = kRoot / "vac";
  REQUIRE(run("evolve", cfg, out) == 0);
  const auto m = manifest(out);
  CHECK(m["E_vac"].is_number());
  CHECK(m["Lambda_bar"].get<double>() > 0.0);
  const auto csv = slurp(out / "series.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);  // header only
}

TEST_CASE("invalid configurations exit with status 2") {
  const auto cfg = write_config("bad", R"({"lattice":{"L":4,"m":0.1,"g":0.8},"bogus":1})");
  CHECK(run("evolve", cfg, kRoot / "bad") == 2);
  CHECK(run("ground-state", kRoot / "missing.json", kRoot / "missing") == 2);
  const auto ok = write_config("ok", R"({"lattice":{"L":4,"m":0.1,"g":0.8}})");
  CHECK(run("evolve", ok, kRoot / "badflag", "--stepper rk4") == 2);
}

TEST_CASE("ground-state and resources") {
  const auto cfg = write_config("gs", R"({"lattice":{"L":4,"m":0.1,"g":0.8},"charges":[{"Q":1,"site":3}]})");
  const auto out = kRoot / "gs";
  REQUIRE(run("ground-state", cfg, out) == 0);
  const auto m = manifest(out);
  CHECK(m["sector"] == -1);
  CHECK(m["residual"].get<double>() < 1e-8);
  CHECK(fs::exists(out / "density.csv"));
  const auto rout = kRoot / "res";
  REQUIRE(run("resources", cfg, rout) == 0);
  CHECK(manifest(rout)["state_prep"]["cnot_count"] == 16 * 4 - 12 + 25);
  CHECK(fs::exists(rout / "resources.csv"));
}

TEST_CASE("velocity scans") {
  const auto empty = write_config("scan0", R"({"lattice":{"L":4,"m":0.1,"g":0.8},"scan":{"velocities":[]}})");
  CHECK(run("scan-velocity", empty, kRoot / "scan0") == 0);
  const auto cfg = write_config("scan", R"({"lattice":{"L":4,"m":0.1,"g":0.8},"scan":{"velocities":[0.3,1.5]}})");
  const auto out = kRoot / "scan";
  REQUIRE(run("scan-velocity", cfg, out) == 0);
  const auto csv = slurp(out / "scan.csv");
  CHECK(csv.find("skipped") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("medium runs reuse the cached vacuum partner") {
  const auto cfg = write_config("med", R"({"lattice":{"L":4,"m":0.1,"g":0.8},
    "charges":[{"Q":1,"trajectory":{"v_max":0.3,"x0":1,"xf":5}},{"Q":-1,"site":4,"static":true}]})");
  const auto out = kRoot / "med";
  const auto cache = kRoot / "med_cache";
  fs::remove_all(cache);
  REQUIRE(run("evolve", cfg, out, "--cache \"" + cache.string() + "\"") == 0);
  CHECK(manifest(out)["vacuum_cached"] == false);
  const auto delta = slurp(out / "delta.csv");
  CHECK(delta.rfind("step,t,x,dE_dx_medium,dE_dx_vacuum,delta", 0) == 0);
  REQUIRE(run("evolve", cfg, out, "--cache \"" + cache.string() + "\"") == 0);
  CHECK(manifest(out)["vacuum_cached"] == true);
  CHECK(slurp(out / "delta.csv") == delta);
}

TEST_CASE("adapt writes an ansatz that the circuit command compiles") {
  const auto cfg = write_config("ad", R"({"lattice":{"L":4,"m":0.1,"g":0.8},"adapt":{"pool":"charge","steps":2}})");
  const auto out = kRoot / "ad";
  REQUIRE(run("adapt", cfg, out) == 0);
  REQUIRE(fs::exists(out / "ansatz.json"));
  CHECK(fs::exists(out / "adapt_steps.csv"));
  const auto ccfg = write_config("circ", R"({"lattice":{"L":4,"m":0.1,"g":0.8},"circuit":{"ansatz":"ad/ansatz.json"}})");
  const auto cout = kRoot / "circ";
  REQUIRE(run("circuit", ccfg, cout) == 0);
  const auto m = manifest(cout);
  CHECK(1.0 - m["fidelity_vs_ansatz"].get<double>() < 1e-10);
  CHECK(slurp(cout / "state_prep.qasm").rfind("OPENQASM 3.0;", 0) == 0);
}
