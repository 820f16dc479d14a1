#include "heavyq/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#ifndef HEAVYQ_VERSION
#define HEAVYQ_VERSION "0.0.0"
#endif

namespace hq {

using nlohmann::json;

const char* version() { return HEAVYQ_VERSION; }

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

// Rejects keys outside `allowed`.
void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  std::set<std::string> ok;
  for (const char* k : allowed) ok.insert(k);
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) fail(path + "." + k, "unknown key");
}

double get_number(const json& j, const std::string& key, const std::string& path) {
  const auto& v = j.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

int get_int(const json& j, const std::string& key, const std::string& path) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<int>();
}

bool get_bool(const json& j, const std::string& key, const std::string& path) {
  const auto& v = j.at(key);
  if (!v.is_boolean()) fail(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

std::string get_string(const json& j, const std::string& key, const std::string& path) {
  const auto& v = j.at(key);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

template <class F>
void opt(const json& j, const char* key, F&& f) {
  if (j.contains(key)) f();
}

std::vector<int> get_int_list(const json& j, const std::string& key, const std::string& path) {
  const auto& v = j.at(key);
  if (!v.is_array()) fail(path + "." + key, "expected an array");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer()) fail(path + "." + key + "[" + std::to_string(i) + "]", "expected an integer");
    out.push_back(v[i].get<int>());
  }
  return out;
}

std::vector<double> get_number_list(const json& j, const std::string& key, const std::string& path) {
  const auto& v = j.at(key);
  if (!v.is_array()) fail(path + "." + key, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(path + "." + key + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

ApplyMode get_mode(const json& j, const std::string& key, const std::string& path) {
  try {
    return parse_apply_mode(get_string(j, key, path));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(path + "." + key, e.what());
  }
}

void parse_lattice(const json& j, RunConfig& c) {
  const std::string p = "$.lattice";
  check_keys(j, p, {"L", "m", "g"});
  for (const char* k : {"L", "m", "g"})
    if (!j.contains(k)) fail(p + "." + k, "required");
  c.lattice.L = get_int(j, "L", p);
  c.lattice.m = get_number(j, "m", p);
  c.lattice.g = get_number(j, "g", p);
  try {
    c.lattice.validate();
  } catch (const std::exception& e) {
    fail(p, e.what());
  }
}

void parse_charges(const json& j, RunConfig& c) {
  if (!j.is_array()) fail("$.charges", "expected an array");
  int moving = 0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = "$.charges[" + std::to_string(i) + "]";
    const json& e = j[i];
    check_keys(e, p, {"site", "trajectory", "Q", "static"});
    ChargeConfig q;
    if (!e.contains("Q")) fail(p + ".Q", "required");
    q.Q = get_number(e, "Q", p);
    const bool has_site = e.contains("site"), has_traj = e.contains("trajectory");
    if (has_site == has_traj) fail(p, "exactly one of site or trajectory is required");
    if (has_site) {
      q.site = get_int(e, "site", p);
      if (*q.site < 0 || *q.site >= c.lattice.N()) fail(p + ".site", "outside the lattice");
    } else {
      const json& t = e.at("trajectory");
      const std::string tp = p + ".trajectory";
      check_keys(t, tp, {"v_max", "x0", "xf", "a_max", "a0"});
      for (const char* k : {"v_max", "x0", "xf"})
        if (!t.contains(k)) fail(tp + "." + k, "required");
      TrajectoryParams tr = standard_trajectory(get_number(t, "v_max", tp), get_number(t, "x0", tp),
                                                get_number(t, "xf", tp));
      opt(t, "a_max", [&] { tr.a_max = get_number(t, "a_max", tp); });
      opt(t, "a0", [&] { tr.a0 = get_number(t, "a0", tp); });
      try {
        tr.validate();
      } catch (const std::exception& ex) {
        fail(tp, ex.what());
      }
      const int N = c.lattice.N();
      if (tr.x0 < 1 || tr.xf > N - 3) fail(tp, "path must stay within [1, N-3]");
      q.trajectory = tr;
      ++moving;
    }
    if (e.contains("static") && get_bool(e, "static", p) != has_site)
      fail(p + ".static", "contradicts site/trajectory");
    c.charges.push_back(q);
  }
  if (moving > 1) fail("$.charges", "at most one moving charge per run");
}

void parse_evolution(const json& j, RunConfig& c) {
  const std::string p = "$.evolution";
  check_keys(j, p, {"stepper", "dt", "lambda_bar", "sampling", "krylov_tol", "krylov_dim", "t_end"});
  auto& e = c.evolution;
  try {
    opt(j, "stepper", [&] { e.stepper = parse_stepper(get_string(j, "stepper", p)); });
    opt(j, "sampling", [&] { e.sampling = parse_sampling(get_string(j, "sampling", p)); });
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& ex) {
    fail(p, ex.what());
  }
  opt(j, "dt", [&] {
    e.dt = get_number(j, "dt", p);
    if (e.dt <= 0) fail(p + ".dt", "must be positive");
  });
  opt(j, "lambda_bar", [&] {
    e.lambda_bar = get_int(j, "lambda_bar", p);
    if (e.lambda_bar < 0) fail(p + ".lambda_bar", "must be >= 0");
  });
  opt(j, "krylov_tol", [&] {
    e.krylov.tol = get_number(j, "krylov_tol", p);
    if (!(e.krylov.tol > 0)) fail(p + ".krylov_tol", "must be positive");
  });
  opt(j, "krylov_dim", [&] {
    e.krylov.max_dim = get_int(j, "krylov_dim", p);
    if (e.krylov.max_dim < 2) fail(p + ".krylov_dim", "must be >= 2");
  });
  opt(j, "t_end", [&] {
    c.t_end = get_number(j, "t_end", p);
    if (*c.t_end < 0) fail(p + ".t_end", "must be >= 0");
  });
}

void parse_observables(const json& j, RunConfig& c) {
  const std::string p = "$.observables";
  check_keys(j, p, {"entropies", "mutual_information", "tangles"});
  opt(j, "entropies", [&] { c.observables.entropies = get_bool(j, "entropies", p); });
  opt(j, "mutual_information",
      [&] { c.observables.mutual_information = get_bool(j, "mutual_information", p); });
  opt(j, "tangles", [&] {
    c.observables.tangle_ns = get_int_list(j, "tangles", p);
    for (int n : c.observables.tangle_ns)
      if (n < 1 || n > c.lattice.N()) fail(p + ".tangles", "window size outside [1, N]");
  });
}

void parse_outputs(const json& j, RunConfig& c) {
  const std::string p = "$.outputs";
  check_keys(j, p, {"directory", "formats"});
  opt(j, "directory", [&] { c.output_directory = get_string(j, "directory", p); });
  opt(j, "formats", [&] {
    const auto& f = j.at("formats");
    if (!f.is_array()) fail(p + ".formats", "expected an array");
    c.formats.clear();
    for (const auto& s : f) {
      if (!s.is_string()) fail(p + ".formats", "expected strings");
      const auto v = s.get<std::string>();
      if (v != "csv" && v != "json" && v != "qasm") fail(p + ".formats", "unknown format " + v);
      c.formats.push_back(v);
    }
  });
}

void parse_adapt(const json& j, RunConfig& c) {
  const std::string p = "$.adapt";
  check_keys(j, p, {"pool", "steps", "mode", "vacuum_steps", "vacuum_mode", "L_values", "extrapolate",
                    "gradient_threshold", "gtol"});
  auto& a = c.adapt;
  opt(j, "pool", [&] {
    a.pool = get_string(j, "pool", p);
    if (a.pool != "charge" && a.pool != "vacuum") fail(p + ".pool", "expected charge or vacuum");
  });
  opt(j, "steps", [&] {
    a.steps = get_int(j, "steps", p);
    if (a.steps < 0) fail(p + ".steps", "must be >= 0");
  });
  opt(j, "vacuum_steps", [&] {
    a.vacuum_steps = get_int(j, "vacuum_steps", p);
    if (a.vacuum_steps < 0) fail(p + ".vacuum_steps", "must be >= 0");
  });
  opt(j, "mode", [&] { a.mode = get_mode(j, "mode", p); });
  opt(j, "vacuum_mode", [&] { a.vacuum_mode = get_mode(j, "vacuum_mode", p); });
  opt(j, "L_values", [&] {
    a.L_values = get_int_list(j, "L_values", p);
    for (int L : a.L_values)
      if (L < 2 || L > 16) fail(p + ".L_values", "sizes must lie in [2, 16]");
  });
  opt(j, "extrapolate", [&] { a.extrapolate = get_bool(j, "extrapolate", p); });
  opt(j, "gradient_threshold", [&] {
    a.gradient_threshold = get_number(j, "gradient_threshold", p);
    if (a.gradient_threshold < 0) fail(p + ".gradient_threshold", "must be >= 0");
  });
  opt(j, "gtol", [&] {
    a.gtol = get_number(j, "gtol", p);
    if (!(a.gtol > 0)) fail(p + ".gtol", "must be positive");
  });
}

void parse_circuit(const json& j, RunConfig& c) {
  const std::string p = "$.circuit";
  check_keys(j, p, {"ansatz", "reuse_vacuum_tail"});
  opt(j, "ansatz", [&] { c.circuit.ansatz = get_string(j, "ansatz", p); });
  opt(j, "reuse_vacuum_tail", [&] { c.circuit.reuse_vacuum_tail = get_bool(j, "reuse_vacuum_tail", p); });
}

json to_json(const RunConfig& c) {
  json j;
  j["lattice"] = {{"L", c.lattice.L}, {"m", c.lattice.m}, {"g", c.lattice.g}};
  j["charges"] = json::array();
  for (const auto& q : c.charges) {
    json e{{"Q", q.Q}};
    if (q.site) e["site"] = *q.site;
    if (q.trajectory) {
      const auto& t = *q.trajectory;
      e["trajectory"] = {{"v_max", t.v_max}, {"x0", t.x0}, {"xf", t.xf}, {"a_max", t.a_max}, {"a0", t.a0}};
    }
    j["charges"].push_back(e);
  }
  const auto& e = c.evolution;
  const char* sampling = e.sampling == ChargeSampling::Start ? "start"
                         : e.sampling == ChargeSampling::End ? "end"
                                                             : "midpoint";
  // optional fields appear only when set, so the canonical form parses back
  j["evolution"] = {{"stepper", to_string(e.stepper)},
                    {"sampling", sampling},
                    {"krylov_tol", e.krylov.tol},
                    {"krylov_dim", e.krylov.max_dim}};
  if (e.dt > 0) j["evolution"]["dt"] = e.dt;
  if (e.lambda_bar >= 0) j["evolution"]["lambda_bar"] = e.lambda_bar;
  if (c.t_end) j["evolution"]["t_end"] = *c.t_end;
  j["observables"] = {{"entropies", c.observables.entropies},
                      {"mutual_information", c.observables.mutual_information},
                      {"tangles", c.observables.tangle_ns}};
  j["outputs"] = {{"formats", c.formats}};  // the directory does not change results
  j["scan"] = {{"velocities", c.scan_velocities}};
  const auto& a = c.adapt;
  j["adapt"] = {{"pool", a.pool},
                {"steps", a.steps},
                {"mode", to_string(a.mode)},
                {"vacuum_steps", a.vacuum_steps},
                {"vacuum_mode", to_string(a.vacuum_mode)},
                {"L_values", a.L_values},
                {"extrapolate", a.extrapolate},
                {"gradient_threshold", a.gradient_threshold},
                {"gtol", a.gtol}};
  j["circuit"] = {{"reuse_vacuum_tail", c.circuit.reuse_vacuum_tail}};
  if (!c.circuit.ansatz.empty()) j["circuit"]["ansatz"] = c.circuit.ansatz;
  j["resources"] = json::object();
  if (c.resources_lambda_bar >= 0) j["resources"]["lambda_bar"] = c.resources_lambda_bar;
  if (c.seed) j["seed"] = *c.seed;
  return j;
}

}  // namespace

BackgroundCharges RunConfig::static_charges() const {
  BackgroundCharges q;
  for (const auto& e : charges)
    if (e.site) q.add(*e.site, e.Q);
  return q;
}

bool RunConfig::has_moving_charge() const {
  for (const auto& e : charges)
    if (e.trajectory) return true;
  return false;
}

ChargeSchedule RunConfig::schedule() const {
  ChargeSchedule s;
  s.static_charges = static_charges();
  for (const auto& e : charges)
    if (e.trajectory) s.moving = MovingCharge{*e.trajectory, e.Q};
  return s;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("$: invalid JSON: ") + e.what());
  }
  check_keys(j, "$", {"$schema", "lattice", "charges", "evolution", "observables", "outputs", "scan", "adapt",
                      "circuit", "resources", "seed"});
  RunConfig c;
  if (!j.contains("lattice")) fail("$.lattice", "required");
  parse_lattice(j["lattice"], c);
  opt(j, "charges", [&] { parse_charges(j["charges"], c); });
  opt(j, "evolution", [&] { parse_evolution(j["evolution"], c); });
  opt(j, "observables", [&] { parse_observables(j["observables"], c); });
  opt(j, "outputs", [&] { parse_outputs(j["outputs"], c); });
  opt(j, "scan", [&] {
    check_keys(j["scan"], "$.scan", {"velocities"});
    opt(j["scan"], "velocities", [&] {
      c.scan_velocities = get_number_list(j["scan"], "velocities", "$.scan");
      for (double v : c.scan_velocities)
        if (!(v > 0)) fail("$.scan.velocities", "velocities must be positive");
    });
  });
  opt(j, "adapt", [&] { parse_adapt(j["adapt"], c); });
  opt(j, "circuit", [&] { parse_circuit(j["circuit"], c); });
  opt(j, "resources", [&] {
    check_keys(j["resources"], "$.resources", {"lambda_bar"});
    opt(j["resources"], "lambda_bar", [&] {
      c.resources_lambda_bar = get_int(j["resources"], "lambda_bar", "$.resources");
      if (c.resources_lambda_bar < 0) fail("$.resources.lambda_bar", "must be >= 0");
    });
  });
  opt(j, "seed", [&] {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
      fail("$.seed", "expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  });
  try {
    c.static_charges().validate(c.lattice.N());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail("$.charges", e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig c = parse_config(ss.str());
  const auto parent = std::filesystem::path(path).parent_path();
  c.source_dir = parent.empty() ? "." : parent.string();
  return c;
}

std::string canonical_config(const RunConfig& c) { return to_json(c).dump(); }

std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hq
