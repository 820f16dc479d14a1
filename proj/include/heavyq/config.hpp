#pragma once
#include <optional>
#include <string>
#include <vector>

#include "heavyq/evolve.hpp"
#include "heavyq/model.hpp"
#include "heavyq/observables.hpp"
#include "heavyq/scadapt.hpp"
#include "heavyq/trajectory.hpp"

namespace hq {

const char* version();

struct ChargeConfig {
  double Q = 1.0;
  std::optional<int> site;                   // static charge
  std::optional<TrajectoryParams> trajectory;  // moving charge
};

struct AdaptConfig {
  std::string pool = "charge";  // "charge" | "vacuum"
  int steps = 4;
  ApplyMode mode = ApplyMode::Exact;
  int vacuum_steps = 2;
  ApplyMode vacuum_mode = ApplyMode::Exact;
  std::vector<int> L_values;  // vacuum pool: sizes to run (default: lattice.L)
  bool extrapolate = false;
  double gradient_threshold = 0.0;
  double gtol = 1e-8;
};

struct CircuitConfig {
  std::string ansatz;  // ansatz file (relative to the config file's directory)
  bool reuse_vacuum_tail = true;
};

struct RunConfig {
  LatticeConfig lattice;
  std::vector<ChargeConfig> charges;
  EvolutionOptions evolution;
  std::optional<double> t_end;
  ObservableToggles observables;
  std::string output_directory = "out";
  std::vector<std::string> formats{"csv", "json"};
  std::vector<double> scan_velocities;
  AdaptConfig adapt;
  CircuitConfig circuit;
  int resources_lambda_bar = -1;  // -1: default_lambda_bar(hadron mass)
  std::optional<std::uint64_t> seed;
  std::string source_dir = ".";  // directory of the config file

  BackgroundCharges static_charges() const;
  // Static charges plus the (at most one) moving charge.
  ChargeSchedule schedule() const;
  bool has_moving_charge() const;
};

// Strict parse: unknown keys, wrong types and out-of-range values throw
// ConfigError naming the offending path.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
// Canonical JSON of the parsed configuration (defaults filled in).
std::string canonical_config(const RunConfig& c);
// 16 hex digits of FNV-1a over the canonical JSON.
std::string config_hash(const RunConfig& c);

}  // namespace hq
