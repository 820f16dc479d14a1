#pragma once
#include <string>

#include "heavyq/config.hpp"
#include "heavyq/eigensolver.hpp"
#include "heavyq/observables.hpp"

namespace hq {

struct EvolutionRun {
  int sector = 0;           // light-charge sector of the run
  double E0 = 0.0;          // ground-state energy with the t = 0 charges
  double residual = 0.0;
  double t_end = 0.0;
  RunResult result;
};

// Ground state with the charges of `s` at t = 0 (in the sector screening
// them), then evolution to t_end with measurement at every step.
EvolutionRun run_schedule(const LatticeConfig& c, const ChargeSchedule& s, double t_end,
                          const EvolutionOptions& opt, const ObservableToggles& tg,
                          const LanczosOptions& lanczos = {});

// Same for a parsed configuration; t_end defaults to the trajectory duration.
EvolutionRun run_config(const RunConfig& cfg);

// The configuration of the paired vacuum run: static charges removed.
RunConfig vacuum_partner(const RunConfig& cfg);

// Lattice-averaged slope of a vacuum run at velocity v along x0 -> xf.
struct ScanRow {
  double v = 0.0;
  bool skipped = false;
  std::string reason;
  double slope = 0.0;
  int points = 0;
};
ScanRow scan_point(const LatticeConfig& c, double v, double x0, double xf, const EvolutionOptions& opt);

}  // namespace hq
