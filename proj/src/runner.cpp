#include "heavyq/runner.hpp"

#include <cmath>

namespace hq {

EvolutionRun run_schedule(const LatticeConfig& c, const ChargeSchedule& s, double t_end,
                          const EvolutionOptions& opt, const ObservableToggles& tg,
                          const LanczosOptions& lanczos) {
  EvolutionRun run;
  run.sector = screening_sector(s.at(0.0, c.N()));
  run.t_end = t_end;
  const auto h0 = hamiltonian_at(c, s, 0.0, opt.lambda_bar, run.sector);
  auto gs = ground_state(h0, c.L, run.sector, lanczos);
  run.E0 = gs.E;
  run.residual = gs.residual;
  StateVector psi = to_complex(gs.psi);
  gs.psi = RealState();
  run.result = run_evolution(psi, c, s, t_end, opt, tg);
  return run;
}

EvolutionRun run_config(const RunConfig& cfg) {
  const auto s = cfg.schedule();
  double t_end = 0.0;
  if (cfg.t_end)
    t_end = *cfg.t_end;
  else if (s.moving)
    t_end = s.moving->trajectory.duration();
  return run_schedule(cfg.lattice, s, t_end, cfg.evolution, cfg.observables);
}

RunConfig vacuum_partner(const RunConfig& cfg) {
  RunConfig v = cfg;
  v.charges.clear();
  for (const auto& q : cfg.charges)
    if (q.trajectory) v.charges.push_back(q);
  return v;
}

ScanRow scan_point(const LatticeConfig& c, double v, double x0, double xf, const EvolutionOptions& opt) {
  ScanRow row;
  row.v = v;
  ChargeSchedule s;
  try {
    const auto tr = standard_trajectory(v, x0, xf);
    tr.validate();
    if (tr.x0 < 1 || tr.xf > c.N() - 3) throw ConfigError("path leaves the lattice");
    s.moving = MovingCharge{tr, 1.0};
  } catch (const ConfigError& e) {
    row.skipped = true;
    row.reason = e.what();
    return row;
  }
  const auto run = run_schedule(c, s, s.moving->trajectory.duration(), opt, {});
  const auto fit = lattice_averaged_de_dx(run.result.series);
  row.slope = fit.slope;
  row.points = fit.points;
  return row;
}

}  // namespace hq
