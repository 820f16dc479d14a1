#pragma once

namespace hq {

struct TrajectoryParams {
  double v_max = 0.0;
  double a_max = 0.0;
  double x0 = 0.0;
  double xf = 0.0;
  double a0 = 1e-4;

  void validate() const;
  double beta() const { return 2.0 * a_max / v_max; }
  // round-half-to-even of arccosh(sqrt(a_max / a0)) / beta
  int t0() const;
  double T() const { return (xf - x0) / v_max; }
  // End of the run: deceleration finished, symmetric with the start.
  double duration() const { return 2.0 * t0() + T(); }
};

// a_max = v_max / 5 as used throughout the energy-loss study.
TrajectoryParams standard_trajectory(double v_max, double x0, double xf);

struct Kinematics {
  double x = 0.0;
  double v = 0.0;
  double a = 0.0;
};

Kinematics eval_trajectory(const TrajectoryParams& p, double t);

struct ChargePartition {
  int site_lo = 0;
  int site_hi = 0;
  double q_lo = 0.0;
  double q_hi = 0.0;
};

// Linear split onto the two nearest odd (positron) sites; n_sites bounds the
// lattice (x must lie in [1, n_sites - 3]).
ChargePartition partition_charge(double x, double Q, int n_sites);

// Inverts x(t) on [0, duration] (x is strictly increasing there).
double time_for_position(const TrajectoryParams& p, double x);

double step_schedule(double v_max);

}  // namespace hq
