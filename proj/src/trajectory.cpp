#include "heavyq/trajectory.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_roots.h>

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "heavyq/model.hpp"
#include "numerics.hpp"

namespace hq {

void TrajectoryParams::validate() const {
  if (!(v_max > 0.0 && v_max < 1.0)) throw ConfigError("v_max must lie in (0, 1)");
  if (!(a_max > 0.0)) throw ConfigError("a_max must be > 0");
  if (!(xf > x0)) throw ConfigError("xf must exceed x0");
  if (!(a0 > 0.0)) throw ConfigError("a0 must be > 0");
  if (a0 >= a_max) throw ConfigError("initial acceleration must be below a_max");
}

int TrajectoryParams::t0() const {
  validate();
  return static_cast<int>(std::nearbyint(std::acosh(std::sqrt(a_max / a0)) / beta()));
}

TrajectoryParams standard_trajectory(double v_max, double x0, double xf) {
  TrajectoryParams p{v_max, v_max / 5.0, x0, xf, 1e-4};
  p.validate();
  return p;
}

namespace {
// log(cosh(u)) without overflow for large |u|.
double log_cosh(double u) {
  const double a = std::abs(u);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}
double sech2(double u) {
  const double c = std::cosh(u);
  return std::isfinite(c) ? 1.0 / (c * c) : 0.0;
}
}  // namespace

Kinematics eval_trajectory(const TrajectoryParams& p, double t) {
  if (t < 0.0) throw std::domain_error("trajectory time must be >= 0");
  const double b = p.beta();
  const double u1 = b * (t - p.t0());
  const double u2 = b * (t - p.t0() - p.T());
  Kinematics k;
  k.x = p.v_max * p.v_max / (4.0 * p.a_max) * (log_cosh(u1) - log_cosh(u2)) +
        0.5 * (p.xf + p.x0);
  k.v = 0.5 * p.v_max * (std::tanh(u1) - std::tanh(u2));
  k.a = p.a_max * (sech2(u1) - sech2(u2));
  return k;
}

ChargePartition partition_charge(double x, double Q, int n_sites) {
  if (!(x >= 1.0 && x <= n_sites - 3.0))
    throw std::out_of_range("charge position " + std::to_string(x) + " outside [1, " +
                            std::to_string(n_sites - 3) + "]");
  const int lo = 2 * static_cast<int>(std::floor((x - 1.0) / 2.0)) + 1;
  ChargePartition c;
  c.site_lo = lo;
  c.site_hi = lo + 2;
  c.q_hi = 0.5 * Q * (x - lo);
  c.q_lo = Q - c.q_hi;
  return c;
}

double time_for_position(const TrajectoryParams& p, double x) {
  p.validate();
  gsl_quiet();
  const double t_end = p.duration();
  const double x_lo = eval_trajectory(p, 0.0).x, x_hi = eval_trajectory(p, t_end).x;
  if (!(x > x_lo && x < x_hi))
    throw std::domain_error("position outside the monotone segment of x(t)");
  struct Ctx {
    const TrajectoryParams* p;
    double x;
  } ctx{&p, x};
  gsl_function F;
  F.function = [](double t, void* c) {
    auto* q = static_cast<Ctx*>(c);
    return eval_trajectory(*q->p, t).x - q->x;
  };
  F.params = &ctx;
  std::unique_ptr<gsl_root_fsolver, decltype(&gsl_root_fsolver_free)> s(
      gsl_root_fsolver_alloc(gsl_root_fsolver_brent), gsl_root_fsolver_free);
  gsl_root_fsolver_set(s.get(), &F, 0.0, t_end);
  double t = 0.5 * t_end;
  for (int it = 0; it < 200; ++it) {
    gsl_root_fsolver_iterate(s.get());
    t = gsl_root_fsolver_root(s.get());
    const double lo = gsl_root_fsolver_x_lower(s.get()), hi = gsl_root_fsolver_x_upper(s.get());
    if (gsl_root_test_interval(lo, hi, 1e-13, 0.0) == GSL_SUCCESS) break;
  }
  return t;
}

double step_schedule(double v) {
  if (!(v > 0.0 && v <= 0.99)) throw ConfigError("v_max must lie in (0, 0.99]");
  if (v <= 0.05) return 2.0;
  if (v <= 0.1) return 1.5;
  if (v <= 0.2) return 1.0;
  if (v <= 0.4) return 0.5;
  return 0.25;
}

}  // namespace hq
