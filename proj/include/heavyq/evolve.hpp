#pragma once
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heavyq/model.hpp"
#include "heavyq/operator.hpp"
#include "heavyq/trajectory.hpp"

namespace hq {

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct KrylovOptions {
  int max_dim = 30;
  double tol = 1e-12;  // accumulated error bound per call
  bool full_reorthogonalization = false;
};

struct KrylovStats {
  int matvecs = 0;
  int substeps = 0;
  double error_estimate = 0.0;
};

// psi <- exp(-i dt H) psi with an adaptive-substep Lanczos approximation.
KrylovStats krylov_expm(const CompiledOperator& H, StateVector& psi, double dt,
                        const KrylovOptions& opt = {});

// Nearest-neighbour hop exp(-i tau (s+_j s-_{j+1} + h.c.)/2) on bond (j, j+1).
void apply_bond_exp(StateVector& psi, int j, double tau);
// psi_i <- exp(-i tau d_i) psi_i
void apply_diagonal_exp(StateVector& psi, const std::vector<double>& d, double tau);
// One second-order split step: D/2, even/2, odd, even/2, D/2, where D is the
// diagonal of H (mass + electric) and the bonds carry H_kin.
void trotter2_step(StateVector& psi, const CompiledOperator& H, double dt);

enum class Stepper { Krylov, Trotter2 };
enum class ChargeSampling { Start, Midpoint, End };

std::string to_string(Stepper s);
Stepper parse_stepper(const std::string& s);
ChargeSampling parse_sampling(const std::string& s);

struct MovingCharge {
  TrajectoryParams trajectory;
  double Q = 1.0;
};

// Static heavy charges plus at most one moving charge.
struct ChargeSchedule {
  BackgroundCharges static_charges;
  std::optional<MovingCharge> moving;
  BackgroundCharges at(double t, int n_sites) const;
  double position(double t) const;  // moving-charge position (NaN if none)
  double velocity(double t) const;
  double total() const;
};

struct EvolutionOptions {
  Stepper stepper = Stepper::Krylov;
  double dt = 0.0;  // 0: step_schedule(v_max)
  ChargeSampling sampling = ChargeSampling::Midpoint;
  KrylovOptions krylov;
  double norm_tol = 1e-8;
  int lambda_bar = -1;  // < 0: untruncated interaction
};

struct EvolutionRecord {
  int step = 0;
  double t = 0.0;
  double x = 0.0;  // moving-charge position at t
  double dt = 0.0;
  Stepper stepper = Stepper::Krylov;
  int lambda_bar = -1;
  double t_charges = 0.0;  // time at which the step's charges were sampled
  int matvecs = 0;
};

// Called at t = 0 and after every step with the state and H[t].
using StepObserver =
    std::function<void(const EvolutionRecord&, const StateVector&, const CompiledOperator&)>;

// Hamiltonian with the charges of `schedule` at time t, bound to `basis`.
PauliTermSum hamiltonian_at(const LatticeConfig& c, const ChargeSchedule& s, double t,
                            int lambda_bar, int q_tot);

// Applies the time-ordered product of step unitaries on [0, t_end]. The
// state must live in a fixed-charge sector.
std::vector<EvolutionRecord> evolve(StateVector& psi, const LatticeConfig& c,
                                    const ChargeSchedule& schedule, double t_end,
                                    const EvolutionOptions& opt, const StepObserver& observe = {});

// Binary checkpoint: "HQCK", u64 header length, JSON header, raw amplitudes.
struct CheckpointHeader {
  int L = 0;
  std::optional<int> q_tot;
  double t = 0.0;
  std::string config_hash;
};
void save_checkpoint(const std::string& path, const StateVector& psi, const CheckpointHeader& h);
StateVector load_checkpoint(const std::string& path, CheckpointHeader* h = nullptr);

}  // namespace hq
