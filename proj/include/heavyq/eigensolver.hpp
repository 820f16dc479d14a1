#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>

#include "heavyq/model.hpp"
#include "heavyq/operator.hpp"

namespace hq {

struct NotConverged : std::runtime_error {
  double residual;
  NotConverged(const std::string& what, double r) : std::runtime_error(what), residual(r) {}
};

struct LanczosOptions {
  int krylov_dim = 60;        // basis vectors kept per restart cycle
  int max_restarts = 500;
  double tol = 1e-9;          // on ||H psi - E psi||
  std::uint64_t seed = 20240611;
  std::size_t memory_budget = std::size_t{2} << 30;  // bytes for the Krylov basis
};

struct GroundState {
  double E = 0.0;
  RealState psi;
  double residual = 0.0;
  int matvecs = 0;
};

// Lowest eigenpair of a real symmetric operator on its basis (restarted
// Lanczos with full reorthogonalization).
GroundState ground_state(const CompiledOperator& H, const LanczosOptions& opt = {},
                         const RealState* guess = nullptr);

// Ground state of h in the light-charge sector q_tot.
GroundState ground_state(const PauliTermSum& h, int L, int q_tot, const LanczosOptions& opt = {});

}  // namespace hq
