#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "heavyq/pauli.hpp"

namespace hq {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct LatticeConfig {
  int L = 0;       // spatial sites
  double m = 0.0;  // bare mass
  double g = 0.0;  // coupling
  int N() const { return 2 * L; }
  void validate() const;
};

struct BackgroundCharge {
  int site = 0;
  double Q = 0.0;
};

// Heavy (external) charges on staggered sites; repeated sites accumulate.
struct BackgroundCharges {
  std::vector<BackgroundCharge> entries;
  void add(int site, double Q) { entries.push_back({site, Q}); }
  double total() const;
  // Dense per-site values Q_k, k in [0, N).
  std::vector<double> dense(int N) const;
  void validate(int N) const;
};

// Bit pattern of the strong-coupling vacuum: even (electron) sites set.
std::uint64_t strong_coupling_vacuum(int L);

// q_k = -(Z_k + (-1)^k)/2 as a Pauli sum.
PauliTermSum charge_operator(int N, int k);
PauliTermSum total_charge_operator(int N);

PauliTermSum mass_term(const LatticeConfig& c);
PauliTermSum kinetic_term(const LatticeConfig& c);
PauliTermSum electric_term(const LatticeConfig& c, const BackgroundCharges& q);

// H = H_m + H_kin + H_el expanded into identity, Z, ZZ and XX+YY terms.
PauliTermSum build_hamiltonian(const LatticeConfig& c, const BackgroundCharges& q);

// Cumulative electric field E_j = sum_{k<=j} (q_k + Q_k) on a basis state.
double electric_field(std::uint64_t state, int j, const std::vector<double>& Qk);

// Electric term with long-range pair interactions dropped. Uses that the total
// charge C = q_tot + Q_tot is a c-number inside a fixed sector:
//   sum_j (sum_{k<=j} rho_k)^2
//     = (N-1) C^2 - C sum_k k rho_k - sum_{k<l} (l-k) rho_k rho_l,
// where the pair sum, re-expressed through spatial q̄_n / δ_n, keeps only
// spatial separations |n - n'| <= lambda_bar. The result equals H restricted
// to the sector q_tot when nothing is dropped; lambda_bar >= L-1 returns
// build_hamiltonian unchanged.
PauliTermSum truncate_interaction(const LatticeConfig& c, const BackgroundCharges& q,
                                  int lambda_bar, int q_tot);

// Cutoff default: ceil(xi/2) with xi = 1/lambda_bar_mass.
int default_lambda_bar(double hadron_mass);

struct DispersionPoint {
  int nbar = 0;
  double K = 0.0;
  double E = 0.0;
  double v = 0.0;
};

std::vector<DispersionPoint> free_dispersion(const LatticeConfig& c);
double group_velocity(double m, double K);
double max_group_velocity(double m);

}  // namespace hq
