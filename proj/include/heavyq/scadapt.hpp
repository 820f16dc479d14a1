#pragma once
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heavyq/eigensolver.hpp"
#include "heavyq/model.hpp"
#include "heavyq/operator.hpp"
#include "heavyq/state.hpp"

namespace hq {

// Pool families; the declaration order is the tie-break order.
enum class PoolFamily { Charge, Volume, Surface0, Surface1 };

std::string to_string(PoolFamily f);
PoolFamily parse_family(const std::string& s);

struct PoolLabel {
  PoolFamily family = PoolFamily::Charge;
  int n = 0;
  int d = 0;
  int site = -1;        // anchoring heavy-charge site (charge family)
  int charge_sign = 0;  // sign of that charge (charge family)
  std::string str() const;
  friend bool operator<(const PoolLabel& a, const PoolLabel& b);
  friend bool operator==(const PoolLabel& a, const PoolLabel& b);
};

// One term c * G(a,b) of a generator.
struct HopTerm {
  int a = 0;
  int b = 0;
  double coef = 1.0;
};

// Generator O = sum_k c_k G(a_k, b_k); exp(i theta O) is real orthogonal.
struct PoolOperator {
  PoolLabel label;
  std::vector<HopTerm> terms;
  PauliTermSum pauli(int nqubits) const;
  // All Pauli strings of the realization commute pairwise.
  bool commuting(int nqubits) const;
};

// Alternating volume sums and the two surface families (odd d only).
PoolOperator volume_operator(int L, int d);
PoolOperator surface_operator(int L, int which, int d);
std::vector<PoolOperator> build_pool_vacuum(int L);

// Hops anchored at a heavy charge on `site`. For a positive charge
// O(n,d) = G(site-n, site-n+d); for a negative charge the CP image with the sign
// chosen so that mirrored ansatze carry negated angles:
// O(n,d) = (-1)^d G(site+n-d, site+n). Out-of-lattice (n,d) are skipped.
PoolOperator charge_operator(int L, int site, int charge_sign, int n, int d);
// Default site: L-1 for a positive charge, L for a negative one.
std::vector<PoolOperator> build_pool_charge(int L, int site = -1, int charge_sign = +1);
// Union over the given charges (duplicate hops dropped); warns through
// `warnings` when charges sit closer than 2*xi to each other or a boundary.
std::vector<PoolOperator> build_pool_charges(int L, const BackgroundCharges& q, double xi = 0.0,
                                             std::vector<std::string>* warnings = nullptr);

// exp(i theta O) applied exactly, or first-order Trotterized term by term with
// the even-n group first (Brick) or in printed term order.
enum class ApplyMode { Exact, Trotter, TrotterPrinted };
std::string to_string(ApplyMode m);
ApplyMode parse_apply_mode(const std::string& s);

struct AnsatzElement {
  PoolOperator op;
  double theta = 0.0;
  ApplyMode mode = ApplyMode::Exact;
};
using Ansatz = std::vector<AnsatzElement>;

// psi <- exp(i theta O) psi for one element.
void apply_element(RealState& psi, const PoolOperator& op, double theta, ApplyMode mode);
void apply_ansatz(RealState& psi, const Ansatz& a);
RealState ansatz_state(const RealState& init, const Ansatz& a);

// i <psi|[H, O]|psi> = d/dtheta <H> at theta = 0.
double gradient(const RealState& psi, const CompiledOperator& H, const PoolOperator& op);
// Same with a precomputed H psi.
double gradient_from(const RealState& psi, const RealState& h_psi, const PoolOperator& op);

// E(theta) and dE/dtheta_k for all ansatz angles (reverse-mode sweep).
double energy_and_gradient(const CompiledOperator& H, const RealState& init, const Ansatz& a,
                           std::vector<double>* grad);

struct OptimizerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OptimizeOptions {
  double gtol = 1e-8;  // on the gradient 2-norm
  int max_iterations = 2000;
  double initial_step = 0.01;
};

struct OptimizeResult {
  double E = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
};

// Quasi-Newton (BFGS) minimization of <H> over the ansatz angles, in place.
OptimizeResult optimize_angles(const CompiledOperator& H, const RealState& init, Ansatz& a,
                               const OptimizeOptions& opt = {});

double infidelity_density(const RealState& ansatz, const RealState& exact, int L);
// (E_gs - E) / E_gs; the absolute deviation E - E_gs when E_gs = 0.
double energy_deviation(double E_ansatz, double E_gs);

struct AdaptOptions {
  int max_steps = 4;
  double gradient_threshold = 0.0;  // stop when max |gradient| falls below
  ApplyMode mode = ApplyMode::Exact;
  OptimizeOptions optimizer;
  double tie_tolerance = 1e-12;  // relative gap treated as a gradient tie
};

struct AdaptStepRecord {
  int step = 0;            // 0: initial state
  std::optional<PoolLabel> selected;
  double gradient = 0.0;   // of the selected operator before optimization
  std::vector<double> theta;
  double E = 0.0;
  double delta_E = std::numeric_limits<double>::quiet_NaN();
  double infidelity = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double grad_norm = 0.0;
};

struct AdaptResult {
  Ansatz ansatz;
  std::vector<AdaptStepRecord> steps;
  double E_gs = std::numeric_limits<double>::quiet_NaN();
};

// Grows an ansatz on top of init by the largest-|gradient| rule; every step
// re-optimizes all angles from a warm start (new angle 0). Metrics are filled
// when an exact ground state is given.
AdaptResult adapt_vqe(const CompiledOperator& H, const RealState& init,
                      const std::vector<PoolOperator>& pool, const AdaptOptions& opt = {},
                      const GroundState* exact = nullptr);

// (X_{c-1} + X_{c+1}) / sqrt(2) around every heavy charge (even-site electrons
// for positive charges, odd-site positrons for negative ones) on |Omega_0>,
// followed by the vacuum ansatz. Lives in the sector that screens all charges.
RealState prepare_init_with_charge(int L, const Ansatz& vacuum, const BackgroundCharges& q);
// Light-charge sector screening the heavy charges.
int screening_sector(const BackgroundCharges& q);

// CP image of an ansatz: charge-family elements move to the mirrored site with
// opposite charge and negated angle; vacuum elements are unchanged.
Ansatz mirror_ansatz(const Ansatz& a, int L);

struct ExtrapolationFit {
  double theta_inf = 0.0;
  double c = 0.0;
  double b = 0.0;
  double rms_residual = 0.0;
  bool degenerate = false;  // fell back to the largest-L value
  std::string message;
};
// Least-squares fit theta(L) = theta_inf + c exp(-b L), b > 0.
ExtrapolationFit extrapolate_parameters(const std::vector<double>& L, const std::vector<double>& theta);

// JSON ansatz files: {"L": L, "ansatz": [{family, n, d, site, charge_sign, theta, mode}, ...]}.
std::string ansatz_to_json(const Ansatz& a, int L);
Ansatz ansatz_from_json(const std::string& text, int* L = nullptr);
void save_ansatz(const std::string& path, const Ansatz& a, int L);
Ansatz load_ansatz(const std::string& path, int* L = nullptr);
// Rebuilds the operator of a label at size L.
PoolOperator pool_operator(int L, const PoolLabel& label);

}  // namespace hq
