#pragma once
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "heavyq/eigensolver.hpp"
#include "heavyq/evolve.hpp"
#include "heavyq/model.hpp"
#include "heavyq/state.hpp"

namespace hq {

// Per-site <q_k> = -(<Z_k> + (-1)^k) / 2.
template <class T>
std::vector<double> charge_density(const BasicState<T>& psi);
template <class T>
double total_charge(const BasicState<T>& psi);
// Average staggered occupation (1/2L) sum_j <[(-1)^j Z_j + 1] / 2>.
template <class T>
double chiral_condensate(const BasicState<T>& psi);

using Mat2 = std::array<std::array<cplx, 2>, 2>;
using Mat4 = std::array<std::array<cplx, 4>, 4>;
// Reduced density matrices; the local basis index is bit_n + 2 bit_m.
Mat2 reduced_density(const StateVector& psi, int n);
Mat4 reduced_density(const StateVector& psi, int n, int m);
double von_neumann_entropy_bits(const Mat2& rho);
double von_neumann_entropy_bits(const Mat4& rho);

double single_site_entropy(const StateVector& psi, int n);
double two_site_entropy(const StateVector& psi, int n, int m);
double mutual_information(const StateVector& psi, int n, int m);

// tau_n = |<psi| Y_{i1} ... Y_{in} |psi*>|^2 over the listed sites.
double n_tangle(const StateVector& psi, const std::vector<int>& sites);

struct TangleEntry {
  int n = 0;
  int i1 = 0;
  double center = 0.0;  // (i1 + in) / 2
  double tau = 0.0;
};
// Consecutive windows i_k = i1 + k - 1 for each requested n.
std::vector<TangleEntry> tangle_table(const StateVector& psi, const std::vector<int>& ns);

struct ObservableToggles {
  bool entropies = false;
  bool mutual_information = false;
  std::vector<int> tangle_ns;  // empty: no n-tangles
};

struct ObservableRecord {
  int step = 0;
  double t = 0.0;
  double x = 0.0;
  double v = 0.0;
  double E = 0.0;
  double norm = 1.0;
  double q_tot = 0.0;
  std::vector<double> density;
  std::vector<double> entropy;                    // S_n, optional
  std::vector<std::vector<double>> mutual_info;   // I_nm, optional
  std::vector<TangleEntry> tangles;               // optional
};

struct ObservableSeries {
  std::vector<ObservableRecord> records;
  double v_max = 0.0;  // of the moving charge (0 if static)
  std::size_t size() const { return records.size(); }
};

ObservableRecord measure(const StateVector& psi, const CompiledOperator& H, const ObservableToggles& tg);

struct RunResult {
  ObservableSeries series;
  std::vector<EvolutionRecord> evolution;
};

// Evolves psi (in place) and measures at every step.
RunResult run_evolution(StateVector& psi, const LatticeConfig& c, const ChargeSchedule& s,
                        double t_end, const EvolutionOptions& opt, const ObservableToggles& tg);

// (E(t+dt) - E(t-dt)) / (x(t+dt) - x(t-dt)); one-sided at the ends; NaN where
// the charge does not move.
std::vector<double> de_dx(const ObservableSeries& s);
// Same rule for arbitrary series y(x).
std::vector<double> finite_difference(const std::vector<double>& x, const std::vector<double>& y);

// (1/2)[f(c + xt) + f(c - xt)] with f = dE/dx linearly interpolated in x.
std::vector<double> symmetrized_de_dx(const ObservableSeries& s, double center,
                                      const std::vector<double>& xt);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);
// Least-squares slope of E(x) over records with v >= v_max - 0.01.
LinearFit lattice_averaged_de_dx(const ObservableSeries& s, double window = 0.01);

// Pointwise dE/dx(medium) - dE/dx(vacuum); grids must match.
std::vector<double> delta_medium(const ObservableSeries& med, const ObservableSeries& vac);
// Delta_C - Delta_A - Delta_B from runs with static sets A, B and A+B.
std::vector<double> coherence_combination(const ObservableSeries& a, const ObservableSeries& b,
                                          const ObservableSeries& ab, const ObservableSeries& vac);

struct HadronMass {
  double E_vac = 0.0;
  double E_charged = 0.0;
  double lambda_bar = 0.0;
};
// Gap of the ground state with Q_{L-1} = +1 (sector q_tot = -1) above the vacuum.
HadronMass heavy_hadron_mass(const LatticeConfig& c, const LanczosOptions& opt = {});

// CSV (RFC 4180) writers.
void write_series_csv(const std::string& path, const ObservableSeries& s);
void write_tangles_csv(const std::string& path, const ObservableSeries& s);

}  // namespace hq
