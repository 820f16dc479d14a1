#include "heavyq/model.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace hq {

void LatticeConfig::validate() const {
  if (L < 2) throw ConfigError("L must be >= 2");
  if (L > 16) throw ConfigError("L must be <= 16 (32 qubits)");
  if (!(m >= 0.0)) throw ConfigError("m must be >= 0");
  if (!(g >= 0.0)) throw ConfigError("g must be >= 0");
}

double BackgroundCharges::total() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.Q;
  return s;
}

std::vector<double> BackgroundCharges::dense(int N) const {
  validate(N);
  std::vector<double> out(N, 0.0);
  for (const auto& e : entries) out[e.site] += e.Q;
  return out;
}

void BackgroundCharges::validate(int N) const {
  for (const auto& e : entries)
    if (e.site < 0 || e.site >= N)
      throw ConfigError("background charge site " + std::to_string(e.site) +
                        " outside [0, " + std::to_string(N - 1) + "]");
}

std::uint64_t strong_coupling_vacuum(int L) {
  std::uint64_t s = 0;
  for (int k = 0; k < 2 * L; k += 2) s |= std::uint64_t{1} << k;
  return s;
}

static double stagger(int k) { return (k % 2 == 0) ? 1.0 : -1.0; }

PauliTermSum charge_operator(int N, int k) {
  PauliTermSum q(N);
  q.add(-0.5, PauliString::single(k, 'Z'));
  q.add(-0.5 * stagger(k), PauliString{});
  return q;
}

PauliTermSum total_charge_operator(int N) {
  PauliTermSum q(N);
  for (int k = 0; k < N; ++k) q.add(charge_operator(N, k));
  q.simplify();
  return q;
}

PauliTermSum mass_term(const LatticeConfig& c) {
  const int N = c.N();
  PauliTermSum h(N);
  for (int j = 0; j < N; ++j) h.add(0.5 * c.m * stagger(j), PauliString::single(j, 'Z'));
  h.add(0.5 * c.m * N, PauliString{});
  h.simplify();
  return h;
}

PauliTermSum kinetic_term(const LatticeConfig& c) {
  // (1/2)(s+_j s-_{j+1} + h.c.) = (1/4)(X_j X_{j+1} + Y_j Y_{j+1})
  const int N = c.N();
  PauliTermSum h(N);
  for (int j = 0; j + 1 < N; ++j) {
    const std::uint64_t b = std::uint64_t{3} << j;
    h.add(0.25, PauliString{b, 0});
    h.add(0.25, PauliString{b, b});
  }
  return h;
}

namespace {

// rho_k = q_k + Q_k = a_k - Z_k / 2 with a_k = Q_k - (-1)^k / 2.
std::vector<double> rho_offsets(const std::vector<double>& Qk) {
  std::vector<double> a(Qk.size());
  for (std::size_t k = 0; k < Qk.size(); ++k) a[k] = Qk[k] - 0.5 * stagger(static_cast<int>(k));
  return a;
}

PauliString zz(int k, int l) {
  return PauliString{0, (std::uint64_t{1} << k) | (std::uint64_t{1} << l)};
}

// Adds w * rho_k rho_l (k != l) to h.
void add_rho_pair(PauliTermSum& h, double w, int k, int l, const std::vector<double>& a) {
  h.add(0.25 * w, zz(k, l));
  h.add(-0.5 * w * a[l], PauliString::single(k, 'Z'));
  h.add(-0.5 * w * a[k], PauliString::single(l, 'Z'));
  h.add(w * a[k] * a[l], PauliString{});
}

}  // namespace

PauliTermSum electric_term(const LatticeConfig& c, const BackgroundCharges& q) {
  const int N = c.N();
  const auto a = rho_offsets(q.dense(N));
  const double pre = 0.5 * c.g * c.g;
  PauliTermSum h(N);
  // E_j^2 = (c_j^2 + (j+1)/4) - c_j sum_{k<=j} Z_k + (1/2) sum_{k<l<=j} Z_k Z_l
  double cj = 0.0;
  for (int j = 0; j + 1 < N; ++j) {
    cj += a[j];
    h.add(pre * (cj * cj + 0.25 * (j + 1)), PauliString{});
    for (int k = 0; k <= j; ++k) h.add(-pre * cj, PauliString::single(k, 'Z'));
  }
  for (int k = 0; k < N; ++k)
    for (int l = k + 1; l + 1 < N; ++l) h.add(0.25 * c.g * c.g * (N - 1 - l), zz(k, l));
  h.simplify();
  return h;
}

PauliTermSum build_hamiltonian(const LatticeConfig& c, const BackgroundCharges& q) {
  c.validate();
  q.validate(c.N());
  PauliTermSum h(c.N());
  h.add(mass_term(c));
  h.add(kinetic_term(c));
  h.add(electric_term(c, q));
  h.simplify();
  return h;
}

double electric_field(std::uint64_t state, int j, const std::vector<double>& Qk) {
  double e = 0.0;
  for (int k = 0; k <= j; ++k) {
    const double z = ((state >> k) & 1) ? -1.0 : 1.0;
    e += -0.5 * (z + stagger(k)) + Qk[k];
  }
  return e;
}

PauliTermSum truncate_interaction(const LatticeConfig& c, const BackgroundCharges& q,
                                  int lambda_bar, int q_tot) {
  if (lambda_bar < 0) throw ConfigError("lambda_bar must be >= 0");
  if (lambda_bar >= c.L - 1) return build_hamiltonian(c, q);
  c.validate();
  const int N = c.N();
  const auto a = rho_offsets(q.dense(N));
  const double C = q_tot + q.total();
  const double pre = 0.5 * c.g * c.g;

  PauliTermSum h(N);
  h.add(mass_term(c));
  h.add(kinetic_term(c));
  // (N-1) C^2 - C sum_k k rho_k
  h.add(pre * (N - 1) * C * C, PauliString{});
  for (int k = 0; k < N; ++k) {
    h.add(-pre * C * k * a[k], PauliString{});
    h.add(0.5 * pre * C * k, PauliString::single(k, 'Z'));
  }
  // -sum_{k<l} (l-k) rho_k rho_l restricted to |n(k) - n(l)| <= lambda_bar
  for (int k = 0; k < N; ++k)
    for (int l = k + 1; l < N; ++l) {
      if (l / 2 - k / 2 > lambda_bar) continue;
      add_rho_pair(h, -pre * (l - k), k, l, a);
    }
  h.simplify();
  return h;
}

int default_lambda_bar(double hadron_mass) {
  if (!(hadron_mass > 0.0)) throw ConfigError("hadron mass must be positive");
  return static_cast<int>(std::ceil(0.5 / hadron_mass));
}

double group_velocity(double m, double K) {
  return std::sin(K) / (4.0 * std::sqrt(m * m + std::pow(std::sin(0.5 * K), 2)));
}

std::vector<DispersionPoint> free_dispersion(const LatticeConfig& c) {
  if (c.L < 1) throw ConfigError("L must be >= 1");
  std::vector<DispersionPoint> out;
  for (int n = 0; n < c.L; ++n) {
    const double K = (n + 0.5) * std::numbers::pi / (c.L + 0.5);
    const double E = std::sqrt(c.m * c.m + std::pow(std::sin(0.5 * K), 2));
    out.push_back({n, K, E, group_velocity(c.m, K)});
  }
  return out;
}

double max_group_velocity(double m) {
  if (!(m >= 0.0)) throw ConfigError("m must be >= 0");
  return 0.5 * (std::sqrt(m * m + 1.0) - m);
}

}  // namespace hq
