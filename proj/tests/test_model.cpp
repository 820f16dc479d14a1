#include <doctest.h>

#include "heavyq/eigensolver.hpp"
#include "heavyq/model.hpp"
#include "heavyq/operator.hpp"
#include "oracle.hpp"

using namespace hq;

TEST_CASE("hamiltonian equals the occupation-basis construction") {
  for (int L : {2, 3}) {
    const int N = 2 * L;
    for (const auto& charges : std::vector<std::vector<std::pair<int, double>>>{
             {}, {{N - 1, 1.0}}, {{1, 1.0}, {2, -1.0}}, {{1, 0.4}, {2, 0.6}}}) {
      const LatticeConfig c{L, 0.37, 0.9};
      BackgroundCharges q;
      std::vector<double> Qk(N, 0.0);
      for (auto [s, Q] : charges) q.add(s, Q), Qk[s] += Q;
      const auto D = oracle::schwinger(L, c.m, c.g, Qk);
      CHECK((oracle::dense(build_hamiltonian(c, q), N) - D).norm() < 1e-10);
    }
  }
}

TEST_CASE("ZZ coefficient between staggered sites") {
  const LatticeConfig c{4, 0.1, 0.8};
  const auto h = build_hamiltonian(c, {});
  const int N = c.N();
  for (int j = 0; j < N; ++j)
    for (int k = j + 1; k < N - 1; ++k) {
      PauliString p;
      p.z = (std::uint64_t{1} << j) | (std::uint64_t{1} << k);
      CHECK(h.coef_of(p) == doctest::Approx(c.g * c.g / 4.0 * (N - 1 - k)));
    }
}

TEST_CASE("electric field follows Gauss's law") {
  const int L = 3;
  const auto vac = strong_coupling_vacuum(L);
  std::vector<double> Q(2 * L, 0.0);
  for (int j = 0; j < 2 * L; ++j) CHECK(electric_field(vac, j, Q) == doctest::Approx(0.0));
  Q[3] = 1.0;
  CHECK(electric_field(vac, 2, Q) == doctest::Approx(0.0));
  CHECK(electric_field(vac, 3, Q) == doctest::Approx(1.0));
}

TEST_CASE("charge operators and the strong-coupling vacuum") {
  const int L = 3;
  const auto vac = strong_coupling_vacuum(L);
  CHECK(vac == 0b010101);
  StateVector psi(Basis::full(2 * L));
  psi[vac] = 1.0;
  for (int k = 0; k < 2 * L; ++k) {
    const auto out = apply_operator(charge_operator(2 * L, k), psi);
    CHECK(std::abs(out[vac]) < 1e-14);
  }
  CHECK(Basis::charge_sector(L, -1)->popcount() == L - 1);
}

TEST_CASE("truncated interaction") {
  const LatticeConfig c{4, 0.1, 0.8};
  BackgroundCharges q;
  q.add(3, 1.0);
  const int sector = -1;
  SUBCASE("no truncation at lambda_bar >= L-1 inside the sector") {
    const auto full = build_hamiltonian(c, q);
    const auto tr = truncate_interaction(c, q, c.L - 1, sector);
    const auto b = Basis::charge_sector(c.L, sector);
    CompiledOperator a(full, b), t(tr, b);
    RealState psi(b);
    for (std::size_t i = 0; i < psi.dim(); ++i) psi[i] = std::sin(1.0 + i);
    const auto x = a(psi), y = t(psi);
    for (std::size_t i = 0; i < psi.dim(); ++i) CHECK(x[i] == doctest::Approx(y[i]).epsilon(1e-10));
  }
  SUBCASE("ground energy converges as the cutoff grows") {
    const double exact = ground_state(build_hamiltonian(c, q), c.L, sector).E;
    const double e0 = ground_state(truncate_interaction(c, q, 0, sector), c.L, sector).E;
    const double e3 = ground_state(truncate_interaction(c, q, c.L - 1, sector), c.L, sector).E;
    CHECK(std::abs(e0 - exact) > 1e-6);
    CHECK(e3 == doctest::Approx(exact).epsilon(1e-9));
  }
}

TEST_CASE("free dispersion and group velocity") {
  CHECK(max_group_velocity(0.0) == 0.5);
  CHECK(max_group_velocity(0.1) == doctest::Approx(0.4524938).epsilon(1e-6));
  // numerical maximum of the group velocity
  for (double m : {0.05, 0.1, 0.5}) {
    double best = 0.0;
    for (int i = 0; i <= 200000; ++i) best = std::max(best, group_velocity(m, 3.14159265358979 * i / 200000));
    CHECK(max_group_velocity(m) == doctest::Approx(best).epsilon(1e-6));
  }
  const auto pts = free_dispersion(LatticeConfig{8, 0.1, 0.0});
  CHECK(!pts.empty());
  for (const auto& p : pts) CHECK(p.E > 0.0);
}

TEST_CASE("free-fermion oracle at g = 0") {
  // single-particle spectrum of the staggered chain: h_jj = m (-1)^j, h_j,j+1 = 1/2
  const int L = 5, N = 2 * L;
  const double m = 0.3;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(N, N);
  for (int j = 0; j < N; ++j) h(j, j) = -m * ((j % 2) ? -1.0 : 1.0);
  for (int j = 0; j + 1 < N; ++j) h(j, j + 1) = h(j + 1, j) = 0.5;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  // H = sum_j m/2[(-1)^j (1 - 2 n_j) + 1] + hops: constant m N/2 + sum eps n
  double e = 0.5 * m * N;
  for (int k = 0; k < L; ++k) e += es.eigenvalues()(k);
  const auto gs = ground_state(build_hamiltonian(LatticeConfig{L, m, 0.0}, {}), L, 0);
  CHECK(gs.E == doctest::Approx(e).epsilon(1e-10));
}

TEST_CASE("invalid configurations are rejected") {
  CHECK_THROWS_AS(LatticeConfig({1, 0.1, 0.8}).validate(), ConfigError);
  CHECK_THROWS_AS(LatticeConfig({4, -0.1, 0.8}).validate(), ConfigError);
  BackgroundCharges q;
  q.add(8, 1.0);
  CHECK_THROWS_AS(build_hamiltonian(LatticeConfig{4, 0.1, 0.8}, q), ConfigError);
}
