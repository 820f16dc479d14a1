#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "heavyq/eigensolver.hpp"
#include "heavyq/evolve.hpp"
#include "heavyq/model.hpp"
#include "heavyq/scadapt.hpp"
#include "oracle.hpp"

using namespace hq;

namespace {
StateVector random_sector_state(int L, int q, unsigned seed) {
  StateVector psi(Basis::charge_sector(L, q));
  for (std::size_t i = 0; i < psi.dim(); ++i) psi[i] = cplx(std::sin(seed + 1.3 * i), std::cos(0.7 * i + seed));
  normalize(psi.amp);
  return psi;
}
}  // namespace

TEST_CASE("Krylov propagator matches the dense exponential") {
  const int L = 3, N = 6;
  const LatticeConfig c{L, 0.2, 0.9};
  BackgroundCharges q;
  q.add(3, 1.0);
  const auto h = build_hamiltonian(c, q);
  auto psi = random_sector_state(L, -1, 2);
  const auto idx = oracle::sector_states(N, L - 1);
  const oracle::Mat U = oracle::expm_herm(oracle::restrict(oracle::dense(h, N), idx), 2.5);
  oracle::Vec v(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) v(i) = psi[psi.basis->index(idx[i])];
  const oracle::Vec ref = U * v;
  CompiledOperator H(h, psi.basis);
  krylov_expm(H, psi, 2.5);
  for (std::size_t i = 0; i < idx.size(); ++i) CHECK(std::abs(psi[psi.basis->index(idx[i])] - ref(i)) < 1e-10);
}

TEST_CASE("second-order splitting converges quadratically") {
  const int L = 3;
  const LatticeConfig c{L, 0.1, 0.8};
  const auto h = build_hamiltonian(c, {});
  const auto psi0 = random_sector_state(L, 0, 5);
  CompiledOperator H(h, psi0.basis);
  auto exact = psi0;
  krylov_expm(H, exact, 4.0);
  std::vector<double> err;
  for (int n : {20, 40, 80}) {
    auto psi = psi0;
    for (int k = 0; k < n; ++k) trotter2_step(psi, H, 4.0 / n);
    CHECK(norm(psi.amp) == doctest::Approx(1.0).epsilon(1e-12));
    err.push_back(1.0 - fidelity(psi, exact));
  }
  // infidelity ~ dt^4
  CHECK(err[0] / err[1] == doctest::Approx(16.0).epsilon(0.15));
  CHECK(err[1] / err[2] == doctest::Approx(16.0).epsilon(0.15));
}

TEST_CASE("time-dependent evolution conserves norm and the charge sector") {
  const LatticeConfig c{4, 0.1, 0.8};
  ChargeSchedule s;
  s.moving = MovingCharge{standard_trajectory(0.3, 3.0, 11.0), 1.0};
  const int q = screening_sector(s.at(0.0, c.N()));
  const auto gs = ground_state(hamiltonian_at(c, s, 0.0, -1, q), c.L, q);
  auto psi = to_complex(gs.psi);
  for (Stepper st : {Stepper::Krylov, Stepper::Trotter2}) {
    EvolutionOptions opt;
    opt.stepper = st;
    auto p = psi;
    int calls = 0;
    const auto rec = evolve(p, c, s, 10.0, opt, [&](const EvolutionRecord&, const StateVector& x, const CompiledOperator&) {
      ++calls;
      CHECK(norm(x.amp) == doctest::Approx(1.0).epsilon(1e-10));
    });
    CHECK(calls == static_cast<int>(rec.size()));  // includes t = 0
    CHECK(rec.front().t == 0.0);
    CHECK(rec.back().t == doctest::Approx(10.0));
    for (std::size_t k = 1; k < rec.size(); ++k) CHECK(rec[k].t > rec[k - 1].t);
  }
}

TEST_CASE("static charges leave an eigenstate stationary") {
  const LatticeConfig c{3, 0.1, 0.8};
  ChargeSchedule s;
  s.static_charges.add(3, 1.0);
  const int q = screening_sector(s.static_charges);
  const auto gs = ground_state(build_hamiltonian(c, s.static_charges), c.L, q);
  auto psi = to_complex(gs.psi);
  const auto psi0 = psi;
  evolve(psi, c, s, 5.0, EvolutionOptions{.dt = 0.5});
  CHECK(fidelity(psi, psi0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("checkpoint round-trip") {
  auto psi = random_sector_state(3, 0, 9);
  const auto path = (std::filesystem::temp_directory_path() / "heavyq_ck_test.bin").string();
  save_checkpoint(path, psi, CheckpointHeader{3, 0, 1.25, "abc"});
  CheckpointHeader h;
  const auto back = load_checkpoint(path, &h);
  CHECK(h.L == 3);
  CHECK(h.q_tot == 0);
  CHECK(h.t == 1.25);
  CHECK(h.config_hash == "abc");
  REQUIRE(back.dim() == psi.dim());
  for (std::size_t i = 0; i < psi.dim(); ++i) CHECK(back[i] == psi[i]);
  std::filesystem::remove(path);
}

TEST_CASE("stepper names") {
  CHECK(parse_stepper("trotter2") == Stepper::Trotter2);
  CHECK(to_string(Stepper::Krylov) == "krylov");
  CHECK_THROWS(parse_stepper("rk4"));
}
