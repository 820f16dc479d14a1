#include <doctest.h>

#include "heavyq/eigensolver.hpp"
#include "heavyq/model.hpp"
#include "heavyq/scadapt.hpp"
#include "heavyq/operator.hpp"
#include "oracle.hpp"

using namespace hq;

TEST_CASE("Lanczos ground state matches dense diagonalization") {
  for (int L : {2, 3}) {
    const int N = 2 * L;
    for (double Q : {0.0, 1.0}) {
      const LatticeConfig c{L, 0.1, 0.8};
      BackgroundCharges q;
      if (Q != 0.0) q.add(N - 1, Q);
      std::vector<double> Qk = q.dense(N);
      const int sector = screening_sector(q);
      const auto gs = ground_state(build_hamiltonian(c, q), L, sector);
      const auto idx = oracle::sector_states(N, L + sector);
      const oracle::Mat R = oracle::restrict(oracle::schwinger(L, c.m, c.g, Qk), idx);
      Eigen::SelfAdjointEigenSolver<oracle::Mat> es(R);
      CHECK(gs.E == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-10));
      CHECK(gs.residual < 1e-8);
      cplx ov = 0.0;
      for (std::size_t i = 0; i < idx.size(); ++i) ov += std::conj(es.eigenvectors()(i, 0)) * gs.psi[gs.psi.basis->index(idx[i])];
      CHECK(std::norm(ov) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("ground state is reproducible and normalized") {
  const LatticeConfig c{5, 0.1, 0.8};
  const auto h = build_hamiltonian(c, {});
  const auto a = ground_state(h, c.L, 0), b = ground_state(h, c.L, 0);
  CHECK(a.E == b.E);
  CHECK(norm(a.psi.amp) == doctest::Approx(1.0).epsilon(1e-12));
  CompiledOperator H(h, a.psi.basis);
  CHECK(H.expectation(a.psi) == doctest::Approx(a.E).epsilon(1e-10));
}

TEST_CASE("small Krylov spaces still converge through restarts") {
  const LatticeConfig c{4, 0.3, 1.0};
  const auto h = build_hamiltonian(c, {});
  LanczosOptions small;
  small.krylov_dim = 6;
  CHECK(ground_state(h, c.L, 0, small).E == doctest::Approx(ground_state(h, c.L, 0).E).epsilon(1e-9));
}
