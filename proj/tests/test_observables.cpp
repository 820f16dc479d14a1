#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "heavyq/eigensolver.hpp"
#include "heavyq/model.hpp"
#include "heavyq/observables.hpp"
#include "oracle.hpp"

using namespace hq;

namespace {
StateVector bell(int n, int a, int b, std::uint64_t base = 0) {
  StateVector psi(Basis::full(n));
  psi[base | (std::uint64_t{1} << a)] = 1.0 / std::sqrt(2.0);
  psi[base | (std::uint64_t{1} << b)] = 1.0 / std::sqrt(2.0);
  return psi;
}
}  // namespace

TEST_CASE("entropies of product and Bell states") {
  StateVector prod = StateVector::basis_state(Basis::full(4), 0b0101);
  for (int k = 0; k < 4; ++k) CHECK(single_site_entropy(prod, k) == doctest::Approx(0.0).scale(1.0));
  CHECK(two_site_entropy(prod, 0, 3) == doctest::Approx(0.0).scale(1.0));
  const auto b = bell(4, 1, 3);
  CHECK(single_site_entropy(b, 1) == doctest::Approx(1.0));
  CHECK(single_site_entropy(b, 3) == doctest::Approx(1.0));
  CHECK(single_site_entropy(b, 0) == doctest::Approx(0.0).scale(1.0));
  CHECK(two_site_entropy(b, 1, 3) == doctest::Approx(0.0).scale(1.0));
  CHECK(two_site_entropy(b, 0, 1) == doctest::Approx(1.0));
  CHECK(mutual_information(b, 1, 3) == doctest::Approx(2.0));
  CHECK(mutual_information(b, 0, 2) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("reduced density matrices use the bit_n + 2 bit_m local index") {
  StateVector psi = StateVector::basis_state(Basis::full(3), 0b100);
  const auto r = reduced_density(psi, 0, 2);
  CHECK(std::abs(r[2][2] - 1.0) < 1e-14);
  const auto r1 = reduced_density(psi, 2);
  CHECK(std::abs(r1[1][1] - 1.0) < 1e-14);
}

TEST_CASE("n-tangle against a dense evaluation") {
  const LatticeConfig c{3, 0.1, 0.8};
  const auto gs = ground_state(build_hamiltonian(c, {}), c.L, 0);
  const auto psi = change_basis(to_complex(gs.psi), Basis::full(6));
  oracle::Vec v(psi.dim());
  for (std::size_t i = 0; i < psi.dim(); ++i) v(i) = psi[i];
  for (const std::vector<int>& sites : {std::vector<int>{0, 1}, {2, 3}, {1, 2, 3, 4}, {0, 1, 2, 3, 4, 5}}) {
    PauliString y;
    for (int k : sites) y = multiply(y, PauliString::single(k, 'Y')).second;
    const cplx amp = (v.adjoint() * oracle::dense(y, 6) * v.conjugate())(0);
    CHECK(n_tangle(psi, sites) == doctest::Approx(std::norm(amp)).epsilon(1e-10));
  }
  // odd windows leave the charge sector
  for (const auto& t : tangle_table(to_complex(gs.psi), {3})) CHECK(t.tau < 1e-14);
  CHECK(n_tangle(bell(2, 0, 1), {0, 1}) == doctest::Approx(1.0));
}

TEST_CASE("vacuum charge density is CP antisymmetric and sums to zero") {
  const LatticeConfig c{5, 0.1, 0.8};
  const auto gs = ground_state(build_hamiltonian(c, {}), c.L, 0);
  const auto q = charge_density(gs.psi);
  for (std::size_t k = 0; k < q.size(); ++k) CHECK(q[k] == doctest::Approx(-q[q.size() - 1 - k]).scale(1.0));
  CHECK(total_charge(gs.psi) == doctest::Approx(0.0).scale(1.0));
  const double cc = chiral_condensate(gs.psi);
  CHECK(cc > 0.0);
  CHECK(cc < 0.5);
}

TEST_CASE("finite differences and linear fits") {
  std::vector<double> x{0, 1, 2, 4, 5}, y;
  for (double t : x) y.push_back(3.0 * t * t);
  const auto d = finite_difference(x, y);
  CHECK(d[0] == doctest::Approx(3.0));
  CHECK(d[1] == doctest::Approx(6.0));
  CHECK(d[2] == doctest::Approx((48.0 - 3.0) / 3.0));
  CHECK(d[4] == doctest::Approx(27.0));
  CHECK(std::isnan(finite_difference({1, 1, 1}, {1, 2, 3})[1]));
  std::vector<double> ly;
  for (double t : x) ly.push_back(2.0 - 0.5 * t);
  const auto fit = linear_fit(x, ly);
  CHECK(fit.slope == doctest::Approx(-0.5));
  CHECK(fit.intercept == doctest::Approx(2.0));
  CHECK(fit.points == 5);
  CHECK_THROWS(linear_fit({1.0}, {2.0}));
}

TEST_CASE("medium deltas and coherence combination") {
  auto mk = [](std::vector<double> E) {
    ObservableSeries s;
    for (std::size_t i = 0; i < E.size(); ++i) s.records.push_back({.step = int(i), .t = double(i), .x = 1.0 + i, .v = 0.1, .E = E[i]});
    return s;
  };
  const auto vac = mk({0, 1, 2, 3}), a = mk({0, 2, 4, 6}), b = mk({0, 1.5, 3, 4.5}), ab = mk({0, 2.5, 5, 7.5});
  for (double d : delta_medium(a, vac)) CHECK(d == doctest::Approx(1.0));
  for (double d : coherence_combination(a, b, ab, vac)) CHECK(d == doctest::Approx(0.0).scale(1.0));
  auto shifted = vac;
  shifted.records[1].t += 0.5;
  CHECK_THROWS(delta_medium(a, shifted));
}

TEST_CASE("series CSV has a CRLF header") {
  ObservableSeries s;
  for (int i = 0; i < 3; ++i) s.records.push_back({.step = i, .t = 1.0 * i, .x = 1.0 + i, .E = 0.5 * i, .density = {0.0, 0.1}});
  const auto path = (std::filesystem::temp_directory_path() / "heavyq_series_test.csv").string();
  write_series_csv(path, s);
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  CHECK(text.rfind("step,t,x,v,E,dE_dx,q_0,q_1\r\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  CHECK(std::count(text.begin(), text.end(), '\r') == 4);
  std::filesystem::remove(path);
}
