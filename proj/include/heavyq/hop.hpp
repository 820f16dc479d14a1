#pragma once
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "heavyq/pauli.hpp"
#include "heavyq/state.hpp"

namespace hq {

// Long-range hop generator G(a,b) = (X_a Z...Z Y_b - Y_a Z...Z X_b) / 2, a < b.
// With p = (-1)^(number of occupied sites strictly between a and b):
//   G|0_a 1_b> = -i p |1_a 0_b>,  G|1_a 0_b> = i p |0_a 1_b>.
// exp(i theta G) is a real Givens rotation; A = -i G is real antisymmetric.
PauliTermSum hop_generator(int nqubits, int a, int b);

namespace detail {
inline void check_pair(const Basis& B, int a, int b) {
  if (!(0 <= a && a < b && b < B.nqubits())) throw std::invalid_argument("bad hop sites");
}
inline std::uint64_t mid_mask(int a, int b) {
  return ((std::uint64_t{1} << b) - 1) & ~((std::uint64_t{2} << a) - 1);
}
}  // namespace detail

// psi <- exp(i theta G(a,b)) psi:
//   |01> -> cos|01> + p sin|10>,  |10> -> -p sin|01> + cos|10>.
template <class T>
void apply_givens(BasicState<T>& psi, int a, int b, double theta) {
  const Basis& B = *psi.basis;
  detail::check_pair(B, a, b);
  const std::uint64_t ma = std::uint64_t{1} << a, mb = std::uint64_t{1} << b;
  const std::uint64_t mid = detail::mid_mask(a, b);
  const double c = std::cos(theta), s = std::sin(theta);
  T* v = psi.amp.data();
  parallel_for(B.dim(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const std::uint64_t st = B.state(i);
      if ((st & ma) || !(st & mb)) continue;
      const std::size_t j = B.index(st ^ ma ^ mb);
      const double ps = (std::popcount(st & mid) & 1) ? -s : s;
      const T x = v[i], y = v[j];
      v[i] = c * x - ps * y;
      v[j] = ps * x + c * y;
    }
  });
}

// out += w * A(a,b) in, with A = -i G: A|01> = -p|10>, A|10> = p|01>.
template <class T>
void add_hop_generator(const BasicState<T>& in, BasicState<T>& out, int a, int b, double w) {
  const Basis& B = *in.basis;
  detail::check_pair(B, a, b);
  const std::uint64_t ma = std::uint64_t{1} << a, mb = std::uint64_t{1} << b;
  const std::uint64_t mid = detail::mid_mask(a, b);
  const T* x = in.amp.data();
  T* y = out.amp.data();
  parallel_for(B.dim(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const std::uint64_t st = B.state(i);
      if ((st & ma) || !(st & mb)) continue;
      const std::size_t j = B.index(st ^ ma ^ mb);
      const double pw = (std::popcount(st & mid) & 1) ? -w : w;
      const T xi = x[i], xj = x[j];
      y[j] -= pw * xi;
      y[i] += pw * xj;
    }
  });
}

// <u| A(a,b) |v> for real states.
double hop_matrix_element(const RealState& u, const RealState& v, int a, int b);

}  // namespace hq
