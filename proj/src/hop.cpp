#include "heavyq/hop.hpp"

namespace hq {

PauliTermSum hop_generator(int n, int a, int b) {
  if (!(0 <= a && a < b && b < n)) throw std::invalid_argument("bad hop sites");
  const std::uint64_t ma = std::uint64_t{1} << a, mb = std::uint64_t{1} << b;
  const std::uint64_t mid = detail::mid_mask(a, b);
  PauliTermSum g(n);
  g.add(0.5, PauliString{ma | mb, mid | mb});   // X_a Z.. Y_b
  g.add(-0.5, PauliString{ma | mb, mid | ma});  // Y_a Z.. X_b
  return g;
}

double hop_matrix_element(const RealState& u, const RealState& v, int a, int b) {
  const Basis& B = *u.basis;
  detail::check_pair(B, a, b);
  const std::uint64_t ma = std::uint64_t{1} << a, mb = std::uint64_t{1} << b;
  const std::uint64_t mid = detail::mid_mask(a, b);
  return parallel_sum<double>(B.dim(), [&](std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const std::uint64_t st = B.state(i);
      if ((st & ma) || !(st & mb)) continue;
      const std::size_t j = B.index(st ^ ma ^ mb);
      const double p = (std::popcount(st & mid) & 1) ? -1.0 : 1.0;
      acc += p * (u.amp[i] * v.amp[j] - u.amp[j] * v.amp[i]);
    }
    return acc;
  });
}

}  // namespace hq
