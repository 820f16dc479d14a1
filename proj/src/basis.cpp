#include "heavyq/basis.hpp"

#include <stdexcept>
#include <string>

namespace hq {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

std::shared_ptr<const Basis> Basis::full(int nqubits) {
  if (nqubits < 1 || nqubits > 30) throw std::invalid_argument("full basis supports 1..30 qubits");
  auto b = std::shared_ptr<Basis>(new Basis());
  b->n_ = nqubits;
  b->dim_ = std::size_t{1} << nqubits;
  return b;
}

std::shared_ptr<const Basis> Basis::sector(int n, int k) {
  if (n < 1 || n > 32) throw std::invalid_argument("sector basis supports 1..32 qubits");
  if (k < 0 || k > n)
    throw std::invalid_argument("empty sector: popcount " + std::to_string(k) + " of " +
                                std::to_string(n));
  auto b = std::shared_ptr<Basis>(new Basis());
  b->n_ = n;
  b->k_ = k;
  b->full_ = false;
  b->dim_ = binomial(n, k);

  // rank(s) = sum over set bits p_0 < p_1 < ... of C(p_i, i + 1)
  b->lo_rank_.resize(1 << 16);
  for (std::uint32_t lo = 0; lo < (1u << 16); ++lo) {
    std::uint64_t r = 0;
    int i = 0;
    for (int p = 0; p < 16; ++p)
      if ((lo >> p) & 1) r += binomial(p, ++i);
    b->lo_rank_[lo] = static_cast<std::uint32_t>(r);
  }
  if (n > 16) {
    const int nhi = n - 16;
    b->hi_rank_.assign(17, std::vector<std::uint32_t>(std::size_t{1} << nhi));
    for (int before = 0; before <= 16; ++before)
      for (std::uint32_t hi = 0; hi < (1u << nhi); ++hi) {
        std::uint64_t r = 0;
        int i = before;
        for (int p = 0; p < nhi; ++p)
          if ((hi >> p) & 1) r += binomial(16 + p, ++i);
        b->hi_rank_[before][hi] = static_cast<std::uint32_t>(r);
      }
  }

  b->states_.resize(b->dim_);
  if (k == 0) {
    b->states_[0] = 0;
  } else {
    // Gosper's hack enumerates fixed-popcount words in increasing order.
    std::uint64_t s = (std::uint64_t{1} << k) - 1;
    for (std::size_t i = 0; i < b->dim_; ++i) {
      b->states_[i] = static_cast<std::uint32_t>(s);
      const std::uint64_t c = s & (~s + 1), r = s + c;
      s = (((r ^ s) >> 2) / c) | r;
    }
  }
  return b;
}

std::shared_ptr<const Basis> Basis::charge_sector(int L, int q_tot) {
  return sector(2 * L, L + q_tot);
}

}  // namespace hq
