#pragma once
#include <bit>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

namespace hq {

// Computational basis over n qubits, either the full 2^n space or the subspace
// of fixed popcount (fixed total charge). Sector states are stored in
// increasing order; index() is the colexicographic rank, evaluated from two
// 16-bit lookup tables.
class Basis {
 public:
  static std::shared_ptr<const Basis> full(int nqubits);
  static std::shared_ptr<const Basis> sector(int nqubits, int popcount);
  // Sector of total light charge q_tot on 2L staggered sites.
  static std::shared_ptr<const Basis> charge_sector(int L, int q_tot);

  int nqubits() const { return n_; }
  bool is_full() const { return full_; }
  int popcount() const { return k_; }
  std::size_t dim() const { return dim_; }

  std::uint64_t state(std::size_t i) const { return full_ ? i : states_[i]; }
  bool contains(std::uint64_t s) const {
    return (s >> n_) == 0 && (full_ || std::popcount(s) == k_);
  }
  std::size_t index(std::uint64_t s) const {
    if (full_) return s;
    const std::uint32_t lo = static_cast<std::uint32_t>(s & 0xFFFF);
    const std::uint32_t hi = static_cast<std::uint32_t>(s >> 16);
    return lo_rank_[lo] + (hi ? hi_rank_[std::popcount(lo)][hi] : 0u);
  }

  // Total light charge of the basis (popcount - L); only for sectors.
  int q_tot() const { return k_ - n_ / 2; }

 private:
  Basis() = default;
  int n_ = 0;
  int k_ = -1;
  bool full_ = true;
  std::size_t dim_ = 0;
  std::vector<std::uint32_t> states_;
  std::vector<std::uint32_t> lo_rank_;
  std::vector<std::vector<std::uint32_t>> hi_rank_;
};

std::uint64_t binomial(int n, int k);

}  // namespace hq
