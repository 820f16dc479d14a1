#pragma once
#include <algorithm>
#include <cstddef>
#include <vector>

namespace hq {

// Worker count for data-parallel kernels (0 = runtime default).
void set_threads(int n);
int threads();

// Work is always split into the same chunks for a given length, so results
// (including floating-point reductions) do not depend on the worker count.
inline std::size_t chunk_count(std::size_t n) {
  constexpr std::size_t kMinChunk = 4096;
  constexpr std::size_t kMaxChunks = 256;
  return std::clamp<std::size_t>(n / kMinChunk, 1, kMaxChunks);
}

inline std::size_t chunk_begin(std::size_t n, std::size_t nchunks, std::size_t c) {
  return n / nchunks * c + std::min(c, n % nchunks);
}

// f(begin, end) is called once per chunk; chunks may run concurrently.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t nc = chunk_count(n);
  if (nc == 1) {
    f(std::size_t{0}, n);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(nc); ++c)
    f(chunk_begin(n, nc, c), chunk_begin(n, nc, c + 1));
}

// Sum of f(begin, end) over chunks, combined pairwise in a fixed order.
template <class T, class F>
T parallel_sum(std::size_t n, F&& f) {
  const std::size_t nc = chunk_count(n);
  if (nc == 1) return f(std::size_t{0}, n);
  std::vector<T> part(nc);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(nc); ++c)
    part[c] = f(chunk_begin(n, nc, c), chunk_begin(n, nc, c + 1));
  for (std::size_t w = 1; w < nc; w *= 2)
    for (std::size_t i = 0; i + w < nc; i += 2 * w) part[i] += part[i + w];
  return part[0];
}

}  // namespace hq
