#include "heavyq/parallel.hpp"

#include <omp.h>

namespace hq {

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int threads() { return omp_get_max_threads(); }

}  // namespace hq
