#pragma once
#include <gsl/gsl_errno.h>

#include <mutex>

namespace hq {

// GSL aborts on errors by default; all callers check status codes instead.
inline void gsl_quiet() {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
}

}  // namespace hq
