#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dealer {

enum class Execution { serial, parallel };

/// out[i] = f(i) for i in [0, n). Each result lands in its own slot, so the
/// output never depends on scheduling; callers reduce it in a fixed order.
/// The serial policy is the reference the parallel one is tested against.
template <class R, class F>
std::vector<R> evaluate_paths(std::size_t n, F&& f, Execution exec = Execution::parallel) {
  std::vector<R> out(n);
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(dealer_path_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Thread count used by the parallel policy (1 without OpenMP).
inline int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_worker_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace dealer
