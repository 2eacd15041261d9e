#ifndef HSSMF_TASK_PARALLEL_HPP
#define HSSMF_TASK_PARALLEL_HPP

#include <cmath>
#include <algorithm>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace hssmf {
  namespace params {

    // task recursion cutoff: tasks are spawned while depth < task_depth_cutoff,
    // deeper calls run inline in the spawning thread. set once per run by the
    // driver, read-only inside parallel regions. the cutoff gates task creation
    // only, never the shape of the recursion, so numerical results do not
    // depend on it.
    inline int task_depth_cutoff = 8;

    inline int compute_depth_cutoff(int threads) {
      int t = std::max(1, threads);
      return static_cast<int>(std::ceil(std::log2(static_cast<double>(t)))) + 3;
    }

    inline void set_threads(int threads) {
      task_depth_cutoff = compute_depth_cutoff(threads);
#if defined(_OPENMP)
      if (threads >= 1) omp_set_num_threads(threads);
#endif
    }

    inline int num_threads() {
#if defined(_OPENMP)
      return omp_get_max_threads();
#else
      return 1;
#endif
    }

  } // namespace params

  // run f() inside a parallel region with a single task generator; when
  // already inside a parallel region (nested call) or without OpenMP just run
  // it inline.
  template<typename F> void run_task_root(F&& f) {
#if defined(_OPENMP)
    if (omp_in_parallel()) { f(); return; }
#pragma omp parallel default(shared)
#pragma omp single nowait
    f();
#else
    f();
#endif
  }

} // namespace hssmf

#endif
