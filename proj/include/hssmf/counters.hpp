#ifndef HSSMF_COUNTERS_HPP
#define HSSMF_COUNTERS_HPP

#include <atomic>
#include <cstddef>
#include <cstdint>

namespace hssmf {
  namespace counters {

    // analytic flop accounting: each kernel adds its count where the
    // arithmetic actually runs (recursive kernels count only in their base
    // cases, so composed calls are not double counted). totals are exact
    // integer sums and therefore independent of execution order.
    inline std::atomic<std::int64_t> flops{0};

    // bytes held by owning DenseMatrix storage; peak tracks the high-water
    // mark. with one thread the peak is deterministic.
    inline std::atomic<std::int64_t> live_bytes{0};
    inline std::atomic<std::int64_t> peak_bytes{0};

    inline void add_flops(std::int64_t n) {
      flops.fetch_add(n, std::memory_order_relaxed);
    }

    inline void add_bytes(std::int64_t n) {
      auto cur = live_bytes.fetch_add(n, std::memory_order_relaxed) + n;
      auto pk = peak_bytes.load(std::memory_order_relaxed);
      while (cur > pk &&
             !peak_bytes.compare_exchange_weak(pk, cur, std::memory_order_relaxed)) {}
    }

    inline void sub_bytes(std::int64_t n) {
      live_bytes.fetch_sub(n, std::memory_order_relaxed);
    }

    inline std::int64_t get_flops() { return flops.load(std::memory_order_relaxed); }
    inline std::int64_t get_peak_bytes() { return peak_bytes.load(std::memory_order_relaxed); }

    inline void reset() {
      flops.store(0); peak_bytes.store(live_bytes.load());
    }

  } // namespace counters
} // namespace hssmf

#endif
