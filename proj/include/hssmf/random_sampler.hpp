#ifndef HSSMF_RANDOM_SAMPLER_HPP
#define HSSMF_RANDOM_SAMPLER_HPP

#include <cmath>
#include <cstdint>

#include "dense_matrix.hpp"

namespace hssmf {

  // deterministic per-row gaussian stream.
  //
  // row r owns a minstd stream seeded with r+1 (x <- 48271 x mod 2^31-1),
  // mapped to uniforms u = x / (2^31-1) and pushed through Box-Muller in
  // consecutive pairs; column c consumes the c-th variate. entry (r,c) is a
  // pure function of (r,c), so two fronts sharing a global row generate
  // bit-identical values independently, and enlarging a random block only
  // appends columns without touching existing ones.
  class SeededRowSampler {
  public:
    static constexpr std::uint64_t mult = 48271ull;
    static constexpr std::uint64_t mod = 2147483647ull;  // 2^31 - 1

    explicit SeededRowSampler(std::int64_t global_row)
      : state_(static_cast<std::uint64_t>(global_row + 1) % mod) {
      if (state_ == 0) state_ = 1;
    }

    // next gaussian variate in this row's stream
    double next() {
      if (have_) { have_ = false; return spare_; }
      const double u1 = uniform(), u2 = uniform();
      const double rad = std::sqrt(-2.0 * std::log(u1));
      const double ang = 2.0 * M_PI * u2;
      spare_ = rad * std::sin(ang);
      have_ = true;
      return rad * std::cos(ang);
    }

    // random value at (global_row, col): advances a fresh stream, tests use
    // this to pin the contract; bulk fill should use next() sequentially
    static double value(std::int64_t global_row, std::int64_t col) {
      SeededRowSampler s(global_row);
      double v = 0;
      for (std::int64_t c = 0; c <= col; c++) v = s.next();
      return v;
    }

    // fill columns [c0, c1) of row `local_row` of R for global row id `grow`
    template<typename scalar_t>
    static void fill_row(DenseMatrix<scalar_t>& r, std::size_t local_row,
                         std::int64_t grow, std::size_t c0, std::size_t c1) {
      SeededRowSampler s(grow);
      for (std::size_t c = 0; c < c0; c++) s.next();
      for (std::size_t c = c0; c < c1; c++)
        r(local_row, c) = scalar_t(s.next());
    }

  private:
    std::uint64_t state_;
    double spare_ = 0;
    bool have_ = false;

    double uniform() {
      state_ = (mult * state_) % mod;
      return static_cast<double>(state_) / static_cast<double>(mod);
    }
  };

} // namespace hssmf

#endif
