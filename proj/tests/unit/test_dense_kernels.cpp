#include <complex>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "hssmf/counters.hpp"
#include "hssmf/kernels.hpp"
#include "hssmf/task_parallel.hpp"
#include "oracles.hpp"

using namespace hssmf;
using oracle::gemm_ref;
using oracle::random_matrix;

TEST_SUITE_BEGIN("dense");

TEST_CASE("DenseMatrix basics") {
  auto a = random_matrix<double>(5, 4, 1);
  auto s = a.sub(1, 4, 2, 4);
  CHECK(s.rows() == 3);
  CHECK(s.cols() == 2);
  CHECK(s(0, 0) == a(1, 2));
  CHECK(s(2, 1) == a(3, 3));

  auto t = a.transpose();
  for (std::size_t j = 0; j < a.cols(); j++)
    for (std::size_t i = 0; i < a.rows(); i++) CHECK(t(j, i) == a(i, j));

  auto b = random_matrix<double>(2, 4, 2);
  auto v = DenseMatrix<double>::vstack(a, b);
  CHECK(v.rows() == 7);
  CHECK(v(6, 3) == b(1, 3));
  CHECK(v(4, 0) == a(4, 0));

  auto i3 = DenseMatrix<double>::identity(3);
  CHECK(i3.norm_fro() == doctest::Approx(std::sqrt(3.0)));
  CHECK(i3.max_abs() == 1.0);
}

TEST_CASE("DenseMatrixWrapper views write through") {
  DenseMatrix<double> a(6, 6);
  a.zero();
  DenseMatrixWrapper<double> w(3, 2, a, 2, 3);
  w.fill(7.0);
  CHECK(a(2, 3) == 7.0);
  CHECK(a(4, 4) == 7.0);
  CHECK(a(1, 3) == 0.0);
  CHECK(a(2, 2) == 0.0);
}

TEST_CASE("laswp forward then backward restores rows") {
  auto a = random_matrix<double>(6, 3, 3);
  DenseMatrix<double> orig(a);
  std::vector<int> piv{2, 4, 2, 5, 4, 5};
  a.laswp(piv, true);
  CHECK(oracle::max_abs_diff(a, orig) > 0);
  a.laswp(piv, false);
  CHECK(oracle::max_abs_diff(a, orig) == 0);
}

TEST_CASE("gemm matches the reference on all transpose combinations") {
  const Trans ts[] = {Trans::N, Trans::T, Trans::C};
  unsigned seed = 100;
  for (auto ta : ts)
    for (auto tb : ts)
      for (auto [m, n, k] : {std::tuple{1, 1, 1}, {3, 2, 4}, {8, 8, 8},
                             {13, 7, 5}, {1, 9, 4}, {6, 1, 3}, {5, 4, 1}}) {
        auto a = ta == Trans::N ? random_matrix<double>(m, k, seed++)
                                : random_matrix<double>(k, m, seed++);
        auto b = tb == Trans::N ? random_matrix<double>(k, n, seed++)
                                : random_matrix<double>(n, k, seed++);
        auto c = random_matrix<double>(m, n, seed++);
        DenseMatrix<double> want(c);
        for (double alpha : {1.0, -0.5})
          for (double beta : {0.0, 1.0, 2.0}) {
            gemm_ref(ta, tb, alpha, a, b, beta, want);
            gemm(ta, tb, alpha, a, b, beta, c);
            CAPTURE(int(ta));
            CAPTURE(int(tb));
            CHECK(oracle::rel_err(c, want) <= 1e-13);
          }
      }
}

TEST_CASE("gemm matches the reference for complex scalars") {
  using cd = std::complex<double>;
  const Trans ts[] = {Trans::N, Trans::T, Trans::C};
  unsigned seed = 300;
  for (auto ta : ts)
    for (auto tb : ts) {
      auto a = ta == Trans::N ? random_matrix<cd>(7, 5, seed++)
                              : random_matrix<cd>(5, 7, seed++);
      auto b = tb == Trans::N ? random_matrix<cd>(5, 6, seed++)
                              : random_matrix<cd>(6, 5, seed++);
      auto c = random_matrix<cd>(7, 6, seed++);
      DenseMatrix<cd> want(c);
      gemm_ref(ta, tb, cd(0.3, -1.1), a, b, cd(0.5, 0.25), want);
      gemm(ta, tb, cd(0.3, -1.1), a, b, cd(0.5, 0.25), c);
      CHECK(oracle::rel_err(c, want) <= 1e-13);
    }
}

TEST_CASE("recursive gemm is bit-identical across depths and thread counts") {
  auto a = random_matrix<double>(150, 90, 11);
  auto b = random_matrix<double>(90, 120, 12);
  DenseMatrix<double> want(150, 120);
  want.zero();
  gemm_ref(Trans::N, Trans::N, 1.0, a, b, 0.0, want);

  auto run = [&](int threads, int depth) {
    params::set_threads(threads);
    DenseMatrix<double> c(150, 120);
    c.zero();
    gemm(Trans::N, Trans::N, 1.0, a, b, 0.0, c, depth);
    return c;
  };
  auto c1 = run(1, 0);
  CHECK(oracle::rel_err(c1, want) <= 1e-13);
  for (auto [thr, dep] : {std::pair{1, 100}, {4, 0}, {4, 3}}) {
    auto c = run(thr, dep);
    CHECK(std::memcmp(c.data(), c1.data(),
                      c.rows() * c.cols() * sizeof(double)) == 0);
  }
  params::set_threads(1);
}

TEST_CASE("gemm flop counter is exactly 2mnk") {
  auto a = random_matrix<double>(70, 33, 21);
  auto b = random_matrix<double>(33, 41, 22);
  DenseMatrix<double> c(70, 41);
  counters::reset();
  gemm(Trans::N, Trans::N, 1.0, a, b, 0.0, c);
  CHECK(counters::get_flops() == 2ll * 70 * 33 * 41);
}

namespace {

  // well-conditioned triangular factor: unit-ish diagonal dominance
  DenseMatrix<double> tri_factor(int n, UpLo ul, unsigned seed) {
    auto t = random_matrix<double>(n, n, seed);
    for (int j = 0; j < n; j++)
      for (int i = 0; i < n; i++) {
        if (ul == UpLo::L && j > i) t(i, j) = 0;
        if (ul == UpLo::U && j < i) t(i, j) = 0;
        if (i == j) t(i, j) = 2.0 + t(i, j);
      }
    return t;
  }

  DenseMatrix<double> tri_apply(Side s, Trans ta, Diag d,
                                const DenseMatrix<double>& t,
                                const DenseMatrix<double>& x) {
    DenseMatrix<double> te(t);
    if (d == Diag::U)
      for (std::size_t i = 0; i < te.rows(); i++) te(i, i) = 1.0;
    DenseMatrix<double> y(x.rows(), x.cols());
    if (s == Side::L)
      gemm_ref(ta, Trans::N, 1.0, te, x, 0.0, y);
    else
      gemm_ref(Trans::N, ta, 1.0, x, te, 0.0, y);
    return y;
  }

}  // namespace

TEST_CASE("trsm solves every side/uplo/trans/diag combination") {
  unsigned seed = 500;
  for (int n : {1, 2, 7, 40})
    for (int nr : {1, 3, 21})
      for (auto s : {Side::L, Side::R})
        for (auto ul : {UpLo::L, UpLo::U})
          for (auto ta : {Trans::N, Trans::T, Trans::C})
            for (auto d : {Diag::N, Diag::U}) {
              auto t = tri_factor(n, ul, seed++);
              auto x = s == Side::L ? random_matrix<double>(n, nr, seed++)
                                    : random_matrix<double>(nr, n, seed++);
              auto b = tri_apply(s, ta, d, t, x);
              b.scale(1.0 / 0.7);
              trsm(s, ul, ta, d, 0.7, t, b);
              CAPTURE(n);
              CAPTURE(nr);
              CHECK(oracle::rel_err(b, x) <= 1e-11);
            }
}

TEST_CASE("trmm multiplies by the triangle in place") {
  unsigned seed = 900;
  for (int n : {1, 6, 37})
    for (auto ul : {UpLo::L, UpLo::U})
      for (auto ta : {Trans::N, Trans::T, Trans::C})
        for (auto d : {Diag::N, Diag::U}) {
          auto t = tri_factor(n, ul, seed++);
          auto x = random_matrix<double>(n, 5, seed++);
          auto want = tri_apply(Side::L, ta, d, t, x);
          want.scale(-2.0);
          trmm(ul, ta, d, -2.0, t, x);
          CHECK(oracle::rel_err(x, want) <= 1e-12);
        }
}

TEST_CASE("trsm flop counter is exactly n^2 cols") {
  auto t = tri_factor(50, UpLo::L, 77);
  auto b = random_matrix<double>(50, 9, 78);
  counters::reset();
  trsm(Side::L, UpLo::L, Trans::N, Diag::N, 1.0, t, b);
  CHECK(counters::get_flops() == 50ll * 50 * 9);
}

TEST_CASE("memory counters track peak live bytes") {
  counters::reset();
  {
    DenseMatrix<double> a(100, 50);
    CHECK(counters::get_peak_bytes() >= 100 * 50 * 8);
    DenseMatrix<double> b(100, 50);
    CHECK(counters::get_peak_bytes() >= 2 * 100 * 50 * 8);
  }
  const auto peak = counters::get_peak_bytes();
  DenseMatrix<double> c(10, 10);
  CHECK(counters::get_peak_bytes() == peak);
}

TEST_SUITE_END();
