#ifndef HSSMF_KERNELS_HPP
#define HSSMF_KERNELS_HPP

#include <cassert>
#include <cstdint>

#include "dense_matrix.hpp"
#include "task_parallel.hpp"

namespace hssmf {

  // recursive matrix multiply, C = alpha op(A) op(B) + beta C.
  //
  // the recursion splits the largest dimension: wide C splits its columns,
  // tall C splits its rows (both halves independent, run as tasks), and an
  // inner-dimension split chains two sequential calls. a subproblem with
  // m*n*k at or below gemm_block_threshold runs the blocked sequential
  // kernel. depth only decides whether the two independent halves become
  // OpenMP tasks; the split tree itself is a function of the sizes alone, so
  // the result is identical for any depth or thread count.
  inline constexpr std::int64_t gemm_block_threshold = 64ll * 64ll * 64ll;

  namespace detail {

    template<typename scalar_t>
    void gemm_base(Trans ta, Trans tb, scalar_t alpha,
                   const DenseMatrix<scalar_t>& a, const DenseMatrix<scalar_t>& b,
                   scalar_t beta, DenseMatrix<scalar_t>& c) {
      const std::size_t m = c.rows(), n = c.cols();
      const std::size_t k = ta == Trans::N ? a.cols() : a.rows();
      if (beta != scalar_t(1)) {
        if (beta == scalar_t(0)) c.zero();
        else c.scale(beta);
      }
      if (!m || !n || !k) return;
      counters::add_flops(2ll * m * n * k);
      if (ta == Trans::N) {
        // axpy form, contiguous in the rows of a and c
        for (std::size_t j = 0; j < n; j++) {
          scalar_t* cj = c.ptr(0, j);
          for (std::size_t l = 0; l < k; l++) {
            scalar_t t = alpha * (tb == Trans::N ? b(l, j) : op_val(tb, b(j, l)));
            if (t == scalar_t(0)) continue;
            const scalar_t* al = a.ptr(0, l);
            for (std::size_t i = 0; i < m; i++) cj[i] += t * al[i];
          }
        }
      } else {
        // dot form, contiguous in the columns of a (and of b when tb != N)
        for (std::size_t j = 0; j < n; j++) {
          for (std::size_t i = 0; i < m; i++) {
            const scalar_t* ai = a.ptr(0, i);
            scalar_t s(0);
            if (tb == Trans::N) {
              const scalar_t* bj = b.ptr(0, j);
              if (ta == Trans::C)
                for (std::size_t l = 0; l < k; l++) s += conj_val(ai[l]) * bj[l];
              else
                for (std::size_t l = 0; l < k; l++) s += ai[l] * bj[l];
            } else {
              for (std::size_t l = 0; l < k; l++)
                s += op_val(ta, ai[l]) * op_val(tb, b(j, l));
            }
            c(i, j) += alpha * s;
          }
        }
      }
    }

    // views of op(x) split along rows/cols of the *operated* matrix
    template<typename scalar_t>
    DenseMatrixWrapper<scalar_t>
    op_rows(Trans t, const DenseMatrix<scalar_t>& x, std::size_t r0, std::size_t r1) {
      if (t == Trans::N) return const_view(x, r1 - r0, x.cols(), r0, 0);
      return const_view(x, x.rows(), r1 - r0, 0, r0);
    }
    template<typename scalar_t>
    DenseMatrixWrapper<scalar_t>
    op_cols(Trans t, const DenseMatrix<scalar_t>& x, std::size_t c0, std::size_t c1) {
      if (t == Trans::N) return const_view(x, x.rows(), c1 - c0, 0, c0);
      return const_view(x, c1 - c0, x.cols(), c0, 0);
    }

  } // namespace detail

  template<typename scalar_t>
  void gemm(Trans ta, Trans tb, scalar_t alpha,
            const DenseMatrix<scalar_t>& a, const DenseMatrix<scalar_t>& b,
            scalar_t beta, DenseMatrix<scalar_t>& c, int depth = 0) {
    const std::size_t m = c.rows(), n = c.cols();
    const std::size_t k = ta == Trans::N ? a.cols() : a.rows();
    assert((ta == Trans::N ? a.rows() : a.cols()) == m);
    assert((tb == Trans::N ? b.rows() : b.cols()) == k);
    assert((tb == Trans::N ? b.cols() : b.rows()) == n);
    if (static_cast<std::int64_t>(m) * n * k <= gemm_block_threshold || !m || !n || !k) {
      detail::gemm_base(ta, tb, alpha, a, b, beta, c);
      return;
    }
    if (n >= std::max(m, k)) {            // split the columns of C
      auto nh = n / 2;
      auto b1 = detail::op_cols(tb, b, 0, nh), b2 = detail::op_cols(tb, b, nh, n);
      DenseMatrixWrapper<scalar_t> c1(m, nh, c, 0, 0), c2(m, n - nh, c, 0, nh);
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
      gemm(ta, tb, alpha, a, b1, beta, c1, depth + 1);
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
      gemm(ta, tb, alpha, a, b2, beta, c2, depth + 1);
#pragma omp taskwait
    } else if (m >= k) {                  // split the rows of C
      auto mh = m / 2;
      auto a1 = detail::op_rows(ta, a, 0, mh), a2 = detail::op_rows(ta, a, mh, m);
      DenseMatrixWrapper<scalar_t> c1(mh, n, c, 0, 0), c2(m - mh, n, c, mh, 0);
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
      gemm(ta, tb, alpha, a1, b, beta, c1, depth + 1);
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
      gemm(ta, tb, alpha, a2, b, beta, c2, depth + 1);
#pragma omp taskwait
    } else {                              // split the inner dimension, chain sequentially
      auto kh = k / 2;
      auto a1 = detail::op_cols(ta, a, 0, kh), a2 = detail::op_cols(ta, a, kh, k);
      auto b1 = detail::op_rows(tb, b, 0, kh), b2 = detail::op_rows(tb, b, kh, k);
      gemm(ta, tb, alpha, a1, b1, beta, c, depth);
      gemm(ta, tb, alpha, a2, b2, scalar_t(1), c, depth);
    }
  }

  // convenience: C = alpha op(A) op(B), allocating the result
  template<typename scalar_t>
  DenseMatrix<scalar_t> gemm_new(Trans ta, Trans tb, scalar_t alpha,
                                 const DenseMatrix<scalar_t>& a,
                                 const DenseMatrix<scalar_t>& b, int depth = 0) {
    DenseMatrix<scalar_t> c(ta == Trans::N ? a.rows() : a.cols(),
                            tb == Trans::N ? b.cols() : b.rows());
    gemm(ta, tb, alpha, a, b, scalar_t(0), c, depth);
    return c;
  }

  namespace detail {

    template<typename scalar_t>
    void trsm_base(Side s, UpLo ul, Trans ta, Diag d,
                   const DenseMatrix<scalar_t>& t, DenseMatrix<scalar_t>& b) {
      const std::size_t n = t.rows();
      if (!n || b.empty()) return;
      // effective orientation of op(t)
      const bool lower = (ul == UpLo::L) == (ta == Trans::N);
      auto tv = [&](std::size_t i, std::size_t j) -> scalar_t {
        return ta == Trans::N ? t(i, j) : op_val(ta, t(j, i));
      };
      if (s == Side::L) {
        counters::add_flops(static_cast<std::int64_t>(n) * n * b.cols());
        for (std::size_t j = 0; j < b.cols(); j++) {
          scalar_t* x = b.ptr(0, j);
          if (lower) {
            for (std::size_t i = 0; i < n; i++) {
              scalar_t s0 = x[i];
              for (std::size_t l = 0; l < i; l++) s0 -= tv(i, l) * x[l];
              x[i] = d == Diag::U ? s0 : s0 / tv(i, i);
            }
          } else {
            for (std::size_t i = n; i-- > 0;) {
              scalar_t s0 = x[i];
              for (std::size_t l = i + 1; l < n; l++) s0 -= tv(i, l) * x[l];
              x[i] = d == Diag::U ? s0 : s0 / tv(i, i);
            }
          }
        }
      } else {
        // X op(T) = B, row-wise substitution
        counters::add_flops(static_cast<std::int64_t>(n) * n * b.rows());
        if (lower) {
          // columns from the end: X(:,j) = (B(:,j) - sum_{l>j} X(:,l) T(l,j)) / T(j,j)
          for (std::size_t j = n; j-- > 0;) {
            for (std::size_t l = j + 1; l < n; l++) {
              scalar_t tl = tv(l, j);
              if (tl == scalar_t(0)) continue;
              for (std::size_t i = 0; i < b.rows(); i++) b(i, j) -= b(i, l) * tl;
            }
            if (d == Diag::N) {
              scalar_t invd = scalar_t(1) / tv(j, j);
              for (std::size_t i = 0; i < b.rows(); i++) b(i, j) *= invd;
            }
          }
        } else {
          for (std::size_t j = 0; j < n; j++) {
            for (std::size_t l = 0; l < j; l++) {
              scalar_t tl = tv(l, j);
              if (tl == scalar_t(0)) continue;
              for (std::size_t i = 0; i < b.rows(); i++) b(i, j) -= b(i, l) * tl;
            }
            if (d == Diag::N) {
              scalar_t invd = scalar_t(1) / tv(j, j);
              for (std::size_t i = 0; i < b.rows(); i++) b(i, j) *= invd;
            }
          }
        }
      }
    }

  } // namespace detail

  inline constexpr std::size_t trsm_block = 64;

  // triangular solve with a dense triangle, recursive with gemm updates.
  // op(T) X = alpha B (side L) or X op(T) = alpha B (side R), B overwritten.
  template<typename scalar_t>
  void trsm(Side s, UpLo ul, Trans ta, Diag d, scalar_t alpha,
            const DenseMatrix<scalar_t>& t, DenseMatrix<scalar_t>& b, int depth = 0) {
    assert(t.rows() == t.cols());
    assert(s == Side::L ? b.rows() == t.rows() : b.cols() == t.rows());
    if (alpha != scalar_t(1)) b.scale(alpha);
    const std::size_t n = t.rows();
    if (n <= trsm_block) { detail::trsm_base(s, ul, ta, d, t, b); return; }
    const auto nh = n / 2;
    auto t11 = const_view(t, nh, nh, 0, 0), t22 = const_view(t, n - nh, n - nh, nh, nh);
    // off-diagonal block of op(T) in (1,2)/(2,1) position
    const bool lower = (ul == UpLo::L) == (ta == Trans::N);
    auto toff = ul == UpLo::L ? const_view(t, n - nh, nh, nh, 0)
                              : const_view(t, nh, n - nh, 0, nh);
    if (s == Side::L) {
      DenseMatrixWrapper<scalar_t> b1(nh, b.cols(), b, 0, 0),
          b2(b.rows() - nh, b.cols(), b, nh, 0);
      if (lower) {
        trsm(s, ul, ta, d, scalar_t(1), t11, b1, depth);
        gemm(ta, Trans::N, scalar_t(-1), toff, b1, scalar_t(1), b2, depth);
        trsm(s, ul, ta, d, scalar_t(1), t22, b2, depth);
      } else {
        trsm(s, ul, ta, d, scalar_t(1), t22, b2, depth);
        gemm(ta, Trans::N, scalar_t(-1), toff, b2, scalar_t(1), b1, depth);
        trsm(s, ul, ta, d, scalar_t(1), t11, b1, depth);
      }
    } else {
      DenseMatrixWrapper<scalar_t> b1(b.rows(), nh, b, 0, 0),
          b2(b.rows(), b.cols() - nh, b, 0, nh);
      if (lower) {
        trsm(s, ul, ta, d, scalar_t(1), t22, b2, depth);
        gemm(Trans::N, ta, scalar_t(-1), b2, toff, scalar_t(1), b1, depth);
        trsm(s, ul, ta, d, scalar_t(1), t11, b1, depth);
      } else {
        trsm(s, ul, ta, d, scalar_t(1), t11, b1, depth);
        gemm(Trans::N, ta, scalar_t(-1), b1, toff, scalar_t(1), b2, depth);
        trsm(s, ul, ta, d, scalar_t(1), t22, b2, depth);
      }
    }
  }

  // triangular multiply B <- alpha op(T) B (left side only; that is all the
  // solver and tests use)
  template<typename scalar_t>
  void trmm(UpLo ul, Trans ta, Diag d, scalar_t alpha,
            const DenseMatrix<scalar_t>& t, DenseMatrix<scalar_t>& b, int depth = 0) {
    assert(t.rows() == t.cols() && b.rows() == t.rows());
    const std::size_t n = t.rows();
    if (!n || b.empty()) return;
    if (n <= trsm_block) {
      counters::add_flops(static_cast<std::int64_t>(n) * n * b.cols());
      const bool lower = (ul == UpLo::L) == (ta == Trans::N);
      auto tv = [&](std::size_t i, std::size_t j) -> scalar_t {
        return ta == Trans::N ? t(i, j) : op_val(ta, t(j, i));
      };
      for (std::size_t j = 0; j < b.cols(); j++) {
        scalar_t* x = b.ptr(0, j);
        if (lower) {
          for (std::size_t i = n; i-- > 0;) {
            scalar_t s0 = d == Diag::U ? x[i] : tv(i, i) * x[i];
            for (std::size_t l = 0; l < i; l++) s0 += tv(i, l) * x[l];
            x[i] = alpha * s0;
          }
        } else {
          for (std::size_t i = 0; i < n; i++) {
            scalar_t s0 = d == Diag::U ? x[i] : tv(i, i) * x[i];
            for (std::size_t l = i + 1; l < n; l++) s0 += tv(i, l) * x[l];
            x[i] = alpha * s0;
          }
        }
      }
      return;
    }
    const auto nh = n / 2;
    auto t11 = const_view(t, nh, nh, 0, 0), t22 = const_view(t, n - nh, n - nh, nh, nh);
    const bool lower = (ul == UpLo::L) == (ta == Trans::N);
    auto toff = ul == UpLo::L ? const_view(t, n - nh, nh, nh, 0)
                              : const_view(t, nh, n - nh, 0, nh);
    DenseMatrixWrapper<scalar_t> b1(nh, b.cols(), b, 0, 0),
        b2(b.rows() - nh, b.cols(), b, nh, 0);
    if (lower) {
      trmm(ul, ta, d, alpha, t22, b2, depth);
      gemm(ta, Trans::N, alpha, toff, b1, scalar_t(1), b2, depth);
      trmm(ul, ta, d, alpha, t11, b1, depth);
    } else {
      trmm(ul, ta, d, alpha, t11, b1, depth);
      gemm(ta, Trans::N, alpha, toff, b2, scalar_t(1), b1, depth);
      trmm(ul, ta, d, alpha, t22, b2, depth);
    }
  }

} // namespace hssmf

#endif
