#ifndef HSSMF_LU_HPP
#define HSSMF_LU_HPP

#include <vector>

#include "errors.hpp"
#include "kernels.hpp"

namespace hssmf {

  namespace detail {

    // unblocked right-looking panel factorization with partial pivoting,
    // operating on the full panel width so row swaps stay consistent
    template<typename scalar_t>
    void lu_unblocked(DenseMatrix<scalar_t>& a, std::vector<int>& piv, int col_offset) {
      const std::size_t m = a.rows(), n = a.cols();
      const std::size_t k = std::min(m, n);
      std::int64_t fl = 0;
      for (std::size_t j = 0; j < k; j++) {
        std::size_t p = j;
        auto mx = abs_val(a(j, j));
        for (std::size_t i = j + 1; i < m; i++) {
          auto v = abs_val(a(i, j));
          if (v > mx) { mx = v; p = i; }
        }
        if (mx == real_t<scalar_t>(0))
          throw SingularMatrixError("lu_partial_pivot", col_offset + static_cast<int>(j));
        piv.push_back(static_cast<int>(p));
        if (p != j)
          for (std::size_t jj = 0; jj < n; jj++) std::swap(a(j, jj), a(p, jj));
        const scalar_t d = scalar_t(1) / a(j, j);
        scalar_t* cj = a.ptr(0, j);
        for (std::size_t i = j + 1; i < m; i++) cj[i] *= d;
        for (std::size_t jj = j + 1; jj < n; jj++) {
          const scalar_t t = a(j, jj);
          if (t == scalar_t(0)) continue;
          scalar_t* cc = a.ptr(0, jj);
          for (std::size_t i = j + 1; i < m; i++) cc[i] -= cj[i] * t;
        }
        fl += static_cast<std::int64_t>(m - j - 1) * (1 + 2 * (n - j - 1));
      }
      counters::add_flops(fl);
    }

    template<typename scalar_t>
    void lu_recursive(DenseMatrix<scalar_t>& a, std::vector<int>& piv,
                      int depth, int col_offset) {
      const std::size_t m = a.rows(), n = a.cols();
      if (!m || !n) return;
      if (n <= 32 || m == 1) { lu_unblocked(a, piv, col_offset); return; }
      const std::size_t n1 = std::min(n / 2, m);
      DenseMatrixWrapper<scalar_t> a1(m, n1, a, 0, 0);
      std::vector<int> piv1;
      lu_recursive(a1, piv1, depth, col_offset);
      DenseMatrixWrapper<scalar_t> ar(m, n - n1, a, 0, n1);
      ar.laswp(piv1, true);
      auto t11 = const_view(a, n1, n1, 0, 0);
      DenseMatrixWrapper<scalar_t> a12(n1, n - n1, a, 0, n1);
      trsm(Side::L, UpLo::L, Trans::N, Diag::U, scalar_t(1), t11, a12, depth);
      std::vector<int> piv2;
      if (m > n1) {
        auto l21 = const_view(a, m - n1, n1, n1, 0);
        DenseMatrixWrapper<scalar_t> a22(m - n1, n - n1, a, n1, n1);
        gemm(Trans::N, Trans::N, scalar_t(-1), l21, a12, scalar_t(1), a22, depth);
        lu_recursive(a22, piv2, depth, col_offset + static_cast<int>(n1));
        DenseMatrixWrapper<scalar_t> a21(m - n1, n1, a, n1, 0);
        a21.laswp(piv2, true);
      }
      piv.reserve(piv.size() + piv1.size() + piv2.size());
      for (int p : piv1) piv.push_back(p);
      for (int p : piv2) piv.push_back(p + static_cast<int>(n1));
    }

  } // namespace detail

  // in-place partial-pivot LU: A <- [L\U] with unit lower L, piv holds the
  // absolute row swapped at each step. throws SingularMatrixError on an
  // exactly zero pivot column.
  template<typename scalar_t>
  void lu_partial_pivot(DenseMatrix<scalar_t>& a, std::vector<int>& piv,
                        int depth = 0, int col_offset = 0) {
    piv.clear();
    detail::lu_recursive(a, piv, depth, col_offset);
  }

  template<typename scalar_t> class LuFactors {
  public:
    LuFactors() = default;
    explicit LuFactors(DenseMatrix<scalar_t>&& a, int depth = 0) : lu_(std::move(a)) {
      lu_partial_pivot(lu_, piv_, depth);
    }
    // solve op(A) X = B in place; factorization must be square
    void solve(DenseMatrix<scalar_t>& b, int depth = 0) const {
      assert(lu_.rows() == lu_.cols());
      b.laswp(piv_, true);
      trsm(Side::L, UpLo::L, Trans::N, Diag::U, scalar_t(1), lu_, b, depth);
      trsm(Side::L, UpLo::U, Trans::N, Diag::N, scalar_t(1), lu_, b, depth);
    }
    DenseMatrix<scalar_t> solve_new(const DenseMatrix<scalar_t>& b, int depth = 0) const {
      DenseMatrix<scalar_t> x(b);
      solve(x, depth);
      return x;
    }
    const DenseMatrix<scalar_t>& matrix() const { return lu_; }
    const std::vector<int>& piv() const { return piv_; }
    std::size_t size() const { return lu_.rows(); }
    bool factored() const { return !piv_.empty() || lu_.rows() == 0; }
    std::int64_t stored_scalars() const { return std::int64_t(lu_.rows()) * lu_.cols(); }
    void clear() { lu_ = DenseMatrix<scalar_t>(); piv_.clear(); }

  private:
    DenseMatrix<scalar_t> lu_;
    std::vector<int> piv_;
  };

} // namespace hssmf

#endif
