#ifndef HSSMF_RRQR_HPP
#define HSSMF_RRQR_HPP

#include <limits>
#include <vector>

#include "kernels.hpp"

namespace hssmf {

  // rank-revealing column-pivoted Householder QR, halted on a relative
  // tolerance: rank k is detected once the next pivot's residual norm
  // satisfies |R_{k+1,k+1}| / |R_{11}| <= eps, or falls below the optional
  // absolute floor abs_tol (needed when the input is pure cancellation noise,
  // where a relative test would inflate the rank). pivot choice is the
  // largest downdated column norm, ties broken by the lowest column index.
  // downdated squared norms are recomputed from scratch whenever they drop
  // below 0.1x the last explicitly computed value, which guards the
  // cancellation drift of the running updates.
  //
  // `certified` reports whether the tolerance test (or exact exhaustion of
  // min(m,n)) ended the sweep; hitting max_rank first leaves it false, which
  // the adaptive sampling loop uses as its enlarge-and-retry signal.
  template<typename scalar_t> struct RrqrResult {
    DenseMatrix<scalar_t> q;      // m x rank, orthonormal (only if wanted)
    DenseMatrix<scalar_t> r;      // rank x n, upper trapezoidal, pivoted order
    std::vector<int> perm;        // perm[i] = original index of pivoted column i
    int rank = 0;
    bool certified = false;
  };

  template<typename scalar_t>
  RrqrResult<scalar_t> rrqr_tolerance(const DenseMatrix<scalar_t>& y,
                                      real_t<scalar_t> eps,
                                      int max_rank = -1, bool want_q = true,
                                      real_t<scalar_t> abs_tol = real_t<scalar_t>(0)) {
    using real_type = real_t<scalar_t>;
    const std::size_t m = y.rows(), n = y.cols();
    const std::size_t kmax_dim = std::min(m, n);
    std::size_t kmax = max_rank < 0 ? kmax_dim
                                    : std::min<std::size_t>(kmax_dim, max_rank);
    RrqrResult<scalar_t> res;
    res.perm.resize(n);
    for (std::size_t j = 0; j < n; j++) res.perm[j] = static_cast<int>(j);
    if (!m || !n) { res.certified = true; return res; }

    DenseMatrix<scalar_t> a(y);
    std::vector<real_type> nrm2(n), last(n);
    for (std::size_t j = 0; j < n; j++) {
      real_type s(0);
      for (std::size_t i = 0; i < m; i++) s += abs2_val(a(i, j));
      nrm2[j] = last[j] = s;
    }
    counters::add_flops(2ll * m * n);

    std::vector<scalar_t> tau;
    real_type r11(0);
    std::size_t k = 0;
    bool certified = false;
    std::int64_t fl = 0;
    while (true) {
      // pivot: largest residual squared norm, lowest index on ties
      std::size_t p = k;
      for (std::size_t j = k; j < n; j++)
        if (nrm2[j] > nrm2[p]) p = j;
      real_type pv = nrm2[p] > real_type(0) ? std::sqrt(nrm2[p]) : real_type(0);
      if (k == 0) {
        r11 = pv;
        if (r11 == real_type(0) || r11 <= abs_tol) { certified = true; break; }
      } else if (pv <= eps * r11 || pv <= abs_tol) {
        certified = true;
        break;
      }
      if (k == kmax) {
        certified = (k == kmax_dim);  // exhausted exactly
        break;
      }
      if (p != k) {
        for (std::size_t i = 0; i < m; i++) std::swap(a(i, k), a(i, p));
        std::swap(nrm2[k], nrm2[p]);
        std::swap(last[k], last[p]);
        std::swap(res.perm[k], res.perm[p]);
      }
      // Householder reflector for column k below row k-1
      real_type xn(0);
      for (std::size_t i = k + 1; i < m; i++) xn += abs2_val(a(i, k));
      xn = std::sqrt(xn);
      scalar_t alpha = a(k, k);
      scalar_t tk(0);
      if (xn != real_type(0) || abs_val(alpha) != real_type(0)) {
        real_type beta = std::hypot(abs_val(alpha), xn);
        if constexpr (!is_complex_v<scalar_t>) {
          if (alpha > scalar_t(0)) beta = -beta;
        } else {
          if (std::real(alpha) > 0) beta = -beta;
        }
        if (beta != real_type(0)) {
          tk = (scalar_t(beta) - alpha) / scalar_t(beta);
          const scalar_t s = scalar_t(1) / (alpha - scalar_t(beta));
          for (std::size_t i = k + 1; i < m; i++) a(i, k) *= s;
          a(k, k) = scalar_t(beta);
        }
      }
      tau.push_back(tk);
      // apply reflector to trailing columns and downdate norms
      for (std::size_t j = k + 1; j < n; j++) {
        if (tk != scalar_t(0)) {
          scalar_t w = a(k, j);
          for (std::size_t i = k + 1; i < m; i++) w += conj_val(a(i, k)) * a(i, j);
          w *= conj_val(tk);
          a(k, j) -= w;
          for (std::size_t i = k + 1; i < m; i++) a(i, j) -= w * a(i, k);
        }
        nrm2[j] -= abs2_val(a(k, j));
        if (nrm2[j] < real_type(0)) nrm2[j] = real_type(0);
        if (nrm2[j] < real_type(0.1) * last[j]) {
          real_type s(0);
          for (std::size_t i = k + 1; i < m; i++) s += abs2_val(a(i, j));
          nrm2[j] = last[j] = s;
        }
      }
      fl += 4ll * static_cast<std::int64_t>(m - k) * (n - k);
      k++;
      if (k == kmax_dim) { certified = true; break; }  // factorization is exact
    }
    counters::add_flops(fl);

    res.rank = static_cast<int>(k);
    res.certified = certified;
    res.r = DenseMatrix<scalar_t>(k, n);
    for (std::size_t j = 0; j < n; j++)
      for (std::size_t i = 0; i < std::min(k, j + 1); i++) res.r(i, j) = a(i, j);
    if (want_q && k) {
      // accumulate Q = H_0 ... H_{k-1} applied to the first k identity columns
      res.q = DenseMatrix<scalar_t>(m, k);
      for (std::size_t j = 0; j < k; j++) res.q(j, j) = scalar_t(1);
      for (std::size_t l = k; l-- > 0;) {
        const scalar_t tk = tau[l];
        if (tk == scalar_t(0)) continue;
        for (std::size_t j = 0; j < k; j++) {
          scalar_t w = res.q(l, j);
          for (std::size_t i = l + 1; i < m; i++) w += conj_val(a(i, l)) * res.q(i, j);
          w *= tk;
          res.q(l, j) -= w;
          for (std::size_t i = l + 1; i < m; i++) res.q(i, j) -= w * a(i, l);
        }
      }
      counters::add_flops(4ll * static_cast<std::int64_t>(m) * k * k);
    }
    return res;
  }

  // interpolative decomposition: Y ~= Y(:,J) X with X(:,J) = I exactly.
  // columns J are the first `rank` RRQR pivots and the interpolation
  // coefficients solve R1 C = R2.
  template<typename scalar_t> struct IdResult {
    std::vector<int> perm;          // pivot order, J = perm[0:rank]
    DenseMatrix<scalar_t> coeffs;   // rank x (n - rank), C = R1^{-1} R2
    int rank = 0;
    bool certified = false;

    std::vector<int> skeleton() const {
      return std::vector<int>(perm.begin(), perm.begin() + rank);
    }
    // materialize the full k x n interpolation matrix (tests, densification)
    DenseMatrix<scalar_t> interpolation_matrix() const {
      DenseMatrix<scalar_t> x(rank, perm.size());
      for (int i = 0; i < rank; i++) x(i, perm[i]) = scalar_t(1);
      for (std::size_t j = rank; j < perm.size(); j++)
        for (int i = 0; i < rank; i++) x(i, perm[j]) = coeffs(i, j - rank);
      return x;
    }
  };

  template<typename scalar_t>
  IdResult<scalar_t> interpolative_decomposition(const DenseMatrix<scalar_t>& y,
                                                 real_t<scalar_t> eps,
                                                 int max_rank = -1,
                                                 real_t<scalar_t> abs_tol = real_t<scalar_t>(0)) {
    auto qr = rrqr_tolerance(y, eps, max_rank, false, abs_tol);
    IdResult<scalar_t> id;
    id.perm = std::move(qr.perm);
    id.rank = qr.rank;
    id.certified = qr.certified;
    const std::size_t k = qr.rank, n = y.cols();
    id.coeffs = DenseMatrix<scalar_t>(k, n - k);
    if (k && n > k) {
      auto r1 = const_view(qr.r, k, k, 0, 0);
      for (std::size_t j = 0; j < n - k; j++)
        for (std::size_t i = 0; i < k; i++) id.coeffs(i, j) = qr.r(i, k + j);
      trsm(Side::L, UpLo::U, Trans::N, Diag::N, scalar_t(1), r1, id.coeffs);
    }
    return id;
  }

} // namespace hssmf

#endif
