#ifndef HSSMF_KRYLOV_HPP
#define HSSMF_KRYLOV_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "counters.hpp"
#include "dense_matrix.hpp"
#include "errors.hpp"
#include "scalar.hpp"

namespace hssmf {

  // outcome of an iterative solve. the residual quantity throughout is the
  // left-preconditioned one, u = M^-1 (A x - b), the same number the
  // stopping rule tests; history holds one norm per iteration, the initial
  // residual first, nonincreasing within a restart cycle.
  struct SolveReport {
    int iterations = 0;
    double rel_resid = 0;
    double abs_resid = 0;
    bool converged = false;
    bool stagnated = false;  // refinement only: < 2x reduction over 3 steps
    std::vector<double> history;
  };

  // y = op(x), both of fixed dimension n
  template<typename scalar_t>
  using LinOp = std::function<void(const scalar_t*, scalar_t*)>;

  namespace detail {

    template<typename scalar_t>
    real_t<scalar_t> norm2(const std::vector<scalar_t>& v) {
      real_t<scalar_t> s(0);
      for (const auto& x : v) s += abs_val(x) * abs_val(x);
      counters::add_flops(2 * static_cast<std::int64_t>(v.size()));
      return std::sqrt(s);
    }

    template<typename scalar_t>
    scalar_t dotc(const std::vector<scalar_t>& a, const std::vector<scalar_t>& b) {
      scalar_t s(0);
      for (std::size_t i = 0; i < a.size(); i++) s += conj_val(a[i]) * b[i];
      counters::add_flops(2 * static_cast<std::int64_t>(a.size()));
      return s;
    }

    template<typename scalar_t>
    void axpy(scalar_t alpha, const std::vector<scalar_t>& x,
              std::vector<scalar_t>& y) {
      for (std::size_t i = 0; i < x.size(); i++) y[i] += alpha * x[i];
      counters::add_flops(2 * static_cast<std::int64_t>(x.size()));
    }

    // u = M^-1 (A x - b) without the sign flip: computes M^-1 (b - A x),
    // whose norm is the paper's stopping quantity
    template<typename scalar_t>
    void precond_residual(const LinOp<scalar_t>& apply_a,
                          const LinOp<scalar_t>& apply_m_inv,
                          const std::vector<scalar_t>& b,
                          const std::vector<scalar_t>& x,
                          std::vector<scalar_t>& u,
                          std::vector<scalar_t>& tmp) {
      apply_a(x.data(), tmp.data());
      for (std::size_t i = 0; i < b.size(); i++) tmp[i] = b[i] - tmp[i];
      apply_m_inv(tmp.data(), u.data());
    }

    // complex-safe Givens rotation zeroing s against d: returns (cs, sn)
    // with [cs sn; -conj(sn) cs] [d; s] = [r; 0]
    template<typename scalar_t>
    std::pair<scalar_t, scalar_t> rotg(scalar_t d, scalar_t s) {
      const auto ad = abs_val(d);
      if (ad == real_t<scalar_t>(0)) return {scalar_t(0), scalar_t(1)};
      const auto den = std::sqrt(ad * ad + abs_val(s) * abs_val(s));
      return {scalar_t(ad / den), (d / scalar_t(ad)) * conj_val(s) / scalar_t(den)};
    }

  }  // namespace detail

  // restarted GMRES with modified Gram-Schmidt and left preconditioning,
  // zero initial guess: minimizes the preconditioned residual over the
  // Krylov space of M^-1 A. stops when |u| <= atol or |u|/|u_0| <= rtol
  // with u = M^-1 (A x - b). a happy breakdown returns the exact solution;
  // a non-finite Arnoldi entry throws KrylovDivergenceError. basis_hook, if
  // given, sees each cycle's orthonormal basis (tests).
  template<typename scalar_t>
  std::pair<std::vector<scalar_t>, SolveReport>
  gmres(const LinOp<scalar_t>& apply_a, const LinOp<scalar_t>& apply_m_inv,
        const std::vector<scalar_t>& b, int restart = 30, double rtol = 1e-6,
        double atol = 1e-10, int maxit = 500,
        const std::function<void(const DenseMatrix<scalar_t>&)>& basis_hook =
          {}) {
    using real_type = real_t<scalar_t>;
    const std::size_t n = b.size();
    if (restart < 1) throw IoError("gmres: restart must be >= 1");
    std::vector<scalar_t> x(n, scalar_t(0)), u(n), tmp(n), w(n);
    SolveReport rep;
    detail::precond_residual(apply_a, apply_m_inv, b, x, u, tmp);
    const real_type u0 = detail::norm2(u);
    real_type resid = u0;
    rep.history.push_back(double(resid));
    const auto done = [&](real_type r) {
      return double(r) <= atol || (u0 > real_type(0) && double(r / u0) <= rtol);
    };
    std::vector<std::vector<scalar_t>> v;
    std::vector<scalar_t> h(static_cast<std::size_t>(restart + 1) * restart);
    std::vector<scalar_t> cs(restart), sn(restart), g(restart + 1);
    auto hij = [&](int i, int j) -> scalar_t& {
      return h[static_cast<std::size_t>(j) * (restart + 1) + i];
    };
    rep.converged = done(resid);
    while (!rep.converged && rep.iterations < maxit) {
      // start a cycle from the true preconditioned residual
      const real_type beta = detail::norm2(u);
      if (beta == real_type(0)) { rep.converged = true; break; }
      v.assign(1, u);
      for (auto& ui : v[0]) ui = ui / scalar_t(beta);
      std::fill(g.begin(), g.end(), scalar_t(0));
      g[0] = scalar_t(beta);
      int j = 0;
      bool breakdown = false;
      for (; j < restart && rep.iterations < maxit; j++) {
        apply_a(v[j].data(), tmp.data());
        apply_m_inv(tmp.data(), w.data());
        for (int i = 0; i <= j; i++) {
          hij(i, j) = detail::dotc(v[i], w);
          detail::axpy(-hij(i, j), v[i], w);
        }
        const real_type wn = detail::norm2(w);
        hij(j + 1, j) = scalar_t(wn);
        bool finite = std::isfinite(double(wn));
        for (int i = 0; i <= j && finite; i++)
          finite = std::isfinite(double(abs_val(hij(i, j))));
        if (!finite)
          throw KrylovDivergenceError(
            "gmres: non-finite Arnoldi entry at iteration " +
            std::to_string(rep.iterations + 1));
        // rotate the new column into triangular form
        for (int i = 0; i < j; i++) {
          const scalar_t t = cs[i] * hij(i, j) + sn[i] * hij(i + 1, j);
          hij(i + 1, j) = -conj_val(sn[i]) * hij(i, j) + cs[i] * hij(i + 1, j);
          hij(i, j) = t;
        }
        auto [c, s] = detail::rotg(hij(j, j), hij(j + 1, j));
        cs[j] = c;
        sn[j] = s;
        hij(j, j) = c * hij(j, j) + s * hij(j + 1, j);
        hij(j + 1, j) = scalar_t(0);
        g[j + 1] = -conj_val(s) * g[j];
        g[j] = c * g[j];
        resid = abs_val(g[j + 1]);
        rep.iterations++;
        rep.history.push_back(double(resid));
        if (wn == real_type(0)) {  // happy breakdown: solution is exact
          breakdown = true;
          j++;
          break;
        }
        v.push_back(w);
        for (auto& wi : v.back()) wi = wi / scalar_t(wn);
        if (done(resid)) { j++; break; }
      }
      // back-substitute H y = g over the j columns built and update x
      std::vector<scalar_t> y(j);
      for (int i = j - 1; i >= 0; i--) {
        scalar_t s = g[i];
        for (int l = i + 1; l < j; l++) s -= hij(i, l) * y[l];
        y[i] = s / hij(i, i);
      }
      for (int i = 0; i < j; i++) detail::axpy(y[i], v[i], x);
      if (basis_hook) {
        DenseMatrix<scalar_t> vb(n, v.size());
        for (std::size_t c2 = 0; c2 < v.size(); c2++)
          for (std::size_t r = 0; r < n; r++) vb(r, c2) = v[c2][r];
        basis_hook(vb);
      }
      detail::precond_residual(apply_a, apply_m_inv, b, x, u, tmp);
      resid = detail::norm2(u);
      rep.converged = breakdown || done(resid);
    }
    rep.abs_resid = double(resid);
    rep.rel_resid = u0 > real_type(0) ? double(resid / u0) : 0.0;
    return {std::move(x), rep};
  }

  // classical iterative refinement x <- x + M^-1 (b - A x) with the same
  // stopping rule as gmres. stagnation (< 2x residual reduction over 3
  // steps) is flagged in the report, not fatal.
  template<typename scalar_t>
  std::pair<std::vector<scalar_t>, SolveReport>
  iterative_refinement(const LinOp<scalar_t>& apply_a,
                       const LinOp<scalar_t>& apply_m_inv,
                       const std::vector<scalar_t>& b, double rtol = 1e-6,
                       double atol = 1e-10, int maxit = 500) {
    using real_type = real_t<scalar_t>;
    const std::size_t n = b.size();
    std::vector<scalar_t> x(n, scalar_t(0)), u(n), tmp(n);
    SolveReport rep;
    detail::precond_residual(apply_a, apply_m_inv, b, x, u, tmp);
    const real_type u0 = detail::norm2(u);
    real_type resid = u0;
    rep.history.push_back(double(resid));
    const auto done = [&](real_type r) {
      return double(r) <= atol || (u0 > real_type(0) && double(r / u0) <= rtol);
    };
    rep.converged = done(resid);
    while (!rep.converged && rep.iterations < maxit) {
      if (!std::isfinite(double(resid)))
        throw KrylovDivergenceError(
          "refinement: non-finite residual at iteration " +
          std::to_string(rep.iterations));
      detail::axpy(scalar_t(1), u, x);
      rep.iterations++;
      detail::precond_residual(apply_a, apply_m_inv, b, x, u, tmp);
      resid = detail::norm2(u);
      rep.history.push_back(double(resid));
      rep.converged = done(resid);
      const std::size_t k = rep.history.size();
      if (!rep.converged && k >= 4 &&
          rep.history[k - 4] < 2 * rep.history[k - 1])
        rep.stagnated = true;
    }
    rep.abs_resid = double(resid);
    rep.rel_resid = u0 > real_type(0) ? double(resid / u0) : 0.0;
    return {std::move(x), rep};
  }

}  // namespace hssmf

#endif
