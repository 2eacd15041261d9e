#ifndef HSSMF_HSS_ULV_HPP
#define HSSMF_HSS_ULV_HPP

#include <utility>
#include <vector>

#include "hss_matrix.hpp"
#include "lu.hpp"

namespace hssmf {

  template<typename scalar_t> class UlvFactors;

  // low-rank correction left behind by a partial ULV factorization: the
  // Schur complement of the leading block inside the trailing block is
  // S = A22|hss - theta^* phi, with A22|hss the HSS sub-tree of the root's
  // right child.
  template<typename scalar_t> struct LowRankSchur {
    DenseMatrix<scalar_t> theta, phi;  // rank x n1 each

    int rank() const { return static_cast<int>(theta.rows()); }
    std::int64_t stored_scalars() const {
      return std::int64_t(theta.rows()) * theta.cols() +
             std::int64_t(phi.rows()) * phi.cols();
    }

    // y = op(S) x without forming S; hss must be the matrix this Schur
    // complement was computed from
    DenseMatrix<scalar_t> apply(const HssMatrix<scalar_t>& hss, Trans op,
                                const DenseMatrix<scalar_t>& x, int depth = 0) const {
      const int c1 = hss.tree().root().child1;
      auto y = hss.matvec_new(op, x, c1, depth);
      if (!rank()) return y;
      if (op == Trans::N) {
        auto t = gemm_new(Trans::N, Trans::N, scalar_t(1), phi, x, depth);
        gemm(Trans::C, Trans::N, scalar_t(-1), theta, t, scalar_t(1), y, depth);
      } else {
        auto t = gemm_new(Trans::N, Trans::N, scalar_t(1), theta, x, depth);
        gemm(Trans::C, Trans::N, scalar_t(-1), phi, t, scalar_t(1), y, depth);
      }
      return y;
    }

    // S(i, j) in indices local to the trailing block, for the element
    // oracles of ancestor fronts
    DenseMatrix<scalar_t> extract(const HssMatrix<scalar_t>& hss,
                                  const std::vector<int>& i,
                                  const std::vector<int>& j) const {
      const int c1 = hss.tree().root().child1;
      auto out = hss.extract(i, j, c1);
      const int r = rank();
      for (std::size_t jj = 0; jj < j.size(); jj++)
        for (std::size_t ii = 0; ii < i.size(); ii++) {
          scalar_t s(0);
          for (int l = 0; l < r; l++)
            s += conj_val(theta(l, i[ii])) * phi(l, j[jj]);
          out(ii, jj) -= s;
        }
      return out;
    }
  };

  namespace detail {

    template<typename scalar_t> struct UlvNode {
      LuFactors<scalar_t> g11;
      DenseMatrix<scalar_t> g12, g21;
      int k = 0, r = 0;  // eliminated and kept block sizes
    };

    // eliminate the subtree rooted at non-root node n and return the kept
    // r x r reduced block, in skeleton row/col order so it can replace the
    // node inside the parent's merged block. a singular eliminated block is
    // recorded (not thrown: this runs inside tasks) and the factorization
    // aborted by the caller.
    template<typename scalar_t>
    DenseMatrix<scalar_t> ulv_eliminate(const HssMatrix<scalar_t>& hss,
                                        std::vector<UlvNode<scalar_t>>& np,
                                        std::atomic<int>& sing_node,
                                        std::atomic<int>& sing_col,
                                        int n, int depth) {
      const auto& t = hss.tree().node(n);
      const auto& nd = hss.node(n);
      DenseMatrix<scalar_t> g;
      if (t.is_leaf())
        g = nd.v.psi_apply_right(nd.u.omega_apply(nd.d, depth), depth);
      else {
        DenseMatrix<scalar_t> g0, g1;
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
        g0 = ulv_eliminate(hss, np, sing_node, sing_col, t.child0, depth + 1);
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
        g1 = ulv_eliminate(hss, np, sing_node, sing_col, t.child1, depth + 1);
#pragma omp taskwait
        DenseMatrix<scalar_t> dm(g0.rows() + g1.rows(), g0.cols() + g1.cols());
        dm.copy_into(0, 0, g0);
        dm.copy_into(0, g0.cols(), nd.b12);
        dm.copy_into(g0.rows(), 0, nd.b21);
        dm.copy_into(g0.rows(), g0.cols(), g1);
        g = nd.v.psi_apply_right(nd.u.omega_apply(dm, depth), depth);
      }
      assert(nd.u.rank() == nd.v.rank());
      const int m = static_cast<int>(g.rows()), r = nd.u.rank(), k = m - r;
      auto& pc = np[n];
      pc.k = k;
      pc.r = r;
      if (!k) return g;  // full-rank bases, nothing decouples at this node
      pc.g12 = g.sub(0, k, k, m);
      pc.g21 = g.sub(k, m, 0, k);
      auto g22 = g.sub(k, m, k, m);
      try {
        pc.g11 = LuFactors<scalar_t>(g.sub(0, k, 0, k), depth);
      } catch (const SingularMatrixError& e) {
        int expect = -1;
        if (sing_node.compare_exchange_strong(expect, n))
          sing_col.store(e.column(), std::memory_order_relaxed);
        return g22;
      }
      auto y = pc.g11.solve_new(pc.g12, depth);
      gemm(Trans::N, Trans::N, scalar_t(-1), pc.g21, y, scalar_t(1), g22, depth);
      return g22;
    }

  } // namespace detail

  // ULV-style factorization of an HSS matrix. the left transforms flatten
  // each node's row basis, the right transforms its column basis; the
  // decoupled leading blocks are eliminated with partially pivoted LU and
  // only the final reduced matrix is factored densely. the factors hold a
  // pointer to the compressed matrix, which must stay alive and in place.
  template<typename scalar_t> class UlvFactors {
  public:
    UlvFactors() = default;

    bool factored() const { return hss_ != nullptr && top_lu_.factored(); }
    bool partial() const { return partial_; }
    const LuFactors<scalar_t>& top_lu() const { return top_lu_; }

    std::int64_t stored_scalars() const {
      std::int64_t s = top_lu_.stored_scalars();
      for (const auto& p : np_) {
        s += p.g11.stored_scalars();
        s += std::int64_t(p.g12.rows()) * p.g12.cols();
        s += std::int64_t(p.g21.rows()) * p.g21.cols();
      }
      return s;
    }

    // solve A x = b in place, any number of right-hand sides. requires a
    // full factorization. safe to call concurrently.
    void solve(DenseMatrix<scalar_t>& b, int depth = 0) const {
      if (!factored() || partial_)
        throw SolverError("ulv solve: factorization missing or partial");
      const auto& tr = hss_->tree();
      if (static_cast<int>(b.rows()) != tr.root().end)
        throw IoError("ulv solve: rhs rows mismatch");
      if (tr.root().is_leaf()) {
        top_lu_.solve(b, depth);
        return;
      }
      const int c0 = tr.root().child0, c1 = tr.root().child1;
      std::vector<DenseMatrix<scalar_t>> ws(tr.size());
      DenseMatrix<scalar_t> f0, f1;
      run_task_root([&] {
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
        f0 = fwd(c0, b, ws, depth + 1);
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
        f1 = fwd(c1, b, ws, depth + 1);
#pragma omp taskwait
        auto y = top_lu_.solve_new(DenseMatrix<scalar_t>::vstack(f0, f1), depth);
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
        bwd(c0, y.sub(0, f0.rows(), 0, y.cols()), b, ws, depth + 1);
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
        bwd(c1, y.sub(f0.rows(), y.rows(), 0, y.cols()), b, ws, depth + 1);
#pragma omp taskwait
      });
    }
    DenseMatrix<scalar_t> solve_new(const DenseMatrix<scalar_t>& b, int depth = 0) const {
      DenseMatrix<scalar_t> x(b);
      solve(x, depth);
      return x;
    }

    // forward elimination through the factored leading subtree of a partial
    // factorization: reduces the leading rows b1 to the kept coordinates.
    // ws keeps the per-node eliminated pieces for the matching backward call.
    DenseMatrix<scalar_t> partial_forward(const DenseMatrix<scalar_t>& b1,
                                          std::vector<DenseMatrix<scalar_t>>& ws,
                                          int depth = 0) const {
      if (!factored() || !partial_)
        throw SolverError("partial forward: not a partial factorization");
      if (static_cast<int>(b1.rows()) != nsep_)
        throw IoError("partial forward: rhs rows mismatch");
      ws.assign(hss_->tree().size(), DenseMatrix<scalar_t>());
      const int c0 = hss_->tree().root().child0;
      DenseMatrix<scalar_t> r;
      run_task_root([&] { r = fwd(c0, b1, ws, depth); });
      return r;
    }

    // backward substitution matching partial_forward: xkeep are the kept
    // coordinates of the leading block (already solved against top_lu()),
    // returns the leading part of the solution
    DenseMatrix<scalar_t> partial_backward(const DenseMatrix<scalar_t>& xkeep,
                                           std::vector<DenseMatrix<scalar_t>>& ws,
                                           int depth = 0) const {
      if (!factored() || !partial_)
        throw SolverError("partial backward: not a partial factorization");
      const int c0 = hss_->tree().root().child0;
      if (static_cast<int>(xkeep.rows()) != np_[c0].r)
        throw IoError("partial backward: kept rows mismatch");
      DenseMatrix<scalar_t> x1(nsep_, xkeep.cols());
      run_task_root([&] { bwd(c0, xkeep, x1, ws, depth); });
      return x1;
    }

  private:
    const HssMatrix<scalar_t>* hss_ = nullptr;
    std::vector<detail::UlvNode<scalar_t>> np_;
    LuFactors<scalar_t> top_lu_;
    bool partial_ = false;
    int nsep_ = 0;

    explicit UlvFactors(const HssMatrix<scalar_t>& h)
      : hss_(&h), np_(h.tree().size()) {}

    DenseMatrix<scalar_t> fwd(int n, const DenseMatrix<scalar_t>& b,
                              std::vector<DenseMatrix<scalar_t>>& ws, int depth) const {
      const auto& t = hss_->tree().node(n);
      const auto& nd = hss_->node(n);
      const auto& pc = np_[n];
      DenseMatrix<scalar_t> bhat;
      if (t.is_leaf())
        bhat = nd.u.omega_apply(const_view(b, t.size(), b.cols(), t.begin, 0), depth);
      else {
        DenseMatrix<scalar_t> f0, f1;
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
        f0 = fwd(t.child0, b, ws, depth + 1);
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
        f1 = fwd(t.child1, b, ws, depth + 1);
#pragma omp taskwait
        bhat = nd.u.omega_apply(DenseMatrix<scalar_t>::vstack(f0, f1), depth);
      }
      if (!pc.k) return bhat;
      ws[n] = pc.g11.solve_new(bhat.sub(0, pc.k, 0, bhat.cols()), depth);
      auto ret = bhat.sub(pc.k, bhat.rows(), 0, bhat.cols());
      gemm(Trans::N, Trans::N, scalar_t(-1), pc.g21, ws[n], scalar_t(1), ret, depth);
      return ret;
    }

    void bwd(int n, const DenseMatrix<scalar_t>& xkeep, DenseMatrix<scalar_t>& x,
             std::vector<DenseMatrix<scalar_t>>& ws, int depth) const {
      const auto& t = hss_->tree().node(n);
      const auto& nd = hss_->node(n);
      const auto& pc = np_[n];
      DenseMatrix<scalar_t> xhat;
      if (pc.k) {
        auto u = gemm_new(Trans::N, Trans::N, scalar_t(1), pc.g12, xkeep, depth);
        pc.g11.solve(u, depth);
        DenseMatrix<scalar_t> xtop(ws[n]);
        xtop.add_scaled(scalar_t(-1), u);
        xhat = DenseMatrix<scalar_t>::vstack(xtop, xkeep);
      } else
        xhat = xkeep;
      auto xloc = nd.v.psi_apply(xhat, depth);
      if (t.is_leaf()) {
        for (std::size_t j = 0; j < x.cols(); j++)
          for (int i = 0; i < t.size(); i++) x(t.begin + i, j) = xloc(i, j);
        return;
      }
      const int r0 = np_[t.child0].r;
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
      bwd(t.child0, xloc.sub(0, r0, 0, xloc.cols()), x, ws, depth + 1);
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
      bwd(t.child1, xloc.sub(r0, xloc.rows(), 0, xloc.cols()), x, ws, depth + 1);
#pragma omp taskwait
    }

    template<typename T> friend UlvFactors<T> ulv_factor(const HssMatrix<T>&, int);
    template<typename T> friend std::pair<UlvFactors<T>, LowRankSchur<T>>
    partial_ulv_and_schur(const HssMatrix<T>&, int, int);
  };

  // full ULV factorization of a compressed matrix
  template<typename scalar_t>
  UlvFactors<scalar_t> ulv_factor(const HssMatrix<scalar_t>& hss, int depth = 0) {
    UlvFactors<scalar_t> f(hss);
    const auto& tr = hss.tree();
    const auto& rt = tr.root();
    DenseMatrix<scalar_t> dm;
    std::atomic<int> sing_node{-1}, sing_col{-1};
    if (rt.is_leaf())
      dm = hss.node(tr.root_id()).d;
    else {
      DenseMatrix<scalar_t> g0, g1;
      run_task_root([&] {
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
        g0 = detail::ulv_eliminate(hss, f.np_, sing_node, sing_col, rt.child0, depth + 1);
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
        g1 = detail::ulv_eliminate(hss, f.np_, sing_node, sing_col, rt.child1, depth + 1);
#pragma omp taskwait
      });
      if (sing_node.load() >= 0)
        throw SingularMatrixError("ulv_factor cluster " + std::to_string(sing_node.load()),
                                  sing_col.load());
      const auto& nd = hss.node(tr.root_id());
      dm = DenseMatrix<scalar_t>(g0.rows() + g1.rows(), g0.cols() + g1.cols());
      dm.copy_into(0, 0, g0);
      dm.copy_into(0, g0.cols(), nd.b12);
      dm.copy_into(g0.rows(), 0, nd.b21);
      dm.copy_into(g0.rows(), g0.cols(), g1);
    }
    try {
      f.top_lu_ = LuFactors<scalar_t>(std::move(dm), depth);
    } catch (const SingularMatrixError& e) {
      throw SingularMatrixError("ulv_factor cluster " + std::to_string(tr.root_id()),
                                e.column());
    }
    return f;
  }

  // partial ULV factorization: eliminate only the leading n_sep rows and
  // columns (the root's left child), factor the reduced block, and return
  // the low-rank Schur correction to the trailing block. the exact Schur
  // complement of the leading block is A22 - Ubig B21 G^-1 B12 Vbig^*, one
  // HSS matvec on the trailing sub-tree plus two skinny dense products.
  template<typename scalar_t>
  std::pair<UlvFactors<scalar_t>, LowRankSchur<scalar_t>>
  partial_ulv_and_schur(const HssMatrix<scalar_t>& hss, int n_sep, int depth = 0) {
    const auto& tr = hss.tree();
    const auto& rt = tr.root();
    if (rt.is_leaf() || tr.node(rt.child0).end != n_sep)
      throw SolverError("partial ulv: leading block of " + std::to_string(n_sep) +
                        " rows does not align with the cluster tree");
    UlvFactors<scalar_t> f(hss);
    f.partial_ = true;
    f.nsep_ = n_sep;
    std::atomic<int> sing_node{-1}, sing_col{-1};
    DenseMatrix<scalar_t> g0;
    run_task_root([&] {
      g0 = detail::ulv_eliminate(hss, f.np_, sing_node, sing_col, rt.child0, depth);
    });
    if (sing_node.load() >= 0)
      throw SingularMatrixError("ulv_factor cluster " + std::to_string(sing_node.load()),
                                sing_col.load());
    try {
      f.top_lu_ = LuFactors<scalar_t>(std::move(g0), depth);
    } catch (const SingularMatrixError& e) {
      throw SingularMatrixError("ulv_factor cluster " + std::to_string(rt.child0),
                                e.column());
    }
    const auto& nd = hss.node(tr.root_id());
    LowRankSchur<scalar_t> sc;
    auto y = f.top_lu_.solve_new(nd.b12, depth);
    auto score = gemm_new(Trans::N, Trans::N, scalar_t(1), nd.b21, y, depth);
    sc.theta = hss.ubig_apply(rt.child1, score, depth).transpose(Trans::C);
    sc.phi = hss.dense_vbig(rt.child1).transpose(Trans::C);
    return {std::move(f), std::move(sc)};
  }

  // convenience wrapper mirroring solve()
  template<typename scalar_t>
  void ulv_solve(const UlvFactors<scalar_t>& f, DenseMatrix<scalar_t>& b, int depth = 0) {
    f.solve(b, depth);
  }

} // namespace hssmf

#endif
