#ifndef HSSMF_MULTIFRONTAL_HPP
#define HSSMF_MULTIFRONTAL_HPP

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "counters.hpp"
#include "elimination_tree.hpp"
#include "errors.hpp"
#include "hss_compress.hpp"
#include "hss_ulv.hpp"
#include "lu.hpp"
#include "solver_options.hpp"
#include "sparse_matrix.hpp"
#include "stats.hpp"
#include "task_parallel.hpp"

namespace hssmf {

  // one frontal matrix. a dense front keeps the pivoted LU of F11, the
  // explicit couplings and a dense update matrix for its parent; an hss
  // front keeps the compressed front, its (partial) ULV factors and the
  // implicit low-rank update, and is never formed densely. the update
  // state (cb or schur) is released once the parent has consumed it.
  template<typename scalar_t> struct Front {
    bool hss = false;       // factored through the compressed path
    bool fallback = false;  // rank guard tripped, densified instead

    // dense state
    LuFactors<scalar_t> lu;    // F11 = P L U
    DenseMatrix<scalar_t> f12, f21;
    DenseMatrix<scalar_t> cb;  // update matrix, nu x nu

    // hss state
    HssMatrix<scalar_t> h;     // address must stay stable: ulv points at it
    UlvFactors<scalar_t> ulv;
    LowRankSchur<scalar_t> schur;
    HssCompressStats cst;

    // child update rows mapped to local indices of this front
    std::vector<int> pos0, pos1;

    // solve scratch, one active right-hand side at a time
    DenseMatrix<scalar_t> bupd, bhat;
    std::vector<DenseMatrix<scalar_t>> ws;

    std::int64_t stored_scalars() const {
      return lu.stored_scalars() + ulv.stored_scalars() + h.stored_scalars() +
             schur.stored_scalars() +
             std::int64_t(f12.rows()) * f12.cols() +
             std::int64_t(f21.rows()) * f21.cols() +
             std::int64_t(cb.rows()) * cb.cols();
    }
    void release_update() {
      cb = DenseMatrix<scalar_t>();
      schur = LowRankSchur<scalar_t>();
    }
  };

  namespace detail {

    // local index of global column g inside front f: separator range first,
    // then the update rows (ascending, so invertible by binary search)
    inline int front_local(const FrontNode& f, int g) {
      if (g < f.sep_end) {
        assert(g >= f.sep_begin);
        return g - f.sep_begin;
      }
      auto it = std::lower_bound(f.upd.begin(), f.upd.end(), g);
      assert(it != f.upd.end() && *it == g);
      return f.sep_size() + static_cast<int>(it - f.upd.begin());
    }

    inline std::vector<int> child_positions(const FrontNode& parent,
                                            const FrontNode& child) {
      std::vector<int> pos(child.upd.size());
      for (std::size_t a = 0; a < child.upd.size(); a++)
        pos[a] = front_local(parent, child.upd[a]);
      return pos;
    }

    inline void ensure_positions(const EliminationTree& t, int i,
                                 std::vector<int>& pos0, std::vector<int>& pos1) {
      const auto& f = t.node(i);
      if (f.child0 >= 0 && pos0.size() != t.node(f.child0).upd.size())
        pos0 = child_positions(f, t.node(f.child0));
      if (f.child1 >= 0 && pos1.size() != t.node(f.child1).upd.size())
        pos1 = child_positions(f, t.node(f.child1));
    }

    // visit the sparse entries owned by front f: rows and columns meeting
    // its separator. the F22 block gets no sparse entries, those belong to
    // the ancestor fronts, so every entry of A is assembled exactly once.
    template<typename scalar_t, typename F>
    void for_front_entries(const SparseMatrix<scalar_t>& a, const FrontNode& f,
                           F&& fn) {
      const int ns = f.sep_size();
      for (int g = f.sep_begin; g < f.sep_end; g++) {
        const int li = g - f.sep_begin;
        for (int k = a.row_begin(g); k < a.row_end(g); k++) {
          const int gj = a.ind()[k];
          if (gj < f.sep_begin) continue;  // owned by a descendant front
          fn(li, front_local(f, gj), a.val()[k]);
        }
      }
      for (int u = 0; u < f.upd_size(); u++) {
        const int g = f.upd[u];
        for (int k = a.row_begin(g); k < a.row_end(g); k++) {
          const int gj = a.ind()[k];
          if (gj < f.sep_begin || gj >= f.sep_end) continue;
          fn(ns + u, gj - f.sep_begin, a.val()[k]);
        }
      }
    }

  }  // namespace detail

  // the random block used to sample front i: row l is the deterministic
  // gaussian stream of its global index, so sibling fronts sharing a global
  // row generate bit-identical values independently
  template<typename scalar_t>
  DenseMatrix<scalar_t> build_random_block(const FrontNode& f, int cols) {
    const int ns = f.sep_size();
    DenseMatrix<scalar_t> r(f.front_size(), cols);
    for (int l = 0; l < f.front_size(); l++) {
      const std::int64_t g = l < ns ? f.sep_begin + l : f.upd[l - ns];
      SeededRowSampler::fill_row(r, l, g, 0, cols);
    }
    return r;
  }

  // assemble front i densely: scatter the sparse entries, then extend-add
  // both children updates. an hss child's implicit update is densified by
  // an identity multiply (boundary between compressed child and dense
  // parent). children must still hold their update state.
  template<typename scalar_t>
  DenseMatrix<scalar_t> assemble_dense(const SparseMatrix<scalar_t>& a,
                                       const EliminationTree& t, int i,
                                       std::vector<Front<scalar_t>>& fronts,
                                       int depth = 0) {
    const auto& f = t.node(i);
    auto& fr = fronts[i];
    detail::ensure_positions(t, i, fr.pos0, fr.pos1);
    const int m = f.front_size();
    DenseMatrix<scalar_t> fm(m, m);
    detail::for_front_entries(a, f, [&](int li, int lj, scalar_t v) {
      fm(li, lj) += v;
    });
    auto add_child = [&](int ci, const std::vector<int>& pos) {
      if (ci < 0 || pos.empty()) return;
      auto& c = fronts[ci];
      DenseMatrix<scalar_t> dense_u;
      if (c.hss) {
        auto eye = DenseMatrix<scalar_t>::identity(static_cast<int>(pos.size()));
        dense_u = c.schur.apply(c.h, Trans::N, eye, depth);
      }
      const auto& u = c.hss ? dense_u : c.cb;
      for (std::size_t bj = 0; bj < pos.size(); bj++)
        for (std::size_t bi = 0; bi < pos.size(); bi++)
          fm(pos[bi], pos[bj]) += u(bi, bj);
    };
    add_child(f.child0, fr.pos0);
    add_child(f.child1, fr.pos1);
    return fm;
  }

  // skinny extend-add: sr = F r and sc = F^* r for front i without forming
  // F. the sparse part is scattered directly; each child contributes
  // through its update matrix (dense) or its implicit Schur complement
  // (hss), gathered and scattered through the position maps.
  template<typename scalar_t>
  void skinny_sample(const SparseMatrix<scalar_t>& a, const EliminationTree& t,
                     int i, std::vector<Front<scalar_t>>& fronts,
                     const DenseMatrix<scalar_t>& r, DenseMatrix<scalar_t>& sr,
                     DenseMatrix<scalar_t>& sc, int depth = 0) {
    const auto& f = t.node(i);
    auto& fr = fronts[i];
    detail::ensure_positions(t, i, fr.pos0, fr.pos1);
    const int m = f.front_size(), d = static_cast<int>(r.cols());
    assert(static_cast<int>(r.rows()) == m);
    sr = DenseMatrix<scalar_t>(m, d);
    sc = DenseMatrix<scalar_t>(m, d);
    std::int64_t ents = 0;
    detail::for_front_entries(a, f, [&](int li, int lj, scalar_t v) {
      ents++;
      for (int c = 0; c < d; c++) {
        sr(li, c) += v * r(lj, c);
        sc(lj, c) += conj_val(v) * r(li, c);
      }
    });
    counters::add_flops(4 * ents * d);
    auto add_child = [&](int ci, const std::vector<int>& pos) {
      if (ci < 0 || pos.empty()) return;
      auto& c = fronts[ci];
      const int nc = static_cast<int>(pos.size());
      DenseMatrix<scalar_t> x(nc, d);
      for (int cc = 0; cc < d; cc++)
        for (int a2 = 0; a2 < nc; a2++) x(a2, cc) = r(pos[a2], cc);
      DenseMatrix<scalar_t> yr, yc;
      if (c.hss) {
        yr = c.schur.apply(c.h, Trans::N, x, depth);
        yc = c.schur.apply(c.h, Trans::C, x, depth);
      } else {
        yr = gemm_new(Trans::N, Trans::N, scalar_t(1), c.cb, x, depth);
        yc = gemm_new(Trans::C, Trans::N, scalar_t(1), c.cb, x, depth);
      }
      for (int cc = 0; cc < d; cc++)
        for (int a2 = 0; a2 < nc; a2++) {
          sr(pos[a2], cc) += yr(a2, cc);
          sc(pos[a2], cc) += yc(a2, cc);
        }
    };
    add_child(f.child0, fr.pos0);
    add_child(f.child1, fr.pos1);
  }

  // entries (ri, ci) of front i in local indices, again without forming the
  // front: sparse part for anything meeting the separator, plus the child
  // update overlaps. safe to call concurrently once positions are set.
  template<typename scalar_t>
  DenseMatrix<scalar_t> front_elements(const SparseMatrix<scalar_t>& a,
                                       const EliminationTree& t, int i,
                                       const std::vector<Front<scalar_t>>& fronts,
                                       const std::vector<int>& ri,
                                       const std::vector<int>& ci) {
    const auto& f = t.node(i);
    const auto& fr = fronts[i];
    const int ns = f.sep_size();
    auto glob = [&](int l) { return l < ns ? f.sep_begin + l : f.upd[l - ns]; };
    DenseMatrix<scalar_t> out(ri.size(), ci.size());
    for (std::size_t jj = 0; jj < ci.size(); jj++)
      for (std::size_t ii = 0; ii < ri.size(); ii++)
        out(ii, jj) = (ri[ii] < ns || ci[jj] < ns)
                        ? a.get(glob(ri[ii]), glob(ci[jj]))
                        : scalar_t(0);
    auto add_child = [&](int cidx, const std::vector<int>& pos) {
      if (cidx < 0 || pos.empty()) return;
      const auto& c = fronts[cidx];
      std::vector<int> oi, oj, li, lj;  // hit positions in out and child
      for (std::size_t ii = 0; ii < ri.size(); ii++) {
        auto it = std::lower_bound(pos.begin(), pos.end(), ri[ii]);
        if (it != pos.end() && *it == ri[ii]) {
          oi.push_back(static_cast<int>(ii));
          li.push_back(static_cast<int>(it - pos.begin()));
        }
      }
      for (std::size_t jj = 0; jj < ci.size(); jj++) {
        auto it = std::lower_bound(pos.begin(), pos.end(), ci[jj]);
        if (it != pos.end() && *it == ci[jj]) {
          oj.push_back(static_cast<int>(jj));
          lj.push_back(static_cast<int>(it - pos.begin()));
        }
      }
      if (oi.empty() || oj.empty()) return;
      DenseMatrix<scalar_t> blk;
      if (c.hss) {
        blk = c.schur.extract(c.h, li, lj);
      } else {
        blk = DenseMatrix<scalar_t>(oi.size(), oj.size());
        for (std::size_t y = 0; y < oj.size(); y++)
          for (std::size_t x = 0; x < oi.size(); x++)
            blk(x, y) = c.cb(li[x], lj[y]);
      }
      for (std::size_t y = 0; y < oj.size(); y++)
        for (std::size_t x = 0; x < oi.size(); x++)
          out(oi[x], oj[y]) += blk(x, y);
    };
    add_child(f.child0, fr.pos0);
    add_child(f.child1, fr.pos1);
    return out;
  }

  // sampling and element oracles of front i for the compression driver
  template<typename scalar_t>
  CompressionOracles<scalar_t> front_oracles(const SparseMatrix<scalar_t>& a,
                                             const EliminationTree& t, int i,
                                             std::vector<Front<scalar_t>>& fronts,
                                             int depth = 0) {
    CompressionOracles<scalar_t> o;
    o.sample = [&a, &t, i, &fronts, depth](const DenseMatrix<scalar_t>& rnew,
                                           DenseMatrix<scalar_t>& srn,
                                           DenseMatrix<scalar_t>& scn) {
      skinny_sample(a, t, i, fronts, rnew, srn, scn, depth);
    };
    o.elements = [&a, &t, i, &fronts](const std::vector<int>& ri,
                                      const std::vector<int>& ci) {
      return front_elements(a, t, i, fronts, ri, ci);
    };
    return o;
  }

  namespace detail {

    // first factorization failure across tasks; the winner of the exchange
    // publishes the details, everyone else backs off
    struct FactorFailure {
      std::atomic<int> kind{0};  // 0 none, 1 singular, 2 other
      int front = -1;
      int col = -1;
      std::string msg;

      bool record(int k, int fi, int c, std::string m) {
        int expect = 0;
        if (!kind.compare_exchange_strong(expect, k)) return false;
        front = fi;
        col = c;
        msg = std::move(m);
        return true;
      }
      bool failed() const { return kind.load(std::memory_order_relaxed) != 0; }
    };

    template<typename scalar_t>
    ClusterTree front_cluster_tree(const FrontNode& f, int leaf) {
      const bool have = !f.sep_clusters.empty() &&
                        f.sep_clusters.root().end == f.sep_size();
      ClusterTree sep =
        have ? f.sep_clusters : ClusterTree::balanced(f.sep_size(), leaf);
      if (!f.upd_size()) return sep;
      return ClusterTree::join(sep, ClusterTree::balanced(f.upd_size(), leaf));
    }

    template<typename scalar_t>
    void factor_front_dense(const SparseMatrix<scalar_t>& a,
                            const EliminationTree& t, int i,
                            std::vector<Front<scalar_t>>& fronts, int depth) {
      const auto& f = t.node(i);
      auto& fr = fronts[i];
      const int ns = f.sep_size(), nu = f.upd_size(), m = ns + nu;
      auto fm = assemble_dense(a, t, i, fronts, depth);
      fr.f12 = fm.sub(0, ns, ns, m);
      fr.f21 = fm.sub(ns, m, 0, ns);
      fr.cb = fm.sub(ns, m, ns, m);
      fr.lu = LuFactors<scalar_t>(fm.sub(0, ns, 0, ns), depth);
      if (ns && nu) {
        auto y = fr.lu.solve_new(fr.f12, depth);
        gemm(Trans::N, Trans::N, scalar_t(-1), fr.f21, y, scalar_t(1), fr.cb,
             depth);
      }
      fr.hss = false;
    }

    template<typename scalar_t>
    void factor_front_hss(const SparseMatrix<scalar_t>& a,
                          const EliminationTree& t, int i,
                          std::vector<Front<scalar_t>>& fronts,
                          const SolverOptions& opts, int max_rank, int depth) {
      const auto& f = t.node(i);
      auto& fr = fronts[i];
      const int ns = f.sep_size(), nu = f.upd_size(), m = ns + nu;
      detail::ensure_positions(t, i, fr.pos0, fr.pos1);
      auto tree = front_cluster_tree<scalar_t>(f, opts.leaf);
      std::vector<std::int64_t> seeds(m);
      for (int l = 0; l < m; l++)
        seeds[l] = l < ns ? f.sep_begin + l : f.upd[l - ns];
      HssOptions ho;
      ho.eps = opts.eps;
      ho.d0 = std::min(opts.d0, m + opts.p);
      ho.dd = opts.dd;
      ho.p = opts.p;
      ho.max_rank = std::min(max_rank, m);
      auto orc = front_oracles(a, t, i, fronts, depth);
      fr.h = hss_compress_adaptive(orc, tree, seeds, ho, &fr.cst, {}, depth);
      if (nu) {
        auto [uf, sc] = partial_ulv_and_schur(fr.h, ns, depth);
        fr.ulv = std::move(uf);
        fr.schur = std::move(sc);
      } else {
        fr.ulv = ulv_factor(fr.h, depth);
      }
      fr.hss = true;
    }

    template<typename scalar_t> struct MfCtx {
      const SparseMatrix<scalar_t>& a;
      const EliminationTree& t;
      const SolverOptions& opts;
      int max_rank;
      std::vector<Front<scalar_t>>& fronts;
      std::vector<FrontStat>& stats;
      FactorFailure& fail;
    };

    // analytic per-front cost estimates; run totals use the exact kernel
    // counters instead
    inline long long dense_front_flops(long long ns, long long nu) {
      return 2 * ns * ns * ns / 3 + 2 * ns * ns * nu + 2 * ns * nu * nu;
    }
    inline long long hss_front_flops(long long m, long long r, long long d) {
      return 4 * m * m * d + 8 * m * r * r;
    }

    template<typename scalar_t>
    void factor_front(MfCtx<scalar_t>& c, int i, int depth) {
      const auto& f = c.t.node(i);
      if (!f.is_leaf()) {
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
        factor_front(c, f.child0, depth + 1);
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
        factor_front(c, f.child1, depth + 1);
#pragma omp taskwait
      }
      if (c.fail.failed()) return;
      auto& fr = c.fronts[i];
      const bool want_hss = f.level < c.opts.switch_level() &&
                            f.front_size() >= c.opts.min_hss &&
                            f.sep_size() > 0;
      try {
        if (want_hss) {
          try {
            factor_front_hss(c.a, c.t, i, c.fronts, c.opts, c.max_rank, depth);
          } catch (const HssRankExceeded&) {
            // rank guard tripped: densify this front and keep going
            factor_front_dense(c.a, c.t, i, c.fronts, depth);
            fr.fallback = true;
          }
        } else {
          factor_front_dense(c.a, c.t, i, c.fronts, depth);
        }
      } catch (const SingularMatrixError& e) {
        c.fail.record(1, i, e.column(), e.what());
        return;
      } catch (const std::exception& e) {
        c.fail.record(2, i, -1, e.what());
        return;
      }
      auto& st = c.stats[i];
      st.id = i;
      st.level = f.level;
      st.dim = f.front_size();
      st.sep = f.sep_size();
      if (fr.hss) {
        st.rank = fr.h.hss_rank();
        st.type = "hss";
        st.flops = hss_front_flops(st.dim, st.rank, fr.cst.d_final);
      } else {
        st.rank = 0;
        st.type = fr.fallback ? "hss_dense" : "dense";
        st.flops = dense_front_flops(f.sep_size(), f.upd_size());
      }
      if (f.child0 >= 0) c.fronts[f.child0].release_update();
      if (f.child1 >= 0) c.fronts[f.child1].release_update();
    }

  }  // namespace detail

  // the complete factorization: fronts in tree postorder plus the tree
  // itself. solve scratch lives in the fronts, so one solve at a time.
  template<typename scalar_t> struct MfFactors {
    EliminationTree tree;
    std::vector<Front<scalar_t>> fronts;
    std::vector<FrontStat> front_stats;
    bool factored = false;
    int hss_fronts = 0;
    int fallbacks = 0;
    int max_front_rank = 0;

    std::int64_t factor_nnz() const {
      std::int64_t s = 0;
      for (const auto& fr : fronts) s += fr.stored_scalars();
      return s;
    }
  };

  // multifrontal factorization of a over the elimination tree t. a must
  // already carry the tree's ordering. throws SingularMatrixError naming
  // the front on an exact zero pivot.
  template<typename scalar_t>
  MfFactors<scalar_t> mf_factor(const SparseMatrix<scalar_t>& a,
                                const EliminationTree& t,
                                const SolverOptions& opts, int depth = 0) {
    if (a.size() != t.n)
      throw IoError("mf factor: matrix and tree sizes differ");
    MfFactors<scalar_t> m;
    m.tree = t;
    m.tree.compute_levels();
    m.fronts = std::vector<Front<scalar_t>>(t.size());
    m.front_stats.assign(t.size(), FrontStat());
    const int max_rank = opts.resolved_max_rank(t.n);
    detail::FactorFailure fail;
    detail::MfCtx<scalar_t> ctx{a, m.tree, opts, max_rank,
                                m.fronts, m.front_stats, fail};
    run_task_root([&] { detail::factor_front(ctx, m.tree.root_id(), depth); });
    const int kind = fail.kind.load();
    if (kind == 1)
      throw SingularMatrixError("front " + std::to_string(fail.front),
                                fail.col);
    if (kind != 0)
      throw SolverError("mf factor: front " + std::to_string(fail.front) +
                        ": " + fail.msg);
    for (const auto& st : m.front_stats) {
      if (st.type == "hss") m.hss_fronts++;
      if (st.type == "hss_dense") m.fallbacks++;
      m.max_front_rank = std::max(m.max_front_rank, st.rank);
    }
    m.factored = true;
    return m;
  }

  namespace detail {

    template<typename scalar_t>
    void mf_forward(MfFactors<scalar_t>& m, DenseMatrix<scalar_t>& b, int i,
                    int depth) {
      const auto& f = m.tree.node(i);
      auto& fr = m.fronts[i];
      if (!f.is_leaf()) {
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
        mf_forward(m, b, f.child0, depth + 1);
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
        mf_forward(m, b, f.child1, depth + 1);
#pragma omp taskwait
      }
      const int ns = f.sep_size(), nu = f.upd_size();
      const int k = static_cast<int>(b.cols());
      DenseMatrix<scalar_t> b1(ns, k);
      for (int c = 0; c < k; c++)
        for (int r = 0; r < ns; r++) b1(r, c) = b(f.sep_begin + r, c);
      fr.bupd = DenseMatrix<scalar_t>(nu, k);
      auto fold = [&](int ci, const std::vector<int>& pos) {
        if (ci < 0 || pos.empty()) return;
        auto& cf = m.fronts[ci];
        for (int c = 0; c < k; c++)
          for (std::size_t a = 0; a < pos.size(); a++) {
            if (pos[a] < ns)
              b1(pos[a], c) += cf.bupd(a, c);
            else
              fr.bupd(pos[a] - ns, c) += cf.bupd(a, c);
          }
        cf.bupd = DenseMatrix<scalar_t>();
      };
      fold(f.child0, fr.pos0);
      fold(f.child1, fr.pos1);
      if (!fr.hss) {
        if (ns) {
          fr.lu.solve(b1, depth);  // y1 = F11^-1 b1
          if (nu)
            gemm(Trans::N, Trans::N, scalar_t(-1), fr.f21, b1, scalar_t(1),
                 fr.bupd, depth);
          for (int c = 0; c < k; c++)
            for (int r = 0; r < ns; r++) b(f.sep_begin + r, c) = b1(r, c);
        }
      } else if (!fr.ulv.partial()) {
        // root-like hss front, fully factored
        fr.ulv.solve(b1, depth);
        for (int c = 0; c < k; c++)
          for (int r = 0; r < ns; r++) b(f.sep_begin + r, c) = b1(r, c);
      } else {
        // partial ULV: reduce to the kept coordinates, push the update
        // rows down; the separator solution is completed in the backward
        // sweep once the ancestors are known
        fr.bhat = fr.ulv.partial_forward(b1, fr.ws, depth);
        auto tt = fr.ulv.top_lu().solve_new(fr.bhat, depth);
        const auto& rn = fr.h.node(fr.h.tree().root_id());
        const int c1 = fr.h.tree().root().child1;
        auto upd = fr.h.ubig_apply(
          c1, gemm_new(Trans::N, Trans::N, scalar_t(1), rn.b21, tt, depth),
          depth);
        for (int c = 0; c < k; c++)
          for (int r = 0; r < nu; r++) fr.bupd(r, c) -= upd(r, c);
      }
    }

    template<typename scalar_t>
    void mf_backward(MfFactors<scalar_t>& m, DenseMatrix<scalar_t>& b, int i,
                     int depth) {
      const auto& f = m.tree.node(i);
      auto& fr = m.fronts[i];
      const int ns = f.sep_size(), nu = f.upd_size();
      const int k = static_cast<int>(b.cols());
      if (ns && nu) {
        DenseMatrix<scalar_t> x2(nu, k);
        for (int c = 0; c < k; c++)
          for (int r = 0; r < nu; r++) x2(r, c) = b(f.upd[r], c);
        if (!fr.hss) {
          auto y = fr.lu.solve_new(
            gemm_new(Trans::N, Trans::N, scalar_t(1), fr.f12, x2, depth),
            depth);
          for (int c = 0; c < k; c++)
            for (int r = 0; r < ns; r++) b(f.sep_begin + r, c) -= y(r, c);
        } else {
          const auto& rn = fr.h.node(fr.h.tree().root_id());
          const int c1 = fr.h.tree().root().child1;
          auto bk = fr.bhat;
          gemm(Trans::N, Trans::N, scalar_t(-1), rn.b12,
               fr.h.vbig_ct_apply(c1, x2, depth), scalar_t(1), bk, depth);
          auto xk = fr.ulv.top_lu().solve_new(bk, depth);
          auto x1 = fr.ulv.partial_backward(xk, fr.ws, depth);
          for (int c = 0; c < k; c++)
            for (int r = 0; r < ns; r++) b(f.sep_begin + r, c) = x1(r, c);
          fr.bhat = DenseMatrix<scalar_t>();
          fr.ws.clear();
        }
      }
      if (!f.is_leaf()) {
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
        mf_backward(m, b, f.child0, depth + 1);
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
        mf_backward(m, b, f.child1, depth + 1);
#pragma omp taskwait
      }
    }

  }  // namespace detail

  // solve A x = b in place in the tree's ordering, any number of columns
  template<typename scalar_t>
  void mf_solve(MfFactors<scalar_t>& m, DenseMatrix<scalar_t>& b,
                int depth = 0) {
    if (!m.factored) throw SolverError("mf solve: not factored");
    if (static_cast<int>(b.rows()) != m.tree.n)
      throw IoError("mf solve: rhs rows mismatch");
    run_task_root([&] {
      detail::mf_forward(m, b, m.tree.root_id(), depth);
      detail::mf_backward(m, b, m.tree.root_id(), depth);
    });
  }

  template<typename scalar_t>
  DenseMatrix<scalar_t> mf_solve_new(MfFactors<scalar_t>& m,
                                     const DenseMatrix<scalar_t>& b,
                                     int depth = 0) {
    DenseMatrix<scalar_t> x(b);
    mf_solve(m, x, depth);
    return x;
  }

}  // namespace hssmf

#endif
