#ifndef HSSMF_HSS_COMPRESS_HPP
#define HSSMF_HSS_COMPRESS_HPP

#include <functional>
#include <vector>

#include "hss_matrix.hpp"
#include "random_sampler.hpp"

namespace hssmf {

  // oracle pair driving the randomized compression, both in matrix-local
  // indices [0, N). the element oracle must be safe to call from concurrent
  // tasks.
  template<typename scalar_t> struct CompressionOracles {
    // given the newly appended random columns Rnew, return Srnew = A Rnew
    // and Scnew = A^* Rnew
    std::function<void(const DenseMatrix<scalar_t>& rnew,
                       DenseMatrix<scalar_t>& srnew,
                       DenseMatrix<scalar_t>& scnew)> sample;
    // dense submatrix A(i, j)
    std::function<DenseMatrix<scalar_t>(const std::vector<int>& i,
                                        const std::vector<int>& j)> elements;
  };

  struct HssOptions {
    double eps = 1e-8;   // relative compression tolerance for the IDs
    int d0 = 128;        // initial random columns
    int dd = 128;        // columns added per adaptation round
    int p = 10;          // oversampling: an ID certifies only at rank <= d - p
    int max_rank = 5000; // hard rank guard, exceeding it throws
  };

  struct HssCompressStats {
    int rounds = 0;   // sampling rounds run (1 = no adaptation was needed)
    int d_final = 0;  // random columns at completion
  };

  enum class CompressState : char { Uncompressed, Partial, Done };

  namespace detail {

    template<typename scalar_t> struct CompressScratch {
      CompressState state = CompressState::Uncompressed;
      int cols_built = 0;                    // sample columns folded in so far
      DenseMatrix<scalar_t> slr, slc;        // unreduced local samples (partial)
      DenseMatrix<scalar_t> rr, rc, sr, sc;  // reduced blocks (done)
    };

    template<typename scalar_t>
    void append_cols(DenseMatrix<scalar_t>& a, const DenseMatrix<scalar_t>& add) {
      if (a.empty() && !a.rows()) { a = add; return; }
      assert(a.rows() == add.rows());
      DenseMatrix<scalar_t> t(a.rows(), a.cols() + add.cols());
      t.copy_into(0, 0, a);
      t.copy_into(0, a.cols(), add);
      a = std::move(t);
    }

    template<typename scalar_t>
    DenseMatrix<scalar_t> cols_of(const DenseMatrix<scalar_t>& a,
                                  const std::vector<int>& idx) {
      DenseMatrix<scalar_t> r(a.rows(), idx.size());
      for (std::size_t j = 0; j < idx.size(); j++)
        std::copy(a.ptr(0, idx[j]), a.ptr(0, idx[j]) + a.rows(), r.ptr(0, j));
      return r;
    }

    // grow the shared random block to dnew columns; row i continues the
    // seeded stream of seeds[i], so existing columns are never touched and
    // any two blocks sharing a seed agree bit-for-bit on shared entries
    template<typename scalar_t>
    void grow_random(DenseMatrix<scalar_t>& r, const std::vector<std::int64_t>& seeds,
                     int dnew) {
      const int dold = static_cast<int>(r.cols());
      if (dnew <= dold) return;
      DenseMatrix<scalar_t> r2(seeds.size(), dnew);
      r2.copy_into(0, 0, r);
      for (std::size_t i = 0; i < seeds.size(); i++)
        SeededRowSampler::fill_row(r2, i, seeds[i], dold, dnew);
      r = std::move(r2);
    }

    template<typename scalar_t> struct CompressCtx {
      HssMatrix<scalar_t>& hss;
      std::vector<CompressScratch<scalar_t>>& ws;
      const CompressionOracles<scalar_t>& orc;
      const DenseMatrix<scalar_t>& gr;         // N x d random block
      const DenseMatrix<scalar_t>& gsr;        // N x d, A gr
      const DenseMatrix<scalar_t>& gsc;        // N x d, A^* gr
      real_t<scalar_t> eps;
      real_t<scalar_t> abs_tol;                // eps * sample scale, rank-0 floor
      int d, cap_id;
      std::atomic<int>& fail;                  // a node whose ID failed to certify
    };

    // fold sample columns [cb, d) into the unreduced local samples of a
    // partial/uncompressed node. leaves subtract D against the raw random
    // rows (Alg. leaf clause), internal nodes merge the children's reduced
    // samples with B corrections (Alg. merge clause).
    template<typename scalar_t>
    void build_local_samples(CompressCtx<scalar_t>& c, int n, int depth) {
      auto& w = c.ws[n];
      const auto& t = c.hss.tree().node(n);
      const auto& nd = c.hss.node(n);
      const int cb = w.cols_built, nc = c.d - cb;
      if (nc <= 0) return;
      if (t.is_leaf()) {
        const int m = t.size();
        auto rl = const_view(c.gr, m, nc, t.begin, cb);
        DenseMatrix<scalar_t> sr(m, nc, c.gsr.ptr(t.begin, cb), c.gsr.ld());
        gemm(Trans::N, Trans::N, scalar_t(-1), nd.d, rl, scalar_t(1), sr, depth);
        DenseMatrix<scalar_t> sc(m, nc, c.gsc.ptr(t.begin, cb), c.gsc.ld());
        gemm(Trans::C, Trans::N, scalar_t(-1), nd.d, rl, scalar_t(1), sc, depth);
        append_cols(w.slr, sr);
        append_cols(w.slc, sc);
      } else {
        const auto& w0 = c.ws[t.child0];
        const auto& w1 = c.ws[t.child1];
        const int r0 = static_cast<int>(w0.sr.rows()), r1 = static_cast<int>(w1.sr.rows());
        DenseMatrix<scalar_t> sr(r0 + r1, nc), sc(r0 + r1, nc);
        sr.copy_into(0, 0, const_view(w0.sr, r0, nc, 0, cb));
        sr.copy_into(r0, 0, const_view(w1.sr, r1, nc, 0, cb));
        sc.copy_into(0, 0, const_view(w0.sc, r0, nc, 0, cb));
        sc.copy_into(r0, 0, const_view(w1.sc, r1, nc, 0, cb));
        {
          DenseMatrixWrapper<scalar_t> top(r0, nc, sr, 0, 0), bot(r1, nc, sr, r0, 0);
          gemm(Trans::N, Trans::N, scalar_t(-1), nd.b12,
               const_view(w1.rr, r1, nc, 0, cb), scalar_t(1), top, depth);
          gemm(Trans::N, Trans::N, scalar_t(-1), nd.b21,
               const_view(w0.rr, r0, nc, 0, cb), scalar_t(1), bot, depth);
        }
        {
          DenseMatrixWrapper<scalar_t> top(r0, nc, sc, 0, 0), bot(r1, nc, sc, r0, 0);
          gemm(Trans::C, Trans::N, scalar_t(-1), nd.b21,
               const_view(w1.rc, r1, nc, 0, cb), scalar_t(1), top, depth);
          gemm(Trans::C, Trans::N, scalar_t(-1), nd.b12,
               const_view(w0.rc, r0, nc, 0, cb), scalar_t(1), bot, depth);
        }
        append_cols(w.slr, sr);
        append_cols(w.slc, sc);
      }
      w.cols_built = c.d;
    }

    // a completed node only folds the new columns into its reduced blocks:
    // the stored skeleton selects the rows, D and B stay untouched
    template<typename scalar_t>
    void update_done(CompressCtx<scalar_t>& c, int n, int depth) {
      auto& w = c.ws[n];
      const auto& t = c.hss.tree().node(n);
      const auto& nd = c.hss.node(n);
      const int cb = w.cols_built, nc = c.d - cb;
      if (nc <= 0 || n == c.hss.tree().root_id()) return;
      const int r = nd.u.rank();
      DenseMatrix<scalar_t> srn(r, nc), scn(r, nc), rrn, rcn;
      if (t.is_leaf()) {
        const int m = t.size();
        for (int j = 0; j < nc; j++)
          for (int i = 0; i < r; i++) {
            srn(i, j) = c.gsr(nd.ir[i], cb + j);
            scn(i, j) = c.gsc(nd.ic[i], cb + j);
          }
        auto rl = const_view(c.gr, m, nc, t.begin, cb);
        auto dr = nd.d.rows_of(nd.u.skeleton());
        gemm(Trans::N, Trans::N, scalar_t(-1), dr, rl, scalar_t(1), srn, depth);
        auto dc = cols_of(nd.d, nd.v.skeleton());
        gemm(Trans::C, Trans::N, scalar_t(-1), dc, rl, scalar_t(1), scn, depth);
        rrn = nd.v.applyC(rl, depth);
        rcn = nd.u.applyC(rl, depth);
      } else {
        const auto& w0 = c.ws[t.child0];
        const auto& w1 = c.ws[t.child1];
        const int r0 = static_cast<int>(w0.sr.rows()), r1 = static_cast<int>(w1.sr.rows());
        DenseMatrix<scalar_t> sr(r0 + r1, nc), sc(r0 + r1, nc);
        sr.copy_into(0, 0, const_view(w0.sr, r0, nc, 0, cb));
        sr.copy_into(r0, 0, const_view(w1.sr, r1, nc, 0, cb));
        sc.copy_into(0, 0, const_view(w0.sc, r0, nc, 0, cb));
        sc.copy_into(r0, 0, const_view(w1.sc, r1, nc, 0, cb));
        {
          DenseMatrixWrapper<scalar_t> top(r0, nc, sr, 0, 0), bot(r1, nc, sr, r0, 0);
          gemm(Trans::N, Trans::N, scalar_t(-1), nd.b12,
               const_view(w1.rr, r1, nc, 0, cb), scalar_t(1), top, depth);
          gemm(Trans::N, Trans::N, scalar_t(-1), nd.b21,
               const_view(w0.rr, r0, nc, 0, cb), scalar_t(1), bot, depth);
        }
        {
          DenseMatrixWrapper<scalar_t> top(r0, nc, sc, 0, 0), bot(r1, nc, sc, r0, 0);
          gemm(Trans::C, Trans::N, scalar_t(-1), nd.b21,
               const_view(w1.rc, r1, nc, 0, cb), scalar_t(1), top, depth);
          gemm(Trans::C, Trans::N, scalar_t(-1), nd.b12,
               const_view(w0.rc, r0, nc, 0, cb), scalar_t(1), bot, depth);
        }
        srn = sr.rows_of(nd.u.skeleton());
        scn = sc.rows_of(nd.v.skeleton());
        rrn = nd.v.applyC(DenseMatrix<scalar_t>::vstack(
            const_view(w0.rr, r0, nc, 0, cb), const_view(w1.rr, r1, nc, 0, cb)), depth);
        rcn = nd.u.applyC(DenseMatrix<scalar_t>::vstack(
            const_view(w0.rc, r0, nc, 0, cb), const_view(w1.rc, r1, nc, 0, cb)), depth);
      }
      append_cols(w.sr, srn);
      append_cols(w.sc, scn);
      append_cols(w.rr, rrn);
      append_cols(w.rc, rcn);
      w.cols_built = c.d;
    }

    // one bottom-up pass; children that cannot certify stall their ancestors
    // and leave them untouched until the next round widens the samples
    template<typename scalar_t>
    void compress_pass(CompressCtx<scalar_t>& c, int n, int depth) {
      const auto& t = c.hss.tree().node(n);
      auto& w = c.ws[n];
      auto& nd = c.hss.node(n);
      if (!t.is_leaf()) {
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
        compress_pass(c, t.child0, depth + 1);
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
        compress_pass(c, t.child1, depth + 1);
#pragma omp taskwait
      }
      if (w.state == CompressState::Done) { update_done(c, n, depth); return; }
      if (!t.is_leaf() && (c.ws[t.child0].state != CompressState::Done ||
                           c.ws[t.child1].state != CompressState::Done))
        return;
      if (w.state == CompressState::Uncompressed) {
        // extract the dense pieces once; they are final from here on
        if (t.is_leaf()) {
          std::vector<int> idx(t.size());
          for (int i = 0; i < t.size(); i++) idx[i] = t.begin + i;
          nd.d = c.orc.elements(idx, idx);
        } else {
          nd.b12 = c.orc.elements(c.hss.node(t.child0).ir, c.hss.node(t.child1).ic);
          nd.b21 = c.orc.elements(c.hss.node(t.child1).ir, c.hss.node(t.child0).ic);
        }
        w.state = CompressState::Partial;
      }
      build_local_samples(c, n, depth);
      if (n == c.hss.tree().root_id()) {
        // the root keeps no bases, its children's B blocks close the matrix
        w.slr = DenseMatrix<scalar_t>();
        w.slc = DenseMatrix<scalar_t>();
        w.state = CompressState::Done;
        return;
      }
      // a width-d sample can only certify ranks up to d - p: a narrower
      // sample of a higher-rank block meets any tolerance spuriously, so the
      // detected rank itself must clear the oversampling margin. the absolute
      // floor keeps blocks that cancelled to roundoff noise at rank zero.
      auto idr = interpolative_decomposition(w.slr.transpose(Trans::C),
                                             c.eps, std::max(c.cap_id, 0), c.abs_tol);
      auto idc = interpolative_decomposition(w.slc.transpose(Trans::C),
                                             c.eps, std::max(c.cap_id, 0), c.abs_tol);
      if (!idr.certified || idr.rank > c.cap_id ||
          !idc.certified || idc.rank > c.cap_id) {
        c.fail.store(n, std::memory_order_relaxed);
        return;
      }
      // equalize row and col ranks so the ULV elimination blocks are square;
      // padding only promotes further pivot rows into a skeleton
      const int r = std::max(idr.rank, idc.rank);
      nd.u = BasisId<scalar_t>(idr);
      nd.v = BasisId<scalar_t>(idc);
      nd.u.pad_to(r);
      nd.v.pad_to(r);
      std::vector<int> rows_all, cols_all;
      if (t.is_leaf()) {
        rows_all.resize(t.size());
        for (int i = 0; i < t.size(); i++) rows_all[i] = t.begin + i;
        cols_all = rows_all;
      } else {
        const auto& n0 = c.hss.node(t.child0);
        const auto& n1 = c.hss.node(t.child1);
        rows_all = n0.ir; rows_all.insert(rows_all.end(), n1.ir.begin(), n1.ir.end());
        cols_all = n0.ic; cols_all.insert(cols_all.end(), n1.ic.begin(), n1.ic.end());
      }
      nd.ir.resize(r);
      nd.ic.resize(r);
      for (int i = 0; i < r; i++) {
        nd.ir[i] = rows_all[nd.u.perm()[i]];
        nd.ic[i] = cols_all[nd.v.perm()[i]];
      }
      w.sr = w.slr.rows_of(nd.u.skeleton());
      w.sc = w.slc.rows_of(nd.v.skeleton());
      if (t.is_leaf()) {
        auto rl = const_view(c.gr, t.size(), c.d, t.begin, 0);
        w.rr = nd.v.applyC(rl, depth);
        w.rc = nd.u.applyC(rl, depth);
      } else {
        w.rr = nd.v.applyC(DenseMatrix<scalar_t>::vstack(c.ws[t.child0].rr,
                                                         c.ws[t.child1].rr), depth);
        w.rc = nd.u.applyC(DenseMatrix<scalar_t>::vstack(c.ws[t.child0].rc,
                                                         c.ws[t.child1].rc), depth);
      }
      w.slr = DenseMatrix<scalar_t>();
      w.slc = DenseMatrix<scalar_t>();
      w.state = CompressState::Done;
    }

  } // namespace detail

  // adaptive randomized HSS compression. runs bottom-up passes against the
  // oracles, widening the shared random block by dd columns whenever some
  // node's ID cannot certify its rank within d - p, until the whole tree is
  // done or the rank guard trips. seeds[i] names the random stream of row i,
  // which is how overlapping fronts see identical random entries.
  template<typename scalar_t>
  HssMatrix<scalar_t> hss_compress_adaptive(
      const CompressionOracles<scalar_t>& oracles, const ClusterTree& tree,
      const std::vector<std::int64_t>& seeds, const HssOptions& opts,
      HssCompressStats* stats = nullptr,
      const std::function<void(const HssMatrix<scalar_t>&, int)>& round_hook = {},
      int depth = 0) {
    const int n = tree.root().end;
    assert(static_cast<int>(seeds.size()) == n);
    HssMatrix<scalar_t> hss(tree);
    std::vector<detail::CompressScratch<scalar_t>> ws(tree.size());
    DenseMatrix<scalar_t> gr(n, 0), gsr(n, 0), gsc(n, 0);
    std::atomic<int> fail{-1};
    int d = std::min(opts.d0, opts.max_rank + opts.p);
    int rounds = 0;
    while (true) {
      rounds++;
      const int dold = static_cast<int>(gr.cols());
      detail::grow_random(gr, seeds, d);
      {
        auto rnew = const_view(gr, n, d - dold, 0, dold);
        DenseMatrix<scalar_t> srn, scn;
        oracles.sample(rnew, srn, scn);
        assert(static_cast<int>(srn.rows()) == n && static_cast<int>(srn.cols()) == d - dold);
        detail::append_cols(gsr, srn);
        detail::append_cols(gsc, scn);
      }
      const int cap_id = std::min(d - opts.p, opts.max_rank);
      const auto scale = std::max(gsr.max_abs(), gsc.max_abs());
      detail::CompressCtx<scalar_t> ctx{hss, ws, oracles, gr, gsr, gsc,
                                        static_cast<real_t<scalar_t>>(opts.eps),
                                        static_cast<real_t<scalar_t>>(opts.eps) * scale,
                                        d, cap_id, fail};
      run_task_root([&] { detail::compress_pass(ctx, tree.root_id(), depth); });
      if (round_hook) round_hook(hss, rounds);
      if (ws[tree.root_id()].state == CompressState::Done) break;
      if (d - opts.p >= opts.max_rank)
        throw HssRankExceeded(fail.load(), opts.max_rank);
      d += opts.dd;
    }
    if (stats) {
      stats->rounds = rounds;
      stats->d_final = d;
    }
    return hss;
  }

  // dense-matrix oracles and a convenience front-end for tests and
  // standalone compression
  template<typename scalar_t>
  CompressionOracles<scalar_t> dense_oracles(const DenseMatrix<scalar_t>& a) {
    CompressionOracles<scalar_t> o;
    o.sample = [&a](const DenseMatrix<scalar_t>& rnew, DenseMatrix<scalar_t>& srn,
                    DenseMatrix<scalar_t>& scn) {
      srn = gemm_new(Trans::N, Trans::N, scalar_t(1), a, rnew);
      scn = gemm_new(Trans::C, Trans::N, scalar_t(1), a, rnew);
    };
    o.elements = [&a](const std::vector<int>& i, const std::vector<int>& j) {
      DenseMatrix<scalar_t> b(i.size(), j.size());
      for (std::size_t jj = 0; jj < j.size(); jj++)
        for (std::size_t ii = 0; ii < i.size(); ii++) b(ii, jj) = a(i[ii], j[jj]);
      return b;
    };
    return o;
  }

  template<typename scalar_t>
  HssMatrix<scalar_t> hss_compress(
      const DenseMatrix<scalar_t>& a, const ClusterTree& tree, const HssOptions& opts,
      HssCompressStats* stats = nullptr,
      const std::function<void(const HssMatrix<scalar_t>&, int)>& round_hook = {}) {
    if (a.rows() != a.cols() || static_cast<int>(a.rows()) != tree.root().end)
      throw IoError("hss compress: matrix and cluster tree sizes disagree");
    std::vector<std::int64_t> seeds(a.rows());
    for (std::size_t i = 0; i < a.rows(); i++) seeds[i] = static_cast<std::int64_t>(i);
    return hss_compress_adaptive(dense_oracles(a), tree, seeds, opts, stats, round_hook);
  }

} // namespace hssmf

#endif
