#ifndef HSSMF_HSS_MATRIX_HPP
#define HSSMF_HSS_MATRIX_HPP

#include <atomic>
#include <vector>

#include "cluster_tree.hpp"
#include "errors.hpp"
#include "rrqr.hpp"

namespace hssmf {

  // interpolative basis stored as a (permutation, coefficient) pair: the
  // m x rank matrix equals Pi [I; E], i.e. row perm[i] of the basis is row i
  // of the stacked [I; E]. rows perm[0:rank] are the skeleton and carry exact
  // identity rows, which is what makes B blocks plain submatrices and the ULV
  // left transform cheap.
  template<typename scalar_t> class BasisId {
  public:
    BasisId() = default;
    explicit BasisId(const IdResult<scalar_t>& id)
      : perm_(id.perm), rank_(id.rank) {
      // E = coeffs^*, one row per non-skeleton position
      const std::size_t nr = perm_.size() - rank_;
      e_ = DenseMatrix<scalar_t>(nr, rank_);
      for (std::size_t j = 0; j < nr; j++)
        for (int i = 0; i < rank_; i++)
          e_(j, i) = conj_val(id.coeffs(i, j));
      build_iperm();
    }

    int rank() const { return rank_; }
    int rows() const { return static_cast<int>(perm_.size()); }
    bool empty() const { return perm_.empty(); }
    const std::vector<int>& perm() const { return perm_; }
    const DenseMatrix<scalar_t>& e() const { return e_; }
    std::vector<int> skeleton() const {
      return std::vector<int>(perm_.begin(), perm_.begin() + rank_);
    }
    std::int64_t stored_scalars() const {
      return std::int64_t(e_.rows()) * e_.cols();
    }

    // promote the next pivot rows into the skeleton, so that a row/col rank
    // mismatch can be equalized without changing the interpolation: promoted
    // rows become exact identity rows, the remaining rows keep their old
    // coefficients with zeros in the new columns. the promoted rows are the
    // next RRQR pivots, i.e. the best-conditioned candidates.
    void pad_to(int r) {
      assert(r >= rank_ && r <= rows());
      const int t = r - rank_;
      if (!t) return;
      DenseMatrix<scalar_t> e2(e_.rows() - t, r);
      for (std::size_t j = t; j < e_.rows(); j++)
        for (int i = 0; i < rank_; i++) e2(j - t, i) = e_(j, i);
      e_ = std::move(e2);
      rank_ = r;
    }

    // materialize the m x rank basis
    DenseMatrix<scalar_t> dense() const {
      DenseMatrix<scalar_t> m(rows(), rank_);
      for (int i = 0; i < rank_; i++) m(perm_[i], i) = scalar_t(1);
      for (std::size_t j = 0; j < e_.rows(); j++)
        for (int i = 0; i < rank_; i++) m(perm_[rank_ + j], i) = e_(j, i);
      return m;
    }

    // y = U x
    DenseMatrix<scalar_t> apply(const DenseMatrix<scalar_t>& x, int depth = 0) const {
      assert(static_cast<int>(x.rows()) == rank_);
      DenseMatrix<scalar_t> y(rows(), x.cols());
      for (std::size_t j = 0; j < x.cols(); j++)
        for (int i = 0; i < rank_; i++) y(perm_[i], j) = x(i, j);
      if (e_.rows()) {
        auto t = gemm_new(Trans::N, Trans::N, scalar_t(1), e_, x, depth);
        for (std::size_t j = 0; j < x.cols(); j++)
          for (std::size_t i = 0; i < e_.rows(); i++) y(perm_[rank_ + i], j) = t(i, j);
      }
      return y;
    }

    // y = U^* z
    DenseMatrix<scalar_t> applyC(const DenseMatrix<scalar_t>& z, int depth = 0) const {
      assert(static_cast<int>(z.rows()) == rows());
      DenseMatrix<scalar_t> y(rank_, z.cols());
      for (std::size_t j = 0; j < z.cols(); j++)
        for (int i = 0; i < rank_; i++) y(i, j) = z(perm_[i], j);
      if (e_.rows()) {
        DenseMatrix<scalar_t> zr(e_.rows(), z.cols());
        for (std::size_t j = 0; j < z.cols(); j++)
          for (std::size_t i = 0; i < e_.rows(); i++) zr(i, j) = z(perm_[rank_ + i], j);
        gemm(Trans::C, Trans::N, scalar_t(1), e_, zr, scalar_t(1), y, depth);
      }
      return y;
    }

    // Omega y with Omega = [-E I; I 0] Pi^T, so Omega U = [0; I] exactly:
    // the result is [y_rest - E y_skel ; y_skel]
    DenseMatrix<scalar_t> omega_apply(const DenseMatrix<scalar_t>& y, int depth = 0) const {
      assert(static_cast<int>(y.rows()) == rows());
      const std::size_t k = e_.rows(), c = y.cols();
      DenseMatrix<scalar_t> out(rows(), c);
      DenseMatrix<scalar_t> yskel(rank_, c);
      for (std::size_t j = 0; j < c; j++) {
        for (int i = 0; i < rank_; i++) yskel(i, j) = y(perm_[i], j);
        for (std::size_t i = 0; i < k; i++) out(i, j) = y(perm_[rank_ + i], j);
      }
      if (k) {
        DenseMatrixWrapper<scalar_t> top(k, c, out, 0, 0);
        gemm(Trans::N, Trans::N, scalar_t(-1), e_, yskel, scalar_t(1), top, depth);
      }
      out.copy_into(k, 0, yskel);
      return out;
    }

    // y Psi with Psi = Pi [-E^* I; I 0], so V^* Psi = [0 I] exactly:
    // the result is [y_rest - y_skel E^* | y_skel]
    DenseMatrix<scalar_t> psi_apply_right(const DenseMatrix<scalar_t>& y, int depth = 0) const {
      assert(static_cast<int>(y.cols()) == rows());
      const std::size_t k = e_.rows(), m = y.rows();
      DenseMatrix<scalar_t> out(m, rows());
      DenseMatrix<scalar_t> yskel(m, rank_);
      for (int j = 0; j < rank_; j++)
        std::copy(y.ptr(0, perm_[j]), y.ptr(0, perm_[j]) + m, yskel.ptr(0, j));
      for (std::size_t j = 0; j < k; j++)
        std::copy(y.ptr(0, perm_[rank_ + j]), y.ptr(0, perm_[rank_ + j]) + m, out.ptr(0, j));
      if (k) {
        DenseMatrixWrapper<scalar_t> left(m, k, out, 0, 0);
        gemm(Trans::N, Trans::C, scalar_t(-1), yskel, e_, scalar_t(1), left, depth);
      }
      out.copy_into(0, k, yskel);
      return out;
    }

    // x = Psi xhat, undoing the column transform in the ULV back-solve:
    // x(perm[i<rank]) = xhat_bot(i) - (E^* xhat_top)(i), x(perm[rank+j]) = xhat_top(j)
    DenseMatrix<scalar_t> psi_apply(const DenseMatrix<scalar_t>& xhat, int depth = 0) const {
      assert(static_cast<int>(xhat.rows()) == rows());
      const std::size_t k = e_.rows(), c = xhat.cols();
      auto x1 = const_view(xhat, k, c, 0, 0);
      DenseMatrix<scalar_t> t = xhat.sub(k, rows(), 0, c);
      if (k) gemm(Trans::C, Trans::N, scalar_t(-1), e_, x1, scalar_t(1), t, depth);
      DenseMatrix<scalar_t> out(rows(), c);
      for (std::size_t j = 0; j < c; j++) {
        for (int i = 0; i < rank_; i++) out(perm_[i], j) = t(i, j);
        for (std::size_t i = 0; i < k; i++) out(perm_[rank_ + i], j) = xhat(i, j);
      }
      return out;
    }

    // out[0:rank] += column q of U^*, i.e. conj(U(q, :)); extraction uses
    // this to select columns of V^* at the leaves instead of multiplying
    // unit vectors through
    void addto_ct_col(int q, scalar_t* out) const {
      const int pos = iperm_[q];
      if (pos < rank_) out[pos] += scalar_t(1);
      else
        for (int i = 0; i < rank_; i++)
          out[i] += conj_val(e_(pos - rank_, i));
    }

  private:
    std::vector<int> perm_, iperm_;
    DenseMatrix<scalar_t> e_;
    int rank_ = 0;

    void build_iperm() {
      iperm_.resize(perm_.size());
      for (std::size_t i = 0; i < perm_.size(); i++) iperm_[perm_[i]] = static_cast<int>(i);
    }
  };

  // one node of the HSS tree. leaves own the diagonal block, internal nodes
  // the sibling coupling blocks; every non-root node carries interpolative
  // row/col bases and the matrix-local indices of its retained rows/cols.
  // by the submatrix property, b12 = A(ir(c0), ic(c1)) and
  // b21 = A(ir(c1), ic(c0)) exactly.
  template<typename scalar_t> struct HssNode {
    DenseMatrix<scalar_t> d;
    DenseMatrix<scalar_t> b12, b21;
    BasisId<scalar_t> u, v;
    std::vector<int> ir, ic;
  };

  template<typename scalar_t> class HssMatrix {
  public:
    HssMatrix() = default;
    explicit HssMatrix(const ClusterTree& t) : tree_(t), nodes_(t.size()) {}

    HssMatrix(const HssMatrix&) = delete;
    HssMatrix& operator=(const HssMatrix&) = delete;
    HssMatrix(HssMatrix&& h) noexcept
      : tree_(std::move(h.tree_)), nodes_(std::move(h.nodes_)),
        leaf_visits_(h.leaf_visits_.load()) {}
    HssMatrix& operator=(HssMatrix&& h) noexcept {
      tree_ = std::move(h.tree_);
      nodes_ = std::move(h.nodes_);
      leaf_visits_.store(h.leaf_visits_.load());
      return *this;
    }

    bool empty() const { return nodes_.empty(); }
    int rows() const { return empty() ? 0 : tree_.root().end; }
    int cols() const { return rows(); }
    const ClusterTree& tree() const { return tree_; }
    const HssNode<scalar_t>& node(int i) const { return nodes_[i]; }
    HssNode<scalar_t>& node(int i) { return nodes_[i]; }

    int hss_rank() const {
      int r = 0;
      for (int i = 0; i < tree_.size(); i++)
        if (i != tree_.root_id())
          r = std::max({r, nodes_[i].u.rank(), nodes_[i].v.rank()});
      return r;
    }

    std::int64_t stored_scalars() const {
      std::int64_t s = 0;
      for (const auto& n : nodes_) {
        s += std::int64_t(n.d.rows()) * n.d.cols();
        s += std::int64_t(n.b12.rows()) * n.b12.cols();
        s += std::int64_t(n.b21.rows()) * n.b21.cols();
        s += n.u.stored_scalars() + n.v.stored_scalars();
      }
      return s;
    }

    // y = op(A) x restricted to the subtree rooted at `root` (-1 = whole
    // matrix); op N or C. two-pass tree algorithm: the upward pass reduces x
    // through the column (row, for C) bases, the downward pass distributes
    // the B couplings back through the row (column) bases and adds the leaf
    // diagonal blocks.
    void matvec(Trans op, const DenseMatrix<scalar_t>& x, DenseMatrix<scalar_t>& y,
                int root = -1, int depth = 0) const {
      assert(op == Trans::N || op == Trans::C);
      const int rt = root < 0 ? tree_.root_id() : root;
      const int n = tree_.node(rt).size();
      if (static_cast<int>(x.rows()) != n || x.cols() != y.cols() ||
          static_cast<int>(y.rows()) != n)
        throw IoError("hss matvec: shape mismatch");
      y.zero();
      if (!x.cols()) return;
      std::vector<DenseMatrix<scalar_t>> z(nodes_.size());
      run_task_root([&] {
        mv_up(op, rt, rt, x, z, depth);
        mv_down(op, rt, rt, x, y, z, nullptr, depth);
      });
    }
    DenseMatrix<scalar_t> matvec_new(Trans op, const DenseMatrix<scalar_t>& x,
                                     int root = -1, int depth = 0) const {
      DenseMatrix<scalar_t> y(x.rows(), x.cols());
      matvec(op, x, y, root, depth);
      return y;
    }

    // A(i, j) for sorted index sets relative to the subtree rooted at `root`.
    // only branches intersecting j are visited upward and branches
    // intersecting i downward; single-leaf queries touch exactly one leaf
    // (tracked by the leaf visit counter).
    DenseMatrix<scalar_t> extract(const std::vector<int>& i, const std::vector<int>& j,
                                  int root = -1) const {
      const int rt = root < 0 ? tree_.root_id() : root;
      const auto& rn = tree_.node(rt);
      for (int q : i)
        if (q < 0 || q >= rn.size()) throw IoError("hss extract: row index out of range");
      for (int q : j)
        if (q < 0 || q >= rn.size()) throw IoError("hss extract: col index out of range");
      ExtractCtx ctx{i, j, rn.begin, rt,
                     DenseMatrix<scalar_t>(i.size(), j.size()),
                     std::vector<DenseMatrix<scalar_t>>(nodes_.size()),
                     std::vector<int>(nodes_.size(), 0), std::vector<int>(nodes_.size(), 0),
                     std::vector<char>(nodes_.size(), 0)};
      if (!j.empty()) ex_up(ctx, rt, 0, static_cast<int>(j.size()));
      if (!i.empty()) ex_down(ctx, rt, 0, static_cast<int>(i.size()), nullptr);
      std::int64_t seen = 0;
      for (char c : ctx.leaf_seen) seen += c;
      leaf_visits_.fetch_add(seen, std::memory_order_relaxed);
      return std::move(ctx.out);
    }

    std::int64_t extract_leaf_visits() const {
      return leaf_visits_.load(std::memory_order_relaxed);
    }
    void reset_extract_leaf_visits() const {
      leaf_visits_.store(0, std::memory_order_relaxed);
    }

    // dense reconstruction of a subtree block, routed through extract so the
    // two entry paths cannot drift apart
    DenseMatrix<scalar_t> dense(int root = -1) const {
      const int rt = root < 0 ? tree_.root_id() : root;
      std::vector<int> all(tree_.node(rt).size());
      for (std::size_t q = 0; q < all.size(); q++) all[q] = static_cast<int>(q);
      return extract(all, all, rt);
    }

    // nested-basis reconstruction and application over a subtree
    DenseMatrix<scalar_t> dense_ubig(int n) const {
      const auto& t = tree_.node(n);
      if (t.is_leaf()) return nodes_[n].u.dense();
      auto x = nodes_[n].u.dense();
      const int r0 = nodes_[t.child0].u.rank();
      auto top = gemm_new(Trans::N, Trans::N, scalar_t(1), dense_ubig(t.child0),
                          const_view(x, r0, x.cols(), 0, 0));
      auto bot = gemm_new(Trans::N, Trans::N, scalar_t(1), dense_ubig(t.child1),
                          const_view(x, x.rows() - r0, x.cols(), r0, 0));
      return DenseMatrix<scalar_t>::vstack(top, bot);
    }
    DenseMatrix<scalar_t> dense_vbig(int n) const {
      const auto& t = tree_.node(n);
      if (t.is_leaf()) return nodes_[n].v.dense();
      auto x = nodes_[n].v.dense();
      const int r0 = nodes_[t.child0].v.rank();
      auto top = gemm_new(Trans::N, Trans::N, scalar_t(1), dense_vbig(t.child0),
                          const_view(x, r0, x.cols(), 0, 0));
      auto bot = gemm_new(Trans::N, Trans::N, scalar_t(1), dense_vbig(t.child1),
                          const_view(x, x.rows() - r0, x.cols(), r0, 0));
      return DenseMatrix<scalar_t>::vstack(top, bot);
    }
    // y = U^big_n x without materializing the basis
    DenseMatrix<scalar_t> ubig_apply(int n, const DenseMatrix<scalar_t>& x,
                                     int depth = 0) const {
      const auto& t = tree_.node(n);
      auto y = nodes_[n].u.apply(x, depth);
      if (t.is_leaf()) return y;
      const int r0 = nodes_[t.child0].u.rank();
      auto top = ubig_apply(t.child0, const_view(y, r0, y.cols(), 0, 0), depth);
      auto bot = ubig_apply(t.child1, const_view(y, y.rows() - r0, y.cols(), r0, 0), depth);
      return DenseMatrix<scalar_t>::vstack(top, bot);
    }
    // y = (V^big_n)^* x
    DenseMatrix<scalar_t> vbig_ct_apply(int n, const DenseMatrix<scalar_t>& x,
                                        int depth = 0) const {
      const auto& t = tree_.node(n);
      if (t.is_leaf()) return nodes_[n].v.applyC(x, depth);
      const int m0 = tree_.node(t.child0).size();
      auto top = vbig_ct_apply(t.child0, const_view(x, m0, x.cols(), 0, 0), depth);
      auto bot = vbig_ct_apply(t.child1, const_view(x, x.rows() - m0, x.cols(), m0, 0), depth);
      return nodes_[n].v.applyC(DenseMatrix<scalar_t>::vstack(top, bot), depth);
    }

  private:
    ClusterTree tree_;
    std::vector<HssNode<scalar_t>> nodes_;
    mutable std::atomic<std::int64_t> leaf_visits_{0};

    // upward matvec sweep: z = (V or U)^* of the stacked child reductions
    void mv_up(Trans op, int n, int rt, const DenseMatrix<scalar_t>& x,
               std::vector<DenseMatrix<scalar_t>>& z, int depth) const {
      const auto& t = tree_.node(n);
      const int base = tree_.node(rt).begin;
      if (t.is_leaf()) {
        if (n == rt) return;
        auto xl = const_view(x, t.size(), x.cols(), t.begin - base, 0);
        const auto& b = op == Trans::N ? nodes_[n].v : nodes_[n].u;
        z[n] = b.applyC(xl, depth);
        return;
      }
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
      mv_up(op, t.child0, rt, x, z, depth + 1);
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
      mv_up(op, t.child1, rt, x, z, depth + 1);
#pragma omp taskwait
      if (n == rt) return;
      const auto& b = op == Trans::N ? nodes_[n].v : nodes_[n].u;
      z[n] = b.applyC(DenseMatrix<scalar_t>::vstack(z[t.child0], z[t.child1]), depth);
    }

    // downward matvec sweep: w carries the accumulated coupling for this
    // node in its row (col, for C) generator coordinates
    void mv_down(Trans op, int n, int rt, const DenseMatrix<scalar_t>& x,
                 DenseMatrix<scalar_t>& y, const std::vector<DenseMatrix<scalar_t>>& z,
                 const DenseMatrix<scalar_t>* w, int depth) const {
      const auto& t = tree_.node(n);
      const int base = tree_.node(rt).begin;
      if (t.is_leaf()) {
        auto xl = const_view(x, t.size(), x.cols(), t.begin - base, 0);
        DenseMatrixWrapper<scalar_t> yl(t.size(), y.cols(), y, t.begin - base, 0);
        gemm(op, Trans::N, scalar_t(1), nodes_[n].d, xl, scalar_t(1), yl, depth);
        if (w) {
          const auto& b = op == Trans::N ? nodes_[n].u : nodes_[n].v;
          auto uw = b.apply(*w, depth);
          for (std::size_t jj = 0; jj < y.cols(); jj++)
            for (int ii = 0; ii < t.size(); ii++) yl(ii, jj) += uw(ii, jj);
        }
        return;
      }
      const int c0 = t.child0, c1 = t.child1;
      const auto& b0 = op == Trans::N ? nodes_[c0].u : nodes_[c0].v;
      const auto& b1 = op == Trans::N ? nodes_[c1].u : nodes_[c1].v;
      DenseMatrix<scalar_t> w0(b0.rank(), x.cols()), w1(b1.rank(), x.cols());
      if (op == Trans::N) {
        gemm(Trans::N, Trans::N, scalar_t(1), nodes_[n].b12, z[c1], scalar_t(1), w0, depth);
        gemm(Trans::N, Trans::N, scalar_t(1), nodes_[n].b21, z[c0], scalar_t(1), w1, depth);
      } else {
        gemm(Trans::C, Trans::N, scalar_t(1), nodes_[n].b21, z[c1], scalar_t(1), w0, depth);
        gemm(Trans::C, Trans::N, scalar_t(1), nodes_[n].b12, z[c0], scalar_t(1), w1, depth);
      }
      if (w) {
        const auto& b = op == Trans::N ? nodes_[n].u : nodes_[n].v;
        auto uw = b.apply(*w, depth);
        for (std::size_t jj = 0; jj < w0.cols(); jj++) {
          for (std::size_t ii = 0; ii < w0.rows(); ii++) w0(ii, jj) += uw(ii, jj);
          for (std::size_t ii = 0; ii < w1.rows(); ii++) w1(ii, jj) += uw(w0.rows() + ii, jj);
        }
      }
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
      mv_down(op, c0, rt, x, y, z, &w0, depth + 1);
#pragma omp task default(shared) untied final(depth >= params::task_depth_cutoff-1) mergeable
      mv_down(op, c1, rt, x, y, z, &w1, depth + 1);
#pragma omp taskwait
    }

    struct ExtractCtx {
      const std::vector<int>& i;
      const std::vector<int>& j;
      int base, rt;
      DenseMatrix<scalar_t> out;
      std::vector<DenseMatrix<scalar_t>> z;
      std::vector<int> jw0, jw1;  // per-node window into j
      std::vector<char> leaf_seen;
    };

    void ex_up(ExtractCtx& ctx, int n, int j0, int j1) const {
      const auto& t = tree_.node(n);
      ctx.jw0[n] = j0;
      ctx.jw1[n] = j1;
      if (t.is_leaf()) {
        ctx.leaf_seen[n] = 1;
        if (n == ctx.rt) return;
        const auto& v = nodes_[n].v;
        ctx.z[n] = DenseMatrix<scalar_t>(v.rank(), j1 - j0);
        for (int jj = j0; jj < j1; jj++)
          v.addto_ct_col(ctx.j[jj] + ctx.base - t.begin, ctx.z[n].ptr(0, jj - j0));
        return;
      }
      const int split = tree_.node(t.child1).begin - ctx.base;
      int jm = j0;
      while (jm < j1 && ctx.j[jm] < split) jm++;
      if (jm > j0) ex_up(ctx, t.child0, j0, jm);
      if (j1 > jm) ex_up(ctx, t.child1, jm, j1);
      if (n == ctx.rt) return;
      const auto& v = nodes_[n].v;
      const int r0 = nodes_[t.child0].v.rank(), r1 = nodes_[t.child1].v.rank();
      DenseMatrix<scalar_t> stk(r0 + r1, j1 - j0);
      if (jm > j0) stk.copy_into(0, 0, ctx.z[t.child0]);
      if (j1 > jm) stk.copy_into(r0, jm - j0, ctx.z[t.child1]);
      ctx.z[n] = v.applyC(stk);
    }

    void ex_down(ExtractCtx& ctx, int n, int i0, int i1,
                 const DenseMatrix<scalar_t>* w) const {
      const auto& t = tree_.node(n);
      const int w_cols = static_cast<int>(ctx.j.size());
      if (t.is_leaf()) {
        ctx.leaf_seen[n] = 1;
        if (w) {
          auto uw = nodes_[n].u.apply(*w);
          for (int jj = 0; jj < w_cols; jj++)
            for (int ii = i0; ii < i1; ii++)
              ctx.out(ii, jj) += uw(ctx.i[ii] + ctx.base - t.begin, jj);
        }
        for (int jj = ctx.jw0[n]; jj < ctx.jw1[n]; jj++)
          for (int ii = i0; ii < i1; ii++)
            ctx.out(ii, jj) += nodes_[n].d(ctx.i[ii] + ctx.base - t.begin,
                                           ctx.j[jj] + ctx.base - t.begin);
        return;
      }
      const int c0 = t.child0, c1 = t.child1;
      const int split = tree_.node(c1).begin - ctx.base;
      int im = i0;
      while (im < i1 && ctx.i[im] < split) im++;
      const bool j0has = ctx.jw1[c0] > ctx.jw0[c0], j1has = ctx.jw1[c1] > ctx.jw0[c1];
      DenseMatrix<scalar_t> w0, w1;
      if (im > i0 && (w || j1has)) {
        w0 = DenseMatrix<scalar_t>(nodes_[c0].u.rank(), w_cols);
        if (j1has) {
          DenseMatrixWrapper<scalar_t> w0v(w0.rows(), ctx.jw1[c1] - ctx.jw0[c1],
                                           w0, 0, ctx.jw0[c1]);
          gemm(Trans::N, Trans::N, scalar_t(1), nodes_[n].b12, ctx.z[c1],
               scalar_t(1), w0v);
        }
      }
      if (i1 > im && (w || j0has)) {
        w1 = DenseMatrix<scalar_t>(nodes_[c1].u.rank(), w_cols);
        if (j0has) {
          DenseMatrixWrapper<scalar_t> w1v(w1.rows(), ctx.jw1[c0] - ctx.jw0[c0],
                                           w1, 0, ctx.jw0[c0]);
          gemm(Trans::N, Trans::N, scalar_t(1), nodes_[n].b21, ctx.z[c0],
               scalar_t(1), w1v);
        }
      }
      if (w && n != ctx.rt) {
        auto uw = nodes_[n].u.apply(*w);
        const int r0 = nodes_[c0].u.rank();
        for (int jj = 0; jj < w_cols; jj++) {
          if (!w0.empty())
            for (int ii = 0; ii < r0; ii++) w0(ii, jj) += uw(ii, jj);
          if (!w1.empty())
            for (std::size_t ii = r0; ii < uw.rows(); ii++) w1(ii - r0, jj) += uw(ii, jj);
        }
      }
      if (im > i0) ex_down(ctx, c0, i0, im, w0.empty() ? nullptr : &w0);
      if (i1 > im) ex_down(ctx, c1, im, i1, w1.empty() ? nullptr : &w1);
    }
  };

} // namespace hssmf

#endif
