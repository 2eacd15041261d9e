#include <algorithm>
#include <cstring>
#include <string>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "hssmf/counters.hpp"
#include "hssmf/elimination_tree.hpp"
#include "hssmf/grid_problems.hpp"
#include "hssmf/multifrontal.hpp"
#include "hssmf/ordering.hpp"
#include "hssmf/random_sampler.hpp"
#include "oracles.hpp"

using namespace hssmf;
using oracle::dense_of;
using oracle::gemm_ref_new;
using oracle::max_abs_diff;
using oracle::random_matrix;
using oracle::rel_err;
using oracle::solve_ref;

namespace {

  using dmat = DenseMatrix<double>;
  using sp = SparseMatrix<double>;

  std::vector<unsigned char> bytes(const dmat& a) {
    std::vector<unsigned char> out(a.rows() * a.cols() * sizeof(double));
    for (std::size_t j = 0; j < a.cols(); j++)
      std::memcpy(out.data() + j * a.rows() * sizeof(double), a.ptr(0, j),
                  a.rows() * sizeof(double));
    return out;
  }

  // reassemble and eliminate fronts with textbook dense arithmetic,
  // straight off the recursive definition
  struct FrontOracle {
    const sp& a;
    const EliminationTree& t;

    int local(const FrontNode& f, int g) const {
      if (g < f.sep_end) return g - f.sep_begin;
      auto it = std::lower_bound(f.upd.begin(), f.upd.end(), g);
      return f.sep_size() + static_cast<int>(it - f.upd.begin());
    }

    dmat front(int i) const {
      const auto& f = t.node(i);
      const int ns = f.sep_size(), m = f.front_size();
      auto glob = [&](int l) { return l < ns ? f.sep_begin + l : f.upd[l - ns]; };
      dmat fm(m, m);
      for (int j = 0; j < m; j++)
        for (int r = 0; r < m; r++)
          if (r < ns || j < ns) fm(r, j) = a.get(glob(r), glob(j));
      for (int c : {f.child0, f.child1}) {
        if (c < 0) continue;
        auto u = update(c);
        const auto& cf = t.node(c);
        for (std::size_t y = 0; y < cf.upd.size(); y++)
          for (std::size_t x = 0; x < cf.upd.size(); x++)
            fm(local(f, cf.upd[x]), local(f, cf.upd[y])) += u(x, y);
      }
      return fm;
    }

    dmat update(int i) const {
      auto fm = front(i);
      const int ns = t.node(i).sep_size(), m = static_cast<int>(fm.rows());
      auto f22 = fm.sub(ns, m, ns, m);
      if (!ns || ns == m) return f22;
      auto y = solve_ref(fm.sub(0, ns, 0, ns), fm.sub(0, ns, ns, m));
      auto p = gemm_ref_new(Trans::N, Trans::N, fm.sub(ns, m, 0, ns), y);
      f22.add_scaled(-1.0, p);
      return f22;
    }
  };

  struct Problem {
    sp a;
    EliminationTree t;
  };

  Problem p2d_problem(int k, int nd_leaf) {
    auto g = generate_grid_problem<double>(GridKind::P2D, k);
    Permutation perm;
    auto st = nested_dissection_geometric(g.geom, nd_leaf, perm);
    Problem p;
    p.a = g.A.permuted(perm.perm);
    p.t = EliminationTree::from_separators(st, p.a.size());
    symbolic_factorization(p.a, p.t);
    p.t.compute_levels();
    return p;
  }

  // postorder loop so children are factored (and kept) before parents
  void factor_all_dense(const sp& a, const EliminationTree& t,
                        std::vector<Front<double>>& fr) {
    for (int i = 0; i < t.size(); i++)
      detail::factor_front_dense(a, t, i, fr, 0);
  }

  double rel_residual(const sp& a, const dmat& x, const dmat& b) {
    dmat r(b.rows(), b.cols());
    for (std::size_t c = 0; c < b.cols(); c++)
      a.matvec(Trans::N, x.ptr(0, c), r.ptr(0, c));
    r.add_scaled(-1.0, b);
    const double nb = b.norm_fro();
    return nb == 0 ? r.norm_fro() : r.norm_fro() / nb;
  }

}  // namespace

TEST_SUITE_BEGIN("multifrontal");

TEST_CASE("extend-add merges child updates into the parent front") {
  // two 2x2 updates over global index sets {2,3} and {2,4} folded into a
  // parent over {2,3,4}: the shared entry adds up, disjoint pairs stay zero
  EliminationTree t;
  t.n = 5;
  t.nodes.resize(3);
  t.nodes[0].sep_begin = 0;
  t.nodes[0].sep_end = 1;
  t.nodes[0].upd = {2, 3};
  t.nodes[0].parent = 2;
  t.nodes[1].sep_begin = 1;
  t.nodes[1].sep_end = 2;
  t.nodes[1].upd = {2, 4};
  t.nodes[1].parent = 2;
  t.nodes[2].sep_begin = 2;
  t.nodes[2].sep_end = 5;
  t.nodes[2].child0 = 0;
  t.nodes[2].child1 = 1;
  t.compute_levels();

  std::vector<std::tuple<int, int, double>> trip = {
    {0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 10.0}, {2, 4, 7.0}, {3, 3, 1.0},
    {4, 4, 2.0}};
  auto a = sp::from_triplets(5, trip);

  std::vector<Front<double>> fr(3);
  fr[0].cb = dmat(2, 2);
  fr[0].cb(0, 0) = 1.5;
  fr[0].cb(0, 1) = -2.0;
  fr[0].cb(1, 0) = 3.0;
  fr[0].cb(1, 1) = 0.5;
  fr[1].cb = dmat(2, 2);
  fr[1].cb(0, 0) = -4.0;
  fr[1].cb(0, 1) = 6.0;
  fr[1].cb(1, 0) = -1.0;
  fr[1].cb(1, 1) = 8.0;

  auto fm = assemble_dense(a, t, 2, fr);
  REQUIRE(fm.rows() == 3);
  CHECK(fm(0, 0) == 10.0 + 1.5 + -4.0);
  CHECK(fm(0, 1) == -2.0);
  CHECK(fm(1, 0) == 3.0);
  CHECK(fm(1, 1) == 1.0 + 0.5);
  CHECK(fm(0, 2) == 7.0 + 6.0);
  CHECK(fm(2, 0) == -1.0);
  CHECK(fm(2, 2) == 2.0 + 8.0);
  CHECK(fm(1, 2) == 0.0);
  CHECK(fm(2, 1) == 0.0);
}

TEST_CASE("every sparse entry is assembled into exactly one front") {
  auto p = p2d_problem(7, 4);
  const int n = p.a.size();
  dmat acc(n, n);
  std::vector<int> hits(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < p.t.size(); i++) {
    const auto& f = p.t.node(i);
    const int ns = f.sep_size();
    auto glob = [&](int l) {
      return l < ns ? f.sep_begin + l : f.upd[l - ns];
    };
    detail::for_front_entries(p.a, f, [&](int li, int lj, double v) {
      acc(glob(li), glob(lj)) += v;
      hits[static_cast<std::size_t>(glob(li)) * n + glob(lj)]++;
    });
  }
  auto ad = dense_of(p.a);
  CHECK(max_abs_diff(acc, ad) == 0.0);
  for (int i = 0; i < n; i++)
    for (int k = p.a.row_begin(i); k < p.a.row_end(i); k++)
      CHECK(hits[static_cast<std::size_t>(i) * n + p.a.ind()[k]] == 1);
}

TEST_CASE("assembled fronts match the recursive elimination oracle") {
  auto p = p2d_problem(7, 4);
  std::vector<Front<double>> fr(p.t.size());
  factor_all_dense(p.a, p.t, fr);
  FrontOracle orc{p.a, p.t};
  for (int i = 0; i < p.t.size(); i++) {
    auto want = orc.front(i);
    auto got = assemble_dense(p.a, p.t, i, fr);
    CHECK(rel_err(got, want) <= 1e-12);
    if (p.t.node(i).upd_size())
      CHECK(rel_err(fr[i].cb, orc.update(i)) <= 1e-12);
  }
}

TEST_CASE("random block rows are seeded by global indices") {
  // two sibling fronts sharing global rows 14 and 17 generate those rows
  // bit-identically and independently
  FrontNode f1, f2;
  f1.sep_begin = 10;
  f1.sep_end = 12;
  f1.upd = {14, 17};
  f2.sep_begin = 12;
  f2.sep_end = 14;
  f2.upd = {14, 16, 17};
  auto r1 = build_random_block<double>(f1, 9);
  auto r2 = build_random_block<double>(f2, 9);
  REQUIRE(r1.rows() == 4);
  REQUIRE(r2.rows() == 5);
  for (int c = 0; c < 9; c++) {
    CHECK(r1(2, c) == r2(2, c));
    CHECK(r1(3, c) == r2(4, c));
    CHECK(r1(0, c) == SeededRowSampler::value(10, c));
    CHECK(r2(1, c) == SeededRowSampler::value(13, c));
    CHECK(r2(3, c) == SeededRowSampler::value(16, c));
  }
}

TEST_CASE("skinny sampling matches the assembled front, dense children") {
  auto p = p2d_problem(7, 4);
  std::vector<Front<double>> fr(p.t.size());
  factor_all_dense(p.a, p.t, fr);
  for (int i : {p.t.root_id(), p.t.node(p.t.root_id()).child0}) {
    const auto& f = p.t.node(i);
    auto r = build_random_block<double>(f, 11);
    dmat sr, sc;
    skinny_sample(p.a, p.t, i, fr, r, sr, sc);
    auto fm = assemble_dense(p.a, p.t, i, fr);
    CHECK(rel_err(sr, gemm_ref_new(Trans::N, Trans::N, fm, r)) <= 1e-12);
    CHECK(rel_err(sc, gemm_ref_new(Trans::C, Trans::N, fm, r)) <= 1e-12);
  }
}

TEST_CASE("sampling, extraction and densify with compressed children") {
  auto p = p2d_problem(15, 16);
  std::vector<Front<double>> fr(p.t.size());
  SolverOptions so;
  so.leaf = 16;
  so.eps = 1e-12;
  so.d0 = 32;
  so.dd = 16;
  so.p = 8;
  const int root = p.t.root_id();
  for (int i = 0; i < p.t.size(); i++) {
    if (i == root) continue;
    const auto& f = p.t.node(i);
    if (f.level == 1 && f.sep_size() && f.upd_size())
      detail::factor_front_hss(p.a, p.t, i, fr, so, 1000, 0);
    else
      detail::factor_front_dense(p.a, p.t, i, fr, 0);
  }
  REQUIRE(fr[p.t.node(root).child0].hss);
  REQUIRE(fr[p.t.node(root).child1].hss);

  FrontOracle orc{p.a, p.t};
  auto want = orc.front(root);
  const int m = static_cast<int>(want.rows());

  // skinny samples against the exact front
  auto r = build_random_block<double>(p.t.node(root), 13);
  dmat sr, sc;
  skinny_sample(p.a, p.t, root, fr, r, sr, sc);
  CHECK(rel_err(sr, gemm_ref_new(Trans::N, Trans::N, want, r)) <= 1e-9);
  CHECK(rel_err(sc, gemm_ref_new(Trans::C, Trans::N, want, r)) <= 1e-9);

  // element extraction, full and subset
  std::vector<int> all(m), rows = {0, 1, m / 2, m - 1}, cols = {2, m / 3, m - 2};
  for (int i = 0; i < m; i++) all[i] = i;
  auto full = front_elements(p.a, p.t, root, fr, all, all);
  CHECK(rel_err(full, want) <= 1e-9);
  auto blk = front_elements(p.a, p.t, root, fr, rows, cols);
  for (std::size_t y = 0; y < cols.size(); y++)
    for (std::size_t x = 0; x < rows.size(); x++)
      CHECK(blk(x, y) == full(rows[x], cols[y]));

  // densified assembly crosses the compressed-child boundary
  auto fm = assemble_dense(p.a, p.t, root, fr);
  CHECK(rel_err(fm, want) <= 1e-9);
}

TEST_CASE("identity system and a single scalar front") {
  EliminationTree t;
  t.n = 6;
  t.nodes.resize(1);
  t.nodes[0].sep_begin = 0;
  t.nodes[0].sep_end = 6;
  t.compute_levels();
  std::vector<std::tuple<int, int, double>> trip;
  for (int i = 0; i < 6; i++) trip.emplace_back(i, i, 1.0);
  auto a = sp::from_triplets(6, trip);
  SolverOptions so;
  auto m = mf_factor(a, t, so);
  CHECK(m.front_stats[0].type == "dense");
  auto b = random_matrix<double>(6, 2, 91);
  auto x = mf_solve_new(m, b);
  CHECK(bytes(x) == bytes(b));

  EliminationTree t1;
  t1.n = 1;
  t1.nodes.resize(1);
  t1.nodes[0].sep_end = 1;
  t1.compute_levels();
  std::vector<std::tuple<int, int, double>> t1rip = {{0, 0, 2.0}};
  auto a1 = sp::from_triplets(1, t1rip);
  auto m1 = mf_factor(a1, t1, so);
  dmat b1(1, 1);
  b1(0, 0) = 3.0;
  auto x1 = mf_solve_new(m1, b1);
  CHECK(x1(0, 0) == 1.5);
}

TEST_CASE("pure multifrontal solve reaches direct accuracy") {
  auto p = p2d_problem(10, 8);
  const int n = p.a.size();
  SolverOptions so;
  counters::reset();
  auto m = mf_factor(p.a, p.t, so);
  CHECK(counters::get_flops() > 0);
  CHECK(m.hss_fronts == 0);

  auto b = random_matrix<double>(n, 1, 7);
  auto x = mf_solve_new(m, b);
  CHECK(rel_residual(p.a, x, b) <= 1e-12);

  // known solution of all ones
  dmat ones(n, 1), bone(n, 1);
  ones.fill(1.0);
  p.a.matvec(Trans::N, ones.ptr(0, 0), bone.ptr(0, 0));
  auto xo = mf_solve_new(m, bone);
  CHECK(max_abs_diff(xo, ones) <= 1e-10);

  // multiple right-hand sides solve column by column, bit for bit
  auto b3 = random_matrix<double>(n, 3, 8);
  auto x3 = mf_solve_new(m, b3);
  for (int c = 0; c < 3; c++) {
    auto xc = mf_solve_new(m, b3.sub(0, n, c, c + 1));
    CHECK(bytes(xc) == bytes(x3.sub(0, n, c, c + 1)));
  }
}

TEST_CASE("block-diagonal system with an empty synthetic root") {
  // two decoupled tridiagonal blocks under a zero-size root front
  const int h = 5, n = 2 * h;
  std::vector<std::tuple<int, int, double>> trip;
  for (int b = 0; b < 2; b++)
    for (int i = 0; i < h; i++) {
      trip.emplace_back(b * h + i, b * h + i, 4.0);
      if (i + 1 < h) {
        trip.emplace_back(b * h + i, b * h + i + 1, -1.0);
        trip.emplace_back(b * h + i + 1, b * h + i, -1.0);
      }
    }
  auto a = sp::from_triplets(n, trip);
  EliminationTree t;
  t.n = n;
  t.nodes.resize(3);
  t.nodes[0].sep_begin = 0;
  t.nodes[0].sep_end = h;
  t.nodes[0].parent = 2;
  t.nodes[1].sep_begin = h;
  t.nodes[1].sep_end = n;
  t.nodes[1].parent = 2;
  t.nodes[2].sep_begin = n;
  t.nodes[2].sep_end = n;
  t.nodes[2].child0 = 0;
  t.nodes[2].child1 = 1;
  t.compute_levels();

  SolverOptions so;
  auto m = mf_factor(a, t, so);
  auto b = random_matrix<double>(n, 1, 17);
  auto x = mf_solve_new(m, b);
  auto want = solve_ref(dense_of(a), b);
  CHECK(max_abs_diff(x, want) <= 1e-12);
}

TEST_CASE("compressed fronts factor and solve") {
  auto p = p2d_problem(31, 16);
  const int n = p.a.size();
  SolverOptions so;
  so.ls = 3;
  so.min_hss = 24;
  so.leaf = 16;
  so.eps = 1e-10;
  so.d0 = 32;
  so.dd = 32;
  so.p = 8;
  auto m = mf_factor(p.a, p.t, so);
  CHECK(m.hss_fronts >= 1);
  CHECK(m.fallbacks == 0);
  CHECK(m.max_front_rank >= 1);
  int hss_seen = 0;
  for (const auto& st : m.front_stats) {
    CHECK(st.dim == p.t.node(st.id).front_size());
    if (st.type == "hss") {
      hss_seen++;
      CHECK(p.t.node(st.id).level < so.ls);
      CHECK(st.dim >= so.min_hss);
      CHECK(st.rank >= 1);
      CHECK(st.flops > 0);
    }
  }
  CHECK(hss_seen == m.hss_fronts);

  auto b = random_matrix<double>(n, 1, 23);
  auto x = mf_solve_new(m, b);
  CHECK(rel_residual(p.a, x, b) <= 1e-6);

  // sequential rerun is deterministic down to the bits
  auto m2 = mf_factor(p.a, p.t, so);
  for (int i = 0; i < p.t.size(); i++) {
    CHECK(m2.front_stats[i].rank == m.front_stats[i].rank);
    CHECK(m2.front_stats[i].type == m.front_stats[i].type);
    CHECK(m2.front_stats[i].flops == m.front_stats[i].flops);
  }
  auto x2 = mf_solve_new(m2, b);
  CHECK(bytes(x2) == bytes(x));

  // siblings sharing a global row draw identical random values for it
  const auto& rt = p.t.root();
  const auto& c0 = p.t.node(rt.child0);
  const auto& c1 = p.t.node(rt.child1);
  std::vector<int> shared;
  std::set_intersection(c0.upd.begin(), c0.upd.end(), c1.upd.begin(),
                        c1.upd.end(), std::back_inserter(shared));
  REQUIRE(!shared.empty());
  auto r0 = build_random_block<double>(c0, 6);
  auto r1 = build_random_block<double>(c1, 6);
  for (int g : shared) {
    const int l0 = detail::front_local(c0, g), l1 = detail::front_local(c1, g);
    for (int c = 0; c < 6; c++) CHECK(r0(l0, c) == r1(l1, c));
  }
}

TEST_CASE("a compressed root front uses the full factorization") {
  auto p = p2d_problem(31, 16);
  SolverOptions so;
  so.ls = 1;  // only the root
  so.min_hss = 16;
  so.leaf = 8;
  so.eps = 1e-12;
  so.d0 = 16;
  so.dd = 16;
  so.p = 4;
  auto m = mf_factor(p.a, p.t, so);
  CHECK(m.hss_fronts == 1);
  CHECK(m.front_stats[p.t.root_id()].type == "hss");
  CHECK(m.fronts[p.t.root_id()].ulv.partial() == false);
  auto b = random_matrix<double>(p.a.size(), 1, 5);
  auto x = mf_solve_new(m, b);
  CHECK(rel_residual(p.a, x, b) <= 1e-9);
}

TEST_CASE("rank guard falls back to dense fronts") {
  auto p = p2d_problem(15, 16);
  SolverOptions so;
  so.ls = 9;
  so.min_hss = 16;
  so.leaf = 16;
  so.eps = 1e-12;
  so.max_rank = 4;
  so.d0 = 8;
  so.dd = 4;
  so.p = 2;
  auto m = mf_factor(p.a, p.t, so);
  CHECK(m.fallbacks >= 1);
  bool seen = false;
  for (const auto& st : m.front_stats) seen |= st.type == "hss_dense";
  CHECK(seen);
  auto b = random_matrix<double>(p.a.size(), 1, 3);
  auto x = mf_solve_new(m, b);
  CHECK(rel_residual(p.a, x, b) <= 1e-9);
}

TEST_CASE("exact singularity names the offending front") {
  EliminationTree t;
  t.n = 3;
  t.nodes.resize(1);
  t.nodes[0].sep_end = 3;
  t.compute_levels();
  std::vector<std::tuple<int, int, double>> trip = {
    {0, 0, 1.0}, {0, 1, 0.0}, {1, 0, 0.0}, {2, 2, 1.0}};
  auto a = sp::from_triplets(3, trip);
  SolverOptions so;
  try {
    auto m = mf_factor(a, t, so);
    FAIL("expected SingularMatrixError");
  } catch (const SingularMatrixError& e) {
    CHECK(std::string(e.what()).find("front 0") != std::string::npos);
    CHECK(e.column() == 1);
  }
}

TEST_CASE("factor and solve argument errors") {
  EliminationTree t;
  t.n = 2;
  t.nodes.resize(1);
  t.nodes[0].sep_end = 2;
  t.compute_levels();
  std::vector<std::tuple<int, int, double>> trip = {{0, 0, 1.0}, {1, 1, 1.0}};
  auto a = sp::from_triplets(2, trip);
  std::vector<std::tuple<int, int, double>> trip3 = {
    {0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}};
  auto a3 = sp::from_triplets(3, trip3);
  SolverOptions so;
  CHECK_THROWS_AS(mf_factor(a3, t, so), IoError);
  auto m = mf_factor(a, t, so);
  dmat bad(5, 1);
  CHECK_THROWS_AS(mf_solve(m, bad), IoError);
  MfFactors<double> unf;
  unf.tree = t;
  dmat b(2, 1);
  CHECK_THROWS_AS(mf_solve(unf, b), SolverError);
}

TEST_SUITE_END();
