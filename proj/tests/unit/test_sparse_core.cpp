#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "hssmf/counters.hpp"
#include "hssmf/grid_problems.hpp"
#include "hssmf/matrix_market.hpp"
#include "hssmf/scaling.hpp"
#include "hssmf/sparse_matrix.hpp"
#include "oracles.hpp"

using namespace hssmf;

namespace {

  // write a literal file for the reader error tests
  void put_file(const std::string& path, const std::string& text) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    REQUIRE(f != nullptr);
    std::fputs(text.c_str(), f);
    std::fclose(f);
  }

  SparseMatrix<double> small_unsym() {
    // 4x4 with an unsymmetric pattern and a duplicate triplet
    std::vector<std::tuple<int, int, double>> t = {
        {0, 0, 2.0}, {0, 2, -1.0}, {1, 1, 3.0}, {1, 0, 0.5},
        {2, 2, 4.0}, {2, 3, 1.5},  {3, 3, 5.0}, {0, 2, -0.5}};
    return SparseMatrix<double>::from_triplets(4, t);
  }

  // independently recomputed convection-diffusion row: closed-form velocity
  // field evaluated at the vertex, first-order upwinding, diffusion nu times
  // the 5/7-point stencil, all scaled by h^2
  std::map<int, double> conv_row_oracle(GridKind kind, int k, double nu,
                                        int i, int j, int l) {
    const bool threed = kind == GridKind::C3D;
    const double h = 1.0 / (k + 1);
    const double x = (i + 1) * h, y = (j + 1) * h, z = (l + 1) * h;
    double vx, vy, vz;
    if (threed) {
      vx = 2 * x * (1 - x) * (2 * y - 1) * z;
      vy = -y * (1 - y) * (2 * x - 1);
      vz = -(2 * x - 1) * (2 * y - 1) * z * (1 - z);
    } else {
      vx = x * (1 - x) * (2 * y - 1);
      vy = y * (1 - y) * (2 * x - 1);
      vz = 0;
    }
    GridGeometry g;
    g.dims = {k, k, threed ? k : 1};
    g.ndims = threed ? 3 : 2;
    std::map<int, double> row;
    double diag = (threed ? 6.0 : 4.0) * nu;
    auto axis = [&](double v, int lo_i, int lo_j, int lo_l, int hi_i, int hi_j,
                    int hi_l, bool lo_ok, bool hi_ok) {
      diag += h * std::abs(v);
      if (lo_ok) row[g.vertex(lo_i, lo_j, lo_l)] = -nu - h * std::max(v, 0.0);
      if (hi_ok) row[g.vertex(hi_i, hi_j, hi_l)] = -nu + h * std::min(v, 0.0);
    };
    axis(vx, i - 1, j, l, i + 1, j, l, i > 0, i < k - 1);
    axis(vy, i, j - 1, l, i, j + 1, l, j > 0, j < k - 1);
    if (threed) axis(vz, i, j, l - 1, i, j, l + 1, l > 0, l < k - 1);
    row[g.vertex(i, j, l)] = diag;
    return row;
  }

} // namespace

TEST_SUITE("sparse") {

  TEST_CASE("from_triplets sums duplicates and sorts rows") {
    auto a = small_unsym();
    CHECK(a.rows() == 4);
    CHECK(a.cols() == 4);
    CHECK(a.nnz() == 7);
    CHECK(a.get(0, 2) == doctest::Approx(-1.5));
    CHECK(a.get(0, 0) == doctest::Approx(2.0));
    CHECK(a.get(1, 0) == doctest::Approx(0.5));
    CHECK(a.get(0, 1) == 0.0);
    CHECK(a.get(3, 0) == 0.0);
    for (int i = 0; i < 4; i++)
      for (int kk = a.row_begin(i); kk + 1 < a.row_end(i); kk++)
        CHECK(a.ind()[kk] < a.ind()[kk + 1]);
  }

  TEST_CASE("dense conversion matches entrywise get") {
    auto a = small_unsym();
    auto d = a.dense();
    for (int i = 0; i < 4; i++)
      for (int j = 0; j < 4; j++)
        CHECK(d(i, j) == a.get(i, j));
  }

  TEST_CASE("matvec agrees with the dense oracle in all transpose modes") {
    auto a = small_unsym();
    auto ad = oracle::dense_of(a);
    auto xm = oracle::random_matrix<double>(4, 1, 77);
    std::vector<double> x(4);
    for (int i = 0; i < 4; i++) x[i] = xm(i, 0);
    for (auto t : {Trans::N, Trans::T, Trans::C}) {
      auto y = a.matvec(t, x);
      DenseMatrix<double> yref(4, 1);
      oracle::gemm_ref(t, Trans::N, 1.0, ad, xm, 0.0, yref);
      for (int i = 0; i < 4; i++)
        CHECK(y[i] == doctest::Approx(yref(i, 0)).epsilon(1e-14));
    }
    // accumulate adds on top of what is already in y
    std::vector<double> y2(4, 1.0);
    a.matvec(Trans::N, x.data(), y2.data(), true);
    auto y1 = a.matvec(Trans::N, x);
    for (int i = 0; i < 4; i++) CHECK(y2[i] == doctest::Approx(1.0 + y1[i]));
  }

  TEST_CASE("complex matvec conjugates in mode C") {
    using cplx = std::complex<double>;
    std::vector<std::tuple<int, int, cplx>> t = {{0, 0, {1, 2}},
                                                 {0, 1, {-1, 0.5}},
                                                 {1, 0, {0, -3}},
                                                 {1, 1, {2, 1}}};
    auto a = SparseMatrix<cplx>::from_triplets(2, t);
    auto ad = oracle::dense_of(a);
    auto xm = oracle::random_matrix<cplx>(2, 1, 5);
    std::vector<cplx> x = {xm(0, 0), xm(1, 0)};
    for (auto tr : {Trans::N, Trans::T, Trans::C}) {
      auto y = a.matvec(tr, x);
      DenseMatrix<cplx> yref(2, 1);
      oracle::gemm_ref(tr, Trans::N, cplx(1), ad, xm, cplx(0), yref);
      for (int i = 0; i < 2; i++) CHECK(std::abs(y[i] - yref(i, 0)) <= 1e-14);
    }
  }

  TEST_CASE("matvec counts two flops per stored entry") {
    auto a = small_unsym();
    std::vector<double> x(4, 1.0);
    counters::reset();
    a.matvec(Trans::N, x);
    CHECK(counters::get_flops() == 2 * a.nnz());
  }

  TEST_CASE("symmetric permutation maps entries to new positions") {
    auto a = small_unsym();
    std::vector<int> p = {2, 0, 3, 1}; // old vertex i lands at position p[i]
    auto b = a.permuted(p);
    for (int i = 0; i < 4; i++)
      for (int j = 0; j < 4; j++)
        CHECK(b.get(p[i], p[j]) == doctest::Approx(a.get(i, j)));
    CHECK(b.nnz() == a.nnz());
  }

  TEST_CASE("column permutation gathers columns") {
    auto a = small_unsym();
    std::vector<int> q = {3, 1, 0, 2}; // new column j is old column q[j]
    auto b = a.col_permuted(q);
    for (int i = 0; i < 4; i++)
      for (int j = 0; j < 4; j++)
        CHECK(b.get(i, j) == doctest::Approx(a.get(i, q[j])));
  }

  TEST_CASE("symmetric_graph is the pattern of A plus its transpose") {
    auto a = small_unsym();
    std::vector<int> gptr, gind;
    a.symmetric_graph(gptr, gind);
    // unsymmetric entries (0,2),(1,0),(2,3) pick up the mirror edges
    std::vector<std::vector<int>> want = {{1, 2}, {0}, {0, 3}, {2}};
    REQUIRE(gptr.size() == 5);
    for (int i = 0; i < 4; i++) {
      std::vector<int> got(gind.begin() + gptr[i], gind.begin() + gptr[i + 1]);
      CHECK(got == want[i]);
    }
    CHECK_FALSE(a.structurally_symmetric());
    auto p = generate_grid_problem<double>(GridKind::P2D, 4);
    CHECK(p.A.structurally_symmetric());
  }

  TEST_CASE("matrix market roundtrip preserves every bit") {
    auto a = small_unsym();
    const std::string path = "mm_roundtrip.mtx";
    write_matrix_market(a, path);
    auto b = read_matrix_market(path);
    REQUIRE(b.rows() == a.rows());
    REQUIRE(b.nnz() == a.nnz());
    CHECK(b.ptr() == a.ptr());
    CHECK(b.ind() == a.ind());
    for (std::size_t k = 0; k < a.val().size(); k++)
      CHECK(b.val()[k] == a.val()[k]); // exact: %.17g survives the trip
    std::remove(path.c_str());
  }

  TEST_CASE("matrix market symmetric files expand the lower triangle") {
    const std::string path = "mm_sym.mtx";
    put_file(path,
             "%%MatrixMarket matrix coordinate real symmetric\n"
             "% comment line\n"
             "3 3 4\n"
             "1 1 2\n"
             "2 1 -1\n"
             "3 2 -1\n"
             "3 3 2\n");
    auto a = read_matrix_market(path);
    CHECK(a.nnz() == 6);
    CHECK(a.get(0, 1) == doctest::Approx(-1));
    CHECK(a.get(1, 0) == doctest::Approx(-1));
    CHECK(a.get(1, 2) == doctest::Approx(-1));
    CHECK(a.get(2, 2) == doctest::Approx(2));
    CHECK(a.get(1, 1) == 0.0);
    std::remove(path.c_str());
  }

  TEST_CASE("matrix market reader rejects malformed files") {
    const std::string path = "mm_bad.mtx";
    auto expect_throw = [&](const std::string& text) {
      put_file(path, text);
      CHECK_THROWS_AS(read_matrix_market(path), IoError);
    };
    expect_throw("%%NotMatrixMarket matrix coordinate real general\n1 1 1\n1 1 1\n");
    expect_throw("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n");
    expect_throw("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n");
    expect_throw("%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n");
    expect_throw("%%MatrixMarket matrix coordinate real skew-symmetric\n1 1 0\n");
    expect_throw("%%MatrixMarket matrix coordinate real general\n2 3 1\n1 1 1\n");
    expect_throw("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n");
    expect_throw("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n2 2 1\n");
    expect_throw("%%MatrixMarket matrix coordinate real general\n2 2 1\nx y z\n");
    CHECK_THROWS_AS(read_matrix_market("no_such_file.mtx"), IoError);
    std::remove(path.c_str());
  }

  TEST_CASE("poisson 2d stencil on a 3x3 grid") {
    auto p = generate_grid_problem<double>(GridKind::P2D, 3);
    const auto& a = p.A;
    REQUIRE(a.rows() == 9);
    CHECK(a.nnz() == 33); // 9 diagonal + 2 per interior edge (12 edges)
    for (int i = 0; i < 9; i++) CHECK(a.get(i, i) == doctest::Approx(4.0));
    // center vertex couples to all four neighbors
    const int c = p.geom.vertex(1, 1);
    CHECK(c == 4);
    for (int nb : {1, 3, 5, 7}) CHECK(a.get(c, nb) == doctest::Approx(-1.0));
    // row sums: 4 - (number of interior neighbors), boundary terms dropped
    std::vector<double> want_rowsum = {2, 1, 2, 1, 0, 1, 2, 1, 2};
    for (int i = 0; i < 9; i++) {
      double s = 0;
      for (int kk = a.row_begin(i); kk < a.row_end(i); kk++) s += a.val()[kk];
      CHECK(s == doctest::Approx(want_rowsum[i]));
    }
  }

  TEST_CASE("poisson 3d stencil on a 2x2x2 grid") {
    auto p = generate_grid_problem<double>(GridKind::P3D, 2);
    const auto& a = p.A;
    REQUIRE(a.rows() == 8);
    CHECK(a.nnz() == 8 + 8 * 3); // every vertex has exactly three neighbors
    for (int i = 0; i < 8; i++) {
      CHECK(a.get(i, i) == doctest::Approx(6.0));
      double s = 0;
      for (int kk = a.row_begin(i); kk < a.row_end(i); kk++) s += a.val()[kk];
      CHECK(s == doctest::Approx(3.0));
    }
    // vertex order is x fastest: (1,0,1) = 1 + 2*(0 + 2*1)
    CHECK(p.geom.vertex(1, 0, 1) == 5);
    CHECK(a.get(5, 4) == doctest::Approx(-1.0));
    CHECK(a.get(5, 7) == doctest::Approx(-1.0));
    CHECK(a.get(5, 1) == doctest::Approx(-1.0));
    CHECK(a.get(5, 0) == 0.0);
  }

  TEST_CASE("convection-diffusion rows match the closed-form field") {
    const double nu = 1e-4;
    for (auto [kind, k] : {std::pair{GridKind::C2D, 3}, {GridKind::C2D, 5},
                           {GridKind::C3D, 2}, {GridKind::C3D, 3}}) {
      auto p = generate_grid_problem<double>(kind, k, nu);
      const bool threed = kind == GridKind::C3D;
      const int kz = threed ? k : 1;
      for (int l = 0; l < kz; l++)
        for (int j = 0; j < k; j++)
          for (int i = 0; i < k; i++) {
            const int row = p.geom.vertex(i, j, l);
            auto want = conv_row_oracle(kind, k, nu, i, j, l);
            CHECK(p.A.row_end(row) - p.A.row_begin(row) ==
                  static_cast<int>(want.size()));
            for (auto [col, v] : want)
              CHECK(p.A.get(row, col) ==
                    doctest::Approx(v).epsilon(1e-13).scale(1.0));
          }
    }
  }

  TEST_CASE("equilibration scales a hollow 2x2 onto a unit diagonal") {
    std::vector<std::tuple<int, int, double>> t = {{0, 1, 2.0}, {1, 0, 3.0}};
    auto a = SparseMatrix<double>::from_triplets(2, t);
    ScalingState<double> st;
    auto as = equilibrate_and_permute(a, st);
    REQUIRE(st.qc.size() == 2);
    CHECK(st.qc[0] == 1);
    CHECK(st.qc[1] == 0);
    CHECK(as.get(0, 0) == doctest::Approx(1.0));
    CHECK(as.get(1, 1) == doctest::Approx(1.0));
    CHECK(st.sweeps >= 1);
    // algebra: As(i,j) = dr[i] * A(i, qc[j]) * dc[qc[j]]
    for (int i = 0; i < 2; i++)
      for (int j = 0; j < 2; j++)
        CHECK(as.get(i, j) ==
              doctest::Approx(st.dr[i] * a.get(i, st.qc[j]) * st.dc[st.qc[j]]));
  }

  TEST_CASE("equilibration brings badly scaled maxima into range") {
    // diagonally dominant 24x24 with rows blown up by factors to 1e6
    const int n = 24;
    std::mt19937 gen(99);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<std::tuple<int, int, double>> t;
    for (int i = 0; i < n; i++) {
      const double rowscale = std::pow(10.0, (i % 7) - 3);
      double off = 0;
      for (int d : {-5, -1, 2, 9}) {
        const int j = i + d;
        if (j < 0 || j >= n) continue;
        const double v = uni(gen);
        off += std::abs(v);
        t.emplace_back(i, j, rowscale * v);
      }
      t.emplace_back(i, i, rowscale * (off + 1.0));
    }
    auto a = SparseMatrix<double>::from_triplets(n, t);
    ScalingState<double> st;
    auto as = equilibrate_and_permute(a, st);
    std::vector<double> rmax(n, 0), cmax(n, 0);
    for (int i = 0; i < n; i++)
      for (int kk = as.row_begin(i); kk < as.row_end(i); kk++) {
        const double v = std::abs(as.val()[kk]);
        rmax[i] = std::max(rmax[i], v);
        cmax[as.ind()[kk]] = std::max(cmax[as.ind()[kk]], v);
      }
    for (int i = 0; i < n; i++) {
      CHECK(rmax[i] >= 0.5);
      CHECK(rmax[i] <= 2.0);
      CHECK(cmax[i] >= 0.5);
      CHECK(cmax[i] <= 2.0);
      CHECK(as.get(i, i) != 0.0);
    }

    // full pipeline roundtrip: solve the scaled-permuted system and undo
    std::vector<double> xtrue(n);
    for (int i = 0; i < n; i++) xtrue[i] = uni(gen);
    auto b = a.matvec(Trans::N, xtrue);
    st.apply_scaling(b); // b -> Dr b
    auto asd = oracle::dense_of(as);
    DenseMatrix<double> bs(n, 1);
    for (int i = 0; i < n; i++) bs(i, 0) = b[i];
    auto xs = oracle::solve_ref(asd, bs);
    std::vector<double> xsv(n), x;
    for (int i = 0; i < n; i++) xsv[i] = xs(i, 0);
    st.undo_scaling(xsv, x);
    for (int i = 0; i < n; i++)
      CHECK(x[i] == doctest::Approx(xtrue[i]).epsilon(1e-9));
  }

  TEST_CASE("structural singularity is detected") {
    ScalingState<double> st;
    // empty row
    std::vector<std::tuple<int, int, double>> t1 = {{0, 0, 1.0}, {0, 1, 1.0}};
    auto a1 = SparseMatrix<double>::from_triplets(2, t1);
    CHECK_THROWS_AS(equilibrate_and_permute(a1, st), StructuralSingularError);
    // all rows and columns populated but no zero-free diagonal exists:
    // rows 0 and 1 both live only in column 2
    std::vector<std::tuple<int, int, double>> t2 = {
        {0, 2, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}, {2, 1, 1.0}, {2, 2, 1.0}};
    auto a2 = SparseMatrix<double>::from_triplets(3, t2);
    CHECK_THROWS_AS(equilibrate_and_permute(a2, st), StructuralSingularError);
  }
}
