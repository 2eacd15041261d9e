#ifndef HSSMF_SCALING_HPP
#define HSSMF_SCALING_HPP

#include <functional>
#include <vector>

#include "sparse_matrix.hpp"

namespace hssmf {

  // row/column scaling plus a column permutation moving large entries onto
  // the diagonal. the scaled-permuted matrix is As = Dr * A * Dc * Qc, where
  // column j of As is column qc[j] of Dr*A*Dc. to map between the original
  // system A x = b and As xs = Dr b: xs[j] = x[qc[j]] / dc[qc[j]].
  template<typename scalar_t> struct ScalingState {
    std::vector<real_t<scalar_t>> dr, dc;
    std::vector<int> qc;
    int sweeps = 0;
    bool identity = false;

    // b -> Dr b (right-hand side into scaled space)
    void apply_scaling(std::vector<scalar_t>& b) const {
      if (identity) return;
      for (std::size_t i = 0; i < b.size(); i++) b[i] *= dr[i];
    }
    // xs -> x (solution of the scaled-permuted system back to original)
    void undo_scaling(const std::vector<scalar_t>& xs, std::vector<scalar_t>& x) const {
      x.resize(xs.size());
      if (identity) { x = xs; return; }
      for (std::size_t j = 0; j < xs.size(); j++) x[qc[j]] = dc[qc[j]] * xs[j];
    }
  };

  // alternating max-norm equilibration: scale rows then columns by their
  // maximum magnitudes until every row and column maximum lands in [1/2, 2],
  // capped at 10 sweeps. then a greedy within-row maximal matching (completed
  // by augmenting paths when greed strands a row) picks the column
  // permutation. throws StructuralSingularError when no zero-free diagonal
  // exists.
  template<typename scalar_t>
  SparseMatrix<scalar_t> equilibrate_and_permute(const SparseMatrix<scalar_t>& a,
                                                 ScalingState<scalar_t>& st) {
    using real_type = real_t<scalar_t>;
    const int n = a.rows();
    st.dr.assign(n, real_type(1));
    st.dc.assign(n, real_type(1));
    st.qc.resize(n);
    st.identity = false;

    SparseMatrix<scalar_t> s(a);
    auto& val = s.val();
    const auto& ptr = s.ptr();
    const auto& ind = s.ind();

    std::vector<real_type> rmax(n), cmax(n);
    auto maxima = [&]() {
      std::fill(rmax.begin(), rmax.end(), real_type(0));
      std::fill(cmax.begin(), cmax.end(), real_type(0));
      for (int i = 0; i < n; i++)
        for (int k = ptr[i]; k < ptr[i + 1]; k++) {
          auto v = abs_val(val[k]);
          rmax[i] = std::max(rmax[i], v);
          cmax[ind[k]] = std::max(cmax[ind[k]], v);
        }
    };
    auto in_range = [](real_type v) { return v >= real_type(0.5) && v <= real_type(2); };

    st.sweeps = 0;
    for (int sweep = 0; sweep < 10; sweep++) {
      maxima();
      bool ok = true;
      for (int i = 0; i < n && ok; i++) ok = in_range(rmax[i]) && in_range(cmax[i]);
      if (ok) break;
      st.sweeps++;
      for (int i = 0; i < n; i++) {
        if (rmax[i] == real_type(0))
          throw StructuralSingularError("equilibration: row " + std::to_string(i) +
                                        " is empty");
        const real_type f = real_type(1) / rmax[i];
        st.dr[i] *= f;
        for (int k = ptr[i]; k < ptr[i + 1]; k++) val[k] *= f;
      }
      std::fill(cmax.begin(), cmax.end(), real_type(0));
      for (int i = 0; i < n; i++)
        for (int k = ptr[i]; k < ptr[i + 1]; k++)
          cmax[ind[k]] = std::max(cmax[ind[k]], abs_val(val[k]));
      for (int j = 0; j < n; j++)
        if (cmax[j] == real_type(0))
          throw StructuralSingularError("equilibration: column " + std::to_string(j) +
                                        " is empty");
      std::vector<real_type> cf(n);
      for (int j = 0; j < n; j++) cf[j] = real_type(1) / cmax[j];
      for (int j = 0; j < n; j++) st.dc[j] *= cf[j];
      for (int i = 0; i < n; i++)
        for (int k = ptr[i]; k < ptr[i + 1]; k++) val[k] *= cf[ind[k]];
    }

    // greedy matching on the scaled magnitudes: each row grabs its largest
    // still-available column (lowest index on ties)
    std::vector<int> row_to_col(n, -1), col_to_row(n, -1);
    for (int i = 0; i < n; i++) {
      int best = -1;
      real_type bv(-1);
      for (int k = ptr[i]; k < ptr[i + 1]; k++) {
        const int j = ind[k];
        if (col_to_row[j] >= 0) continue;
        auto v = abs_val(val[k]);
        if (v > bv) { bv = v; best = j; }
      }
      if (best >= 0 && bv > real_type(0)) {
        row_to_col[i] = best;
        col_to_row[best] = i;
      }
    }
    // complete by augmenting paths over the nonzero pattern
    std::vector<int> visited(n, -1);
    std::function<bool(int, int)> augment = [&](int i, int stamp) -> bool {
      for (int k = ptr[i]; k < ptr[i + 1]; k++) {
        const int j = ind[k];
        if (val[k] == scalar_t(0) || visited[j] == stamp) continue;
        visited[j] = stamp;
        if (col_to_row[j] < 0 || augment(col_to_row[j], stamp)) {
          row_to_col[i] = j;
          col_to_row[j] = i;
          return true;
        }
      }
      return false;
    };
    for (int i = 0; i < n; i++) {
      if (row_to_col[i] >= 0) continue;
      if (!augment(i, i))
        throw StructuralSingularError(
            "matching: no zero-free diagonal exists (structurally singular)");
    }
    // place matched column row_to_col[j] at position j
    for (int j = 0; j < n; j++) st.qc[j] = row_to_col[j];
    return s.col_permuted(st.qc);
  }

} // namespace hssmf

#endif
