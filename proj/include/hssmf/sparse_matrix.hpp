#ifndef HSSMF_SPARSE_MATRIX_HPP
#define HSSMF_SPARSE_MATRIX_HPP

#include <algorithm>
#include <cassert>
#include <tuple>
#include <vector>

#include "dense_matrix.hpp"
#include "errors.hpp"

namespace hssmf {

  // square sparse matrix in CSR with sorted, duplicate-free rows
  template<typename scalar_t> class SparseMatrix {
  public:
    SparseMatrix() = default;
    SparseMatrix(int n, std::vector<int>&& ptr, std::vector<int>&& ind,
                 std::vector<scalar_t>&& val)
      : n_(n), ptr_(std::move(ptr)), ind_(std::move(ind)), val_(std::move(val)) {
      assert(static_cast<int>(ptr_.size()) == n_ + 1);
    }

    // build from triplets: duplicates are summed, rows end up sorted
    static SparseMatrix from_triplets(int n,
                                      std::vector<std::tuple<int, int, scalar_t>>& t) {
      std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) {
        return std::get<0>(a) != std::get<0>(b) ? std::get<0>(a) < std::get<0>(b)
                                                : std::get<1>(a) < std::get<1>(b);
      });
      SparseMatrix m;
      m.n_ = n;
      m.ptr_.assign(n + 1, 0);
      m.ind_.reserve(t.size());
      m.val_.reserve(t.size());
      for (std::size_t k = 0; k < t.size();) {
        const int i = std::get<0>(t[k]), j = std::get<1>(t[k]);
        scalar_t v(0);
        while (k < t.size() && std::get<0>(t[k]) == i && std::get<1>(t[k]) == j)
          v += std::get<2>(t[k++]);
        m.ind_.push_back(j);
        m.val_.push_back(v);
        m.ptr_[i + 1]++;
      }
      for (int i = 0; i < n; i++) m.ptr_[i + 1] += m.ptr_[i];
      return m;
    }

    int rows() const { return n_; }
    int cols() const { return n_; }
    int size() const { return n_; }
    std::int64_t nnz() const { return static_cast<std::int64_t>(ind_.size()); }
    const std::vector<int>& ptr() const { return ptr_; }
    const std::vector<int>& ind() const { return ind_; }
    const std::vector<scalar_t>& val() const { return val_; }
    std::vector<scalar_t>& val() { return val_; }

    int row_begin(int i) const { return ptr_[i]; }
    int row_end(int i) const { return ptr_[i + 1]; }

    // value at (i,j), zero if not stored
    scalar_t get(int i, int j) const {
      auto b = ind_.begin() + ptr_[i], e = ind_.begin() + ptr_[i + 1];
      auto it = std::lower_bound(b, e, j);
      if (it != e && *it == j) return val_[it - ind_.begin()];
      return scalar_t(0);
    }

    // y = op(A) x (+ y if accumulate)
    void matvec(Trans t, const scalar_t* x, scalar_t* y, bool accumulate = false) const {
      if (!accumulate) std::fill(y, y + n_, scalar_t(0));
      if (t == Trans::N) {
        for (int i = 0; i < n_; i++) {
          scalar_t s(0);
          for (int k = ptr_[i]; k < ptr_[i + 1]; k++) s += val_[k] * x[ind_[k]];
          y[i] += s;
        }
      } else {
        for (int i = 0; i < n_; i++) {
          const scalar_t xi = x[i];
          for (int k = ptr_[i]; k < ptr_[i + 1]; k++)
            y[ind_[k]] += op_val(t, val_[k]) * xi;
        }
      }
      counters::add_flops(2 * nnz());
    }

    std::vector<scalar_t> matvec(Trans t, const std::vector<scalar_t>& x) const {
      std::vector<scalar_t> y(n_);
      matvec(t, x.data(), y.data());
      return y;
    }

    // symmetric permutation B[p[i]][p[j]] = A[i][j]
    SparseMatrix permuted(const std::vector<int>& p) const {
      std::vector<std::tuple<int, int, scalar_t>> t;
      t.reserve(ind_.size());
      for (int i = 0; i < n_; i++)
        for (int k = ptr_[i]; k < ptr_[i + 1]; k++)
          t.emplace_back(p[i], p[ind_[k]], val_[k]);
      return from_triplets(n_, t);
    }

    // column permutation B[i][j] = A[i][q[j]]
    SparseMatrix col_permuted(const std::vector<int>& q) const {
      std::vector<int> qinv(n_);
      for (int j = 0; j < n_; j++) qinv[q[j]] = j;
      SparseMatrix m;
      m.n_ = n_;
      m.ptr_ = ptr_;
      m.ind_.resize(ind_.size());
      m.val_.resize(val_.size());
      for (int i = 0; i < n_; i++) {
        const int b = ptr_[i], e = ptr_[i + 1];
        std::vector<std::pair<int, scalar_t>> row(e - b);
        for (int k = b; k < e; k++) row[k - b] = {qinv[ind_[k]], val_[k]};
        std::sort(row.begin(), row.end());
        for (int k = b; k < e; k++) {
          m.ind_[k] = row[k - b].first;
          m.val_[k] = row[k - b].second;
        }
      }
      return m;
    }

    // structurally symmetrized adjacency (pattern of A + A^T, no diagonal)
    void symmetric_graph(std::vector<int>& gptr, std::vector<int>& gind) const {
      std::vector<std::vector<int>> adj(n_);
      for (int i = 0; i < n_; i++)
        for (int k = ptr_[i]; k < ptr_[i + 1]; k++) {
          const int j = ind_[k];
          if (j == i) continue;
          adj[i].push_back(j);
          adj[j].push_back(i);
        }
      gptr.assign(n_ + 1, 0);
      gind.clear();
      for (int i = 0; i < n_; i++) {
        auto& a = adj[i];
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
        gptr[i + 1] = gptr[i] + static_cast<int>(a.size());
        gind.insert(gind.end(), a.begin(), a.end());
      }
    }

    bool structurally_symmetric() const {
      for (int i = 0; i < n_; i++)
        for (int k = ptr_[i]; k < ptr_[i + 1]; k++) {
          const int j = ind_[k];
          auto b = ind_.begin() + ptr_[j], e = ind_.begin() + ptr_[j + 1];
          if (!std::binary_search(b, e, i)) return false;
        }
      return true;
    }

    DenseMatrix<scalar_t> dense() const {
      DenseMatrix<scalar_t> d(n_, n_);
      for (int i = 0; i < n_; i++)
        for (int k = ptr_[i]; k < ptr_[i + 1]; k++) d(i, ind_[k]) = val_[k];
      return d;
    }

  private:
    int n_ = 0;
    std::vector<int> ptr_{0};
    std::vector<int> ind_;
    std::vector<scalar_t> val_;
  };

} // namespace hssmf

#endif
