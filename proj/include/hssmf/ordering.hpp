#ifndef HSSMF_ORDERING_HPP
#define HSSMF_ORDERING_HPP

#include <vector>

#include "hssmf/grid_problems.hpp"

namespace hssmf {

  enum class OrderingStrategy { Geometric, Graph };

  inline const char* name(OrderingStrategy s) {
    return s == OrderingStrategy::Geometric ? "geometric" : "graph";
  }

  // old->new and new->old index maps for a reordering of [0,n)
  struct Permutation {
    std::vector<int> perm;   // perm[old] = new
    std::vector<int> iperm;  // iperm[new] = old

    Permutation() = default;
    explicit Permutation(int n) : perm(n), iperm(n) {
      for (int i = 0; i < n; i++) perm[i] = iperm[i] = i;
    }
    int size() const { return static_cast<int>(perm.size()); }

    void set_from_iperm(std::vector<int> ip) {
      iperm = std::move(ip);
      perm.assign(iperm.size(), -1);
      for (int k = 0; k < size(); k++) perm[iperm[k]] = k;
    }
    bool valid() const {
      const int n = size();
      if (static_cast<int>(iperm.size()) != n) return false;
      std::vector<char> seen(n, 0);
      for (int i = 0; i < n; i++) {
        const int p = perm[i];
        if (p < 0 || p >= n || seen[p] || iperm[p] != i) return false;
        seen[p] = 1;
      }
      return true;
    }
    // composition: apply *this first, then o
    Permutation then(const Permutation& o) const {
      Permutation r;
      r.perm.resize(perm.size());
      for (int i = 0; i < size(); i++) r.perm[i] = o.perm[perm[i]];
      r.iperm.resize(perm.size());
      for (int i = 0; i < size(); i++) r.iperm[r.perm[i]] = i;
      return r;
    }
  };

  // one node of the nested-dissection tree: a contiguous range of
  // post-reordered indices forming the separator (or, at leaves, the whole
  // subdomain). nodes are stored in postorder, root last.
  struct Separator {
    int sep_begin = 0, sep_end = 0;
    int child0 = -1, child1 = -1, parent = -1;
    bool is_leaf() const { return child0 < 0 && child1 < 0; }
    int size() const { return sep_end - sep_begin; }
  };

  struct SeparatorTree {
    std::vector<Separator> nodes;
    int size() const { return static_cast<int>(nodes.size()); }
    int root_id() const { return size() - 1; }
    const Separator& root() const { return nodes.back(); }
  };

  // two-way split of the vertex subset `verts` by BFS level sets grown from
  // a pseudo-peripheral vertex; with extract_sep the smaller boundary side
  // of the edge cut is peeled off as a vertex separator. `level` is caller
  // scratch of size >= n, holding -2 everywhere on entry (restored on exit).
  struct Bisection {
    std::vector<int> part0, part1, sep;
  };
  Bisection level_set_bisection(const std::vector<int>& verts, const int* gptr,
                                const int* gind, std::vector<int>& level,
                                bool extract_sep);

  // nested dissection by middle-plane bisection of a regular grid; subdomains
  // of at most `leaf` vertices become tree leaves
  SeparatorTree nested_dissection_geometric(const GridGeometry& g, int leaf,
                                            Permutation& p);

  // nested dissection of a general symmetric adjacency structure (gptr/gind,
  // no diagonal) via level-set bisection + boundary vertex separators
  SeparatorTree nested_dissection_graph(int n, const std::vector<int>& gptr,
                                        const std::vector<int>& gind, int leaf,
                                        Permutation& p);

}  // namespace hssmf

#endif
