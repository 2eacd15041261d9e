#include "hssmf/separator_reorder.hpp"

#include <algorithm>
#include <cassert>

#include "hssmf/task_parallel.hpp"

namespace hssmf {

  void separator_enriched_graph(const std::vector<int>& sep_verts, int n,
                                const std::vector<int>& gptr,
                                const std::vector<int>& gind,
                                std::vector<int>& sptr,
                                std::vector<int>& sind) {
    const int s = static_cast<int>(sep_verts.size());
    std::vector<int> loc(n, -1);
    for (int t = 0; t < s; t++) loc[sep_verts[t]] = t;
    sptr.assign(s + 1, 0);
    sind.clear();
    std::vector<int> row;
    for (int t = 0; t < s; t++) {
      row.clear();
      const int v = sep_verts[t];
      for (int k = gptr[v]; k < gptr[v + 1]; k++) {
        const int w = gind[k];
        if (loc[w] >= 0) {
          if (loc[w] != t) row.push_back(loc[w]);
        } else {
          // length-two connection through the outside vertex w
          for (int k2 = gptr[w]; k2 < gptr[w + 1]; k2++) {
            const int u = gind[k2];
            if (loc[u] >= 0 && loc[u] != t) row.push_back(loc[u]);
          }
        }
      }
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
      sind.insert(sind.end(), row.begin(), row.end());
      sptr[t + 1] = static_cast<int>(sind.size());
    }
  }

  namespace {

    struct ClusterBisect {
      const int* sptr;
      const int* sind;
      int b;
      std::vector<int> level, new_to_old;
      ClusterTree tree;
      int next = 0;

      ClusterBisect(int s, const int* sp, const int* si, int bb)
          : sptr(sp), sind(si), b(bb), level(s, -2), new_to_old(s) {}

      int rec(std::vector<int>& vs) {
        if (static_cast<int>(vs.size()) <= b) {
          const int begin = next;
          for (int v : vs) new_to_old[next++] = v;
          return tree.add_leaf(begin, next);
        }
        Bisection bi = level_set_bisection(vs, sptr, sind, level,
                                           /*extract_sep=*/false);
        vs.clear();
        vs.shrink_to_fit();
        const int c0 = rec(bi.part0);
        const int c1 = rec(bi.part1);
        return tree.add_internal(c0, c1);
      }
    };

  }  // namespace

  ClusterTree reorder_separator(const std::vector<int>& sep_verts, int n,
                                const std::vector<int>& gptr,
                                const std::vector<int>& gind, int b,
                                std::vector<int>& new_to_old) {
    const int s = static_cast<int>(sep_verts.size());
    b = std::max(b, 1);
    if (s <= b) {
      new_to_old.resize(s);
      for (int t = 0; t < s; t++) new_to_old[t] = t;
      ClusterTree tr;
      tr.add_leaf(0, s);
      return tr;
    }
    std::vector<int> sptr, sind;
    separator_enriched_graph(sep_verts, n, gptr, gind, sptr, sind);
    ClusterBisect cb(s, sptr.data(), sind.data(), b);
    std::vector<int> all(s);
    for (int t = 0; t < s; t++) all[t] = t;
    cb.rec(all);
    assert(cb.next == s);
    new_to_old = std::move(cb.new_to_old);
    return cb.tree;
  }

  namespace {

    void reorder_rec(EliminationTree& t, const std::vector<char>& selected,
                     const std::vector<int>& gptr, const std::vector<int>& gind,
                     int b, Permutation& p, int i, int depth) {
      auto& nd = t.nodes[i];
#pragma omp task default(shared) untied \
    final(depth >= params::task_depth_cutoff - 1) mergeable
      if (nd.child0 >= 0)
        reorder_rec(t, selected, gptr, gind, b, p, nd.child0, depth + 1);
      if (nd.child1 >= 0)
        reorder_rec(t, selected, gptr, gind, b, p, nd.child1, depth + 1);
      if (selected[i] && nd.sep_size() > 0) {
        std::vector<int> verts(nd.sep_size());
        for (int c = nd.sep_begin; c < nd.sep_end; c++)
          verts[c - nd.sep_begin] = c;
        std::vector<int> n2o;
        nd.sep_clusters = reorder_separator(verts, p.size(), gptr, gind, b, n2o);
        for (int k = 0; k < nd.sep_size(); k++)
          p.iperm[nd.sep_begin + k] = nd.sep_begin + n2o[k];
      }
#pragma omp taskwait
    }

  }  // namespace

  Permutation reorder_tree_separators(EliminationTree& t,
                                      const std::vector<char>& selected,
                                      const std::vector<int>& gptr,
                                      const std::vector<int>& gind, int b) {
    Permutation p(t.n);
    if (!t.nodes.empty())
      run_task_root([&] {
        reorder_rec(t, selected, gptr, gind, b, p, t.root_id(), 0);
      });
    for (int k = 0; k < t.n; k++) p.perm[p.iperm[k]] = k;
    return p;
  }

}  // namespace hssmf
