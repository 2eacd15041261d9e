#include "hssmf/elimination_tree.hpp"

#include <algorithm>
#include <cassert>

#include "hssmf/task_parallel.hpp"

namespace hssmf {

  EliminationTree EliminationTree::from_separators(const SeparatorTree& st,
                                                   int n) {
    EliminationTree t;
    t.n = n;
    t.nodes.resize(st.size());
    for (int i = 0; i < st.size(); i++) {
      const auto& s = st.nodes[i];
      auto& f = t.nodes[i];
      f.sep_begin = s.sep_begin;
      f.sep_end = s.sep_end;
      f.child0 = s.child0;
      f.child1 = s.child1;
      f.parent = s.parent;
    }
    t.compute_levels();
    return t;
  }

  void EliminationTree::compute_levels() {
    if (nodes.empty()) return;
    nodes.back().level = 0;
    for (int i = root_id(); i >= 0; i--) {
      if (nodes[i].child0 >= 0) nodes[nodes[i].child0].level = nodes[i].level + 1;
      if (nodes[i].child1 >= 0) nodes[nodes[i].child1].level = nodes[i].level + 1;
    }
  }

  int EliminationTree::depth() const {
    int d = 0;
    for (const auto& f : nodes) d = std::max(d, f.level + 1);
    return d;
  }

  std::vector<int> scalar_etree(int n, const std::vector<int>& gptr,
                                const std::vector<int>& gind) {
    std::vector<int> parent(n, -1), anc(n, -1);
    for (int j = 0; j < n; j++) {
      for (int k = gptr[j]; k < gptr[j + 1]; k++) {
        int r = gind[k];
        if (r >= j) continue;
        // climb r's ancestor chain, compressing onto j
        while (true) {
          const int a = anc[r];
          if (a == j) break;
          anc[r] = j;
          if (a == -1) {
            parent[r] = j;
            break;
          }
          r = a;
        }
      }
    }
    return parent;
  }

  EliminationTree build_etree_amalgamated(int n, const std::vector<int>& gptr,
                                          const std::vector<int>& gind) {
    EliminationTree t;
    t.n = n;
    if (n == 0) {
      t.nodes.push_back({});
      return t;
    }
    const auto parent = scalar_etree(n, gptr, gind);
    // maximal chains of consecutive parents collapse into supernodes
    struct Tmp {
      int sb, se, c0 = -1, c1 = -1;
    };
    std::vector<Tmp> tn;
    std::vector<int> snode_of(n);
    int b = 0;
    for (int i = 0; i < n; i++) {
      snode_of[i] = static_cast<int>(tn.size());
      if (parent[i] != i + 1) {
        tn.push_back({b, i + 1});
        b = i + 1;
      }
    }
    const int nsup = static_cast<int>(tn.size());
    std::vector<std::vector<int>> kids(nsup);
    std::vector<int> roots;
    for (int s = 0; s < nsup; s++) {
      const int pp = parent[tn[s].se - 1];
      if (pp < 0)
        roots.push_back(s);
      else
        kids[snode_of[pp]].push_back(s);
    }
    // fold child lists pairwise under empty synthetic nodes so every node
    // has at most two children; a forest folds down to a single root
    auto fold = [&](std::vector<int>& list, std::size_t down_to) {
      while (list.size() > down_to) {
        const int c0 = list[0], c1 = list[1];
        const int id = static_cast<int>(tn.size());
        tn.push_back({tn[c1].se, tn[c1].se, c0, c1});
        list.erase(list.begin(), list.begin() + 2);
        list.insert(list.begin(), id);
      }
    };
    for (int s = 0; s < nsup; s++) fold(kids[s], 2);
    fold(roots, 1);
    const int root = roots[0];
    for (int s = 0; s < nsup; s++) {
      if (kids[s].empty()) continue;
      tn[s].c0 = kids[s][0];
      if (kids[s].size() > 1) tn[s].c1 = kids[s][1];
    }
    // renumber in postorder, root last (iterative to keep the stack flat)
    std::vector<int> order, stack{root};
    order.reserve(tn.size());
    while (!stack.empty()) {
      const int s = stack.back();
      stack.pop_back();
      order.push_back(s);
      if (tn[s].c0 >= 0) stack.push_back(tn[s].c0);
      if (tn[s].c1 >= 0) stack.push_back(tn[s].c1);
    }
    std::reverse(order.begin(), order.end());
    std::vector<int> newid(tn.size());
    for (std::size_t k = 0; k < order.size(); k++) newid[order[k]] = static_cast<int>(k);
    t.nodes.resize(tn.size());
    for (std::size_t k = 0; k < order.size(); k++) {
      const auto& s = tn[order[k]];
      auto& f = t.nodes[k];
      f.sep_begin = s.sb;
      f.sep_end = s.se;
      f.child0 = s.c0 < 0 ? -1 : newid[s.c0];
      f.child1 = s.c1 < 0 ? -1 : newid[s.c1];
      if (f.child0 >= 0) t.nodes[f.child0].parent = static_cast<int>(k);
      if (f.child1 >= 0) t.nodes[f.child1].parent = static_cast<int>(k);
    }
    t.compute_levels();
    return t;
  }

  namespace {

    void symbolic_rec(EliminationTree& t, const int* gptr, const int* gind,
                      int i, int depth) {
      auto& nd = t.nodes[i];
#pragma omp task default(shared) untied \
    final(depth >= params::task_depth_cutoff - 1) mergeable
      if (nd.child0 >= 0) symbolic_rec(t, gptr, gind, nd.child0, depth + 1);
      if (nd.child1 >= 0) symbolic_rec(t, gptr, gind, nd.child1, depth + 1);
#pragma omp taskwait
      std::vector<int> adj;
      for (int c = nd.sep_begin; c < nd.sep_end; c++)
        for (int k = gptr[c]; k < gptr[c + 1]; k++)
          if (gind[k] >= nd.sep_end) adj.push_back(gind[k]);
      std::sort(adj.begin(), adj.end());
      adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
      auto tail = [&](int c) {
        std::vector<int> v;
        if (c >= 0) {
          const auto& u = t.nodes[c].upd;
          v.assign(std::lower_bound(u.begin(), u.end(), nd.sep_end), u.end());
        }
        return v;
      };
      const auto u0 = tail(nd.child0), u1 = tail(nd.child1);
      std::vector<int> m01(u0.size() + u1.size());
      std::merge(u0.begin(), u0.end(), u1.begin(), u1.end(), m01.begin());
      nd.upd.resize(m01.size() + adj.size());
      std::merge(m01.begin(), m01.end(), adj.begin(), adj.end(),
                 nd.upd.begin());
      nd.upd.erase(std::unique(nd.upd.begin(), nd.upd.end()), nd.upd.end());
    }

  }  // namespace

  void symbolic_factorization(int n, const std::vector<int>& gptr,
                              const std::vector<int>& gind,
                              EliminationTree& t) {
    assert(t.n == n);
    (void)n;
    if (t.nodes.empty()) return;
    run_task_root(
        [&] { symbolic_rec(t, gptr.data(), gind.data(), t.root_id(), 0); });
  }

}  // namespace hssmf
