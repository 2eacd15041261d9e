#ifndef HSSMF_ELIMINATION_TREE_HPP
#define HSSMF_ELIMINATION_TREE_HPP

#include <vector>

#include "hssmf/cluster_tree.hpp"
#include "hssmf/ordering.hpp"
#include "hssmf/sparse_matrix.hpp"

namespace hssmf {

  // one supernode of the elimination tree: a contiguous separator range of
  // fully-summed variables plus the sorted global indices of its border
  struct FrontNode {
    int sep_begin = 0, sep_end = 0;
    std::vector<int> upd;
    int child0 = -1, child1 = -1, parent = -1;
    int level = 0;  // depth from root (root = 0)
    // optional HSS leaf partition of the separator range (local indices)
    ClusterTree sep_clusters;

    bool is_leaf() const { return child0 < 0 && child1 < 0; }
    int sep_size() const { return sep_end - sep_begin; }
    int upd_size() const { return static_cast<int>(upd.size()); }
    int front_size() const { return sep_size() + upd_size(); }
  };

  // binary elimination tree over supernodes, postorder (children before
  // parents, root last); separator ranges of all nodes partition [0,n)
  class EliminationTree {
  public:
    std::vector<FrontNode> nodes;
    int n = 0;

    int size() const { return static_cast<int>(nodes.size()); }
    int root_id() const { return size() - 1; }
    FrontNode& root() { return nodes.back(); }
    const FrontNode& root() const { return nodes.back(); }
    const FrontNode& node(int i) const { return nodes[i]; }
    FrontNode& node(int i) { return nodes[i]; }

    static EliminationTree from_separators(const SeparatorTree& st, int n);
    void compute_levels();
    int depth() const;
  };

  // parent array per the classic fill-path characterization: parent(j) is the
  // smallest i > j with a (structural) nonzero l_ij in the Cholesky factor of
  // the symmetrized pattern; -1 marks roots
  std::vector<int> scalar_etree(int n, const std::vector<int>& gptr,
                                const std::vector<int>& gind);

  // supernodal tree from the scalar elimination tree of a permuted pattern:
  // maximal chains of consecutive vertices collapse into one node, multiple
  // children are joined pairwise under empty synthetic nodes so the tree is
  // binary, forests gain an empty synthetic root
  EliminationTree build_etree_amalgamated(int n, const std::vector<int>& gptr,
                                          const std::vector<int>& gind);

  // fills upd index sets bottom-up: adjacency of the separator columns
  // restricted to indices past the separator, merged with the children's upd
  // sets minus the node's own separator range
  void symbolic_factorization(int n, const std::vector<int>& gptr,
                              const std::vector<int>& gind,
                              EliminationTree& t);

  template<typename scalar_t>
  void symbolic_factorization(const SparseMatrix<scalar_t>& a,
                              EliminationTree& t) {
    std::vector<int> gptr, gind;
    a.symmetric_graph(gptr, gind);
    symbolic_factorization(a.size(), gptr, gind, t);
  }

  template<typename scalar_t>
  EliminationTree build_etree_amalgamated(const SparseMatrix<scalar_t>& a,
                                          const Permutation& p) {
    std::vector<int> gptr, gind;
    a.permuted(p.perm).symmetric_graph(gptr, gind);
    return build_etree_amalgamated(a.size(), gptr, gind);
  }

}  // namespace hssmf

#endif
