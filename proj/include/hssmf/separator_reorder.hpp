#ifndef HSSMF_SEPARATOR_REORDER_HPP
#define HSSMF_SEPARATOR_REORDER_HPP

#include <vector>

#include "hssmf/cluster_tree.hpp"
#include "hssmf/elimination_tree.hpp"
#include "hssmf/ordering.hpp"

namespace hssmf {

  // adjacency among the separator vertices, enriched with length-two
  // connections u-v-w through vertices v outside the separator; local ids
  // follow the order of sep_verts, no self loops
  void separator_enriched_graph(const std::vector<int>& sep_verts, int n,
                                const std::vector<int>& gptr,
                                const std::vector<int>& gind,
                                std::vector<int>& sptr,
                                std::vector<int>& sind);

  // recursive bisection of the enriched separator graph into HSS leaf
  // clusters of at most b vertices; new_to_old receives the local
  // relabeling so cluster ranges are contiguous
  ClusterTree reorder_separator(const std::vector<int>& sep_verts, int n,
                                const std::vector<int>& gptr,
                                const std::vector<int>& gind, int b,
                                std::vector<int>& new_to_old);

  // reorders the separators of all flagged nodes (parallel over the tree),
  // storing each node's cluster tree; returns the composed relabeling on the
  // current index space (identity outside flagged separator ranges)
  Permutation reorder_tree_separators(EliminationTree& t,
                                      const std::vector<char>& selected,
                                      const std::vector<int>& gptr,
                                      const std::vector<int>& gind, int b);

}  // namespace hssmf

#endif
