#ifndef HSSMF_CLUSTER_TREE_HPP
#define HSSMF_CLUSTER_TREE_HPP

#include <cassert>
#include <vector>

namespace hssmf {

  // postordered binary tree of contiguous index ranges [begin, end).
  // children partition the parent range, left child first. nodes_ is stored
  // in postorder (children before parents, root last).
  class ClusterTree {
  public:
    struct Node {
      int begin = 0, end = 0;
      int child0 = -1, child1 = -1;
      int parent = -1;
      bool is_leaf() const { return child0 < 0; }
      int size() const { return end - begin; }
    };

    ClusterTree() = default;

    int add_leaf(int begin, int end) {
      nodes_.push_back({begin, end, -1, -1, -1});
      return static_cast<int>(nodes_.size()) - 1;
    }
    int add_internal(int c0, int c1) {
      assert(nodes_[c0].end == nodes_[c1].begin);
      const int id = static_cast<int>(nodes_.size());
      nodes_.push_back({nodes_[c0].begin, nodes_[c1].end, c0, c1, -1});
      nodes_[c0].parent = id;
      nodes_[c1].parent = id;
      return id;
    }

    // join two complete subtrees from another tree under a new root
    static ClusterTree join(const ClusterTree& a, const ClusterTree& b) {
      ClusterTree t;
      t.nodes_ = a.nodes_;
      const int off = static_cast<int>(t.nodes_.size());
      const int shift = a.root().end;
      for (auto n : b.nodes_) {
        n.begin += shift;
        n.end += shift;
        if (n.child0 >= 0) { n.child0 += off; n.child1 += off; }
        if (n.parent >= 0) n.parent += off;
        t.nodes_.push_back(n);
      }
      t.add_internal(off - 1, static_cast<int>(t.nodes_.size()) - 1);
      return t;
    }

    // balanced halving of [0, n) down to leaves of at most `leaf` indices
    static ClusterTree balanced(int n, int leaf) {
      assert(n >= 0 && leaf >= 1);
      ClusterTree t;
      if (n == 0) { t.add_leaf(0, 0); return t; }
      t.build_balanced(0, n, leaf);
      return t;
    }

    const Node& node(int i) const { return nodes_[i]; }
    int root_id() const { return static_cast<int>(nodes_.size()) - 1; }
    const Node& root() const { return nodes_.back(); }
    int size() const { return static_cast<int>(nodes_.size()); }
    bool empty() const { return nodes_.empty(); }
    int levels() const {
      int lmax = 0;
      std::vector<int> depth(nodes_.size(), 0);
      for (int i = root_id(); i >= 0; i--) {
        const auto& nd = nodes_[i];
        if (!nd.is_leaf()) {
          depth[nd.child0] = depth[i] + 1;
          depth[nd.child1] = depth[i] + 1;
        }
        lmax = std::max(lmax, depth[i]);
      }
      return lmax + 1;
    }
    int leaf_count() const {
      int c = 0;
      for (const auto& n : nodes_) c += n.is_leaf();
      return c;
    }

  private:
    std::vector<Node> nodes_;

    int build_balanced(int b, int e, int leaf) {
      if (e - b <= leaf) return add_leaf(b, e);
      const int mid = b + (e - b) / 2;
      const int c0 = build_balanced(b, mid, leaf);
      const int c1 = build_balanced(mid, e, leaf);
      return add_internal(c0, c1);
    }
  };

} // namespace hssmf

#endif
