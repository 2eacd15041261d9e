#include "hssmf/ordering.hpp"

#include <algorithm>
#include <cassert>
#include <cstdlib>

namespace hssmf {

  namespace {

    // breadth-first level structure over the members of a subset, restarting
    // on the next unvisited member (in subset order) so disconnected pieces
    // stack along the level axis. members are marked -1 in `level` on entry.
    // returns the last vertex dequeued.
    int bfs_levels(const std::vector<int>& verts, const int* gptr,
                   const int* gind, std::vector<int>& level, int start,
                   std::vector<int>& queue) {
      queue.clear();
      queue.push_back(start);
      level[start] = 0;
      int last = start, maxlev = 0;
      std::size_t scan = 0;
      for (std::size_t head = 0; head < verts.size();) {
        for (; head < queue.size(); head++) {
          const int v = queue[head];
          last = v;
          maxlev = std::max(maxlev, level[v]);
          for (int k = gptr[v]; k < gptr[v + 1]; k++) {
            const int w = gind[k];
            if (level[w] == -1) {
              level[w] = level[v] + 1;
              queue.push_back(w);
            }
          }
        }
        if (queue.size() == verts.size()) break;
        // disconnected: continue from the first unvisited member
        for (; level[verts[scan]] != -1; scan++) {}
        level[verts[scan]] = maxlev + 1;
        queue.push_back(verts[scan]);
      }
      return last;
    }

  }  // namespace

  Bisection level_set_bisection(const std::vector<int>& verts, const int* gptr,
                                const int* gind, std::vector<int>& level,
                                bool extract_sep) {
    Bisection b;
    const int tot = static_cast<int>(verts.size());
    if (tot < 2) {
      b.part0 = verts;
      for (int v : verts) level[v] = -2;
      return b;
    }
    for (int v : verts) level[v] = -1;
    std::vector<int> queue;
    queue.reserve(tot);
    // two sweeps: the endpoint of the first is a pseudo-peripheral start
    const int far = bfs_levels(verts, gptr, gind, level, verts[0], queue);
    for (int v : verts) level[v] = -1;
    bfs_levels(verts, gptr, gind, level, far, queue);
    int maxlev = 0;
    for (int v : verts) maxlev = std::max(maxlev, level[v]);
    std::vector<int> count(maxlev + 1, 0);
    for (int v : verts) count[level[v]]++;
    int cut = 1;
    if (extract_sep) {
      // first level whose prefix reaches half, kept below the top level so
      // part1 stays nonempty; a clean component boundary yields an empty cut
      int cum = count[0];
      while (cut < maxlev && 2 * cum < tot) cum += count[cut++];
    } else {
      // plain split: the level boundary nearest to half (ties toward the
      // lower cut)
      int cum = count[0], best = std::abs(2 * cum - tot);
      for (int c = 2, cu = cum; c <= maxlev; c++) {
        cu += count[c - 1];
        if (std::abs(2 * cu - tot) < best) {
          best = std::abs(2 * cu - tot);
          cut = c;
        }
      }
    }
    for (int v : verts)
      (level[v] < cut ? b.part0 : b.part1).push_back(v);
    if (extract_sep) {
      // vertex separator: the smaller boundary side of the edge cut
      // (ties keep the part0 side)
      std::vector<int> b0, b1;
      for (int v : b.part0) {
        for (int k = gptr[v]; k < gptr[v + 1]; k++)
          if (level[gind[k]] >= cut) {
            b0.push_back(v);
            break;
          }
      }
      for (int v : b.part1) {
        for (int k = gptr[v]; k < gptr[v + 1]; k++) {
          const int lw = level[gind[k]];
          if (lw >= 0 && lw < cut) {
            b1.push_back(v);
            break;
          }
        }
      }
      const bool take0 = b0.size() <= b1.size();
      b.sep = take0 ? std::move(b0) : std::move(b1);
      auto& side = take0 ? b.part0 : b.part1;
      // sep vertices are flagged via level = -3, then filtered out
      for (int v : b.sep) level[v] = -3;
      side.erase(std::remove_if(side.begin(), side.end(),
                                [&](int v) { return level[v] == -3; }),
                 side.end());
    }
    for (int v : verts) level[v] = -2;
    return b;
  }

  namespace {

    struct GeometricNd {
      const GridGeometry& g;
      int leaf;
      std::vector<int> iperm;
      std::vector<Separator> tree;
      int next = 0;

      GeometricNd(const GridGeometry& geom, int lf) : g(geom), leaf(lf) {
        iperm.resize(static_cast<std::size_t>(g.dims[0]) * g.dims[1] *
                     g.dims[2]);
      }

      void emit_box(const int lo[3], const int sz[3]) {
        for (int l = lo[2]; l < lo[2] + sz[2]; l++)
          for (int j = lo[1]; j < lo[1] + sz[1]; j++)
            for (int i = lo[0]; i < lo[0] + sz[0]; i++)
              iperm[next++] = g.vertex(i, j, l);
      }

      int rec(const int lo[3], const int sz[3]) {
        const long nv = static_cast<long>(sz[0]) * sz[1] * sz[2];
        int d = 0;
        for (int a = 1; a < g.ndims; a++)
          if (sz[a] > sz[d]) d = a;
        if (nv <= leaf || sz[d] < 3) {
          const int b = next;
          emit_box(lo, sz);
          tree.push_back({b, next, -1, -1, -1});
          return static_cast<int>(tree.size()) - 1;
        }
        const int m = lo[d] + sz[d] / 2;
        int lo1[3] = {lo[0], lo[1], lo[2]}, sz1[3] = {sz[0], sz[1], sz[2]};
        sz1[d] = sz[d] / 2;
        const int c0 = rec(lo1, sz1);
        lo1[d] = m + 1;
        sz1[d] = sz[d] - sz[d] / 2 - 1;
        const int c1 = rec(lo1, sz1);
        const int b = next;
        lo1[d] = m;
        sz1[d] = 1;
        emit_box(lo1, sz1);
        const int id = static_cast<int>(tree.size());
        tree.push_back({b, next, c0, c1, -1});
        tree[c0].parent = tree[c1].parent = id;
        return id;
      }
    };

    struct GraphNd {
      const int* gptr;
      const int* gind;
      int leaf;
      std::vector<int> iperm, level;
      std::vector<Separator> tree;
      int next = 0;

      GraphNd(int n, const int* gp, const int* gi, int lf)
          : gptr(gp), gind(gi), leaf(lf), iperm(n), level(n, -2) {}

      void emit(const std::vector<int>& verts) {
        for (int v : verts) iperm[next++] = v;
      }

      int rec(std::vector<int>& verts) {
        if (static_cast<int>(verts.size()) <= leaf) {
          const int b = next;
          emit(verts);
          tree.push_back({b, next, -1, -1, -1});
          return static_cast<int>(tree.size()) - 1;
        }
        Bisection bi =
            level_set_bisection(verts, gptr, gind, level, /*extract_sep=*/true);
        verts.clear();
        verts.shrink_to_fit();
        int c0 = -1, c1 = -1;
        if (!bi.part0.empty()) c0 = rec(bi.part0);
        if (!bi.part1.empty()) c1 = rec(bi.part1);
        if (c0 < 0) std::swap(c0, c1);
        const int b = next;
        emit(bi.sep);
        const int id = static_cast<int>(tree.size());
        tree.push_back({b, next, c0, c1, -1});
        if (c0 >= 0) tree[c0].parent = id;
        if (c1 >= 0) tree[c1].parent = id;
        return id;
      }
    };

  }  // namespace

  SeparatorTree nested_dissection_geometric(const GridGeometry& g, int leaf,
                                            Permutation& p) {
    GeometricNd nd(g, std::max(leaf, 1));
    const int lo[3] = {0, 0, 0};
    nd.rec(lo, g.dims.data());
    p.set_from_iperm(std::move(nd.iperm));
    SeparatorTree t;
    t.nodes = std::move(nd.tree);
    return t;
  }

  SeparatorTree nested_dissection_graph(int n, const std::vector<int>& gptr,
                                        const std::vector<int>& gind, int leaf,
                                        Permutation& p) {
    GraphNd nd(n, gptr.data(), gind.data(), std::max(leaf, 1));
    std::vector<int> all(n);
    for (int i = 0; i < n; i++) all[i] = i;
    nd.rec(all);
    assert(nd.next == n);
    p.set_from_iperm(std::move(nd.iperm));
    SeparatorTree t;
    t.nodes = std::move(nd.tree);
    return t;
  }

}  // namespace hssmf
