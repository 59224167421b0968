#pragma once

// Unweighted undirected graphs and the summary statistics reported for
// inferred networks.

#include <algorithm>
#include <cstddef>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "macnet/error.hpp"

namespace macnet {

class Graph {
 public:
  explicit Graph(std::size_t nodes = 0) : adj_(nodes) {}

  /// Adds {u, v}. Self-loops and repeated edges are ignored; returns whether
  /// the edge was new.
  bool add_edge(std::size_t u, std::size_t v) {
    if (u >= adj_.size() || v >= adj_.size()) throw Error(Errc::LengthMismatch, "Graph::add_edge: node out of range");
    if (u == v || has_edge(u, v)) return false;
    adj_[u].insert(std::upper_bound(adj_[u].begin(), adj_[u].end(), v), v);
    adj_[v].insert(std::upper_bound(adj_[v].begin(), adj_[v].end(), u), u);
    ++edges_;
    return true;
  }

  bool has_edge(std::size_t u, std::size_t v) const {
    return std::binary_search(adj_[u].begin(), adj_[u].end(), v);
  }

  std::size_t node_count() const noexcept { return adj_.size(); }
  std::size_t edge_count() const noexcept { return edges_; }
  const std::vector<std::size_t>& neighbors(std::size_t u) const { return adj_[u]; }
  std::size_t degree(std::size_t u) const { return adj_[u].size(); }

  /// Edges as (u, v) with u < v in lexicographic order.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(edges_);
    for (std::size_t u = 0; u < adj_.size(); ++u)
      for (std::size_t v : adj_[u])
        if (u < v) out.emplace_back(u, v);
    return out;
  }

 private:
  std::vector<std::vector<std::size_t>> adj_;
  std::size_t edges_ = 0;
};

inline std::vector<std::size_t> degree_distribution(const Graph& g) {
  std::vector<std::size_t> d(g.node_count());
  for (std::size_t u = 0; u < d.size(); ++u) d[u] = g.degree(u);
  return d;
}

inline double density(std::size_t nodes, std::size_t edges) {
  if (nodes < 2) return 0.0;
  return 2.0 * static_cast<double>(edges) / (static_cast<double>(nodes) * static_cast<double>(nodes - 1));
}

/// Local clustering coefficient; nodes of degree < 2 get 0.
inline std::vector<double> clustering_values(const Graph& g) {
  std::vector<double> c(g.node_count(), 0.0);
  for (std::size_t u = 0; u < g.node_count(); ++u) {
    const auto& nb = g.neighbors(u);
    const std::size_t d = nb.size();
    if (d < 2) continue;
    std::size_t links = 0;
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = a + 1; b < d; ++b) links += g.has_edge(nb[a], nb[b]);
    c[u] = 2.0 * static_cast<double>(links) / (static_cast<double>(d) * static_cast<double>(d - 1));
  }
  return c;
}

/// Brandes betweenness over unweighted shortest paths, normalized by the
/// number of node pairs excluding the node itself, (N-1)(N-2)/2.
inline std::vector<double> betweenness_values(const Graph& g) {
  const std::size_t n = g.node_count();
  std::vector<double> bc(n, 0.0);
  if (n < 3) return bc;
  std::vector<std::size_t> order;
  std::vector<std::vector<std::size_t>> pred(n);
  std::vector<double> sigma(n), delta(n);
  std::vector<long> dist(n);
  for (std::size_t s = 0; s < n; ++s) {
    order.clear();
    for (auto& p : pred) p.clear();
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    sigma[s] = 1.0;
    dist[s] = 0;
    std::queue<std::size_t> q;
    q.push(s);
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop();
      order.push_back(v);
      for (std::size_t w : g.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          pred[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::size_t w = *it;
      for (std::size_t v : pred[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) bc[w] += delta[w];
    }
  }
  // Each unordered pair was counted from both ends.
  const double norm = static_cast<double>(n - 1) * static_cast<double>(n - 2);
  for (double& b : bc) b /= norm;
  return bc;
}

/// Component index per node, numbered in order of first appearance.
inline std::vector<std::size_t> connected_components(const Graph& g) {
  const std::size_t n = g.node_count();
  constexpr std::size_t unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> comp(n, unset);
  std::size_t next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] != unset) continue;
    std::queue<std::size_t> q;
    q.push(s);
    comp[s] = next;
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop();
      for (std::size_t w : g.neighbors(v))
        if (comp[w] == unset) {
          comp[w] = next;
          q.push(w);
        }
    }
    ++next;
  }
  return comp;
}

inline std::size_t largest_connected_component(const Graph& g) {
  const auto comp = connected_components(g);
  std::vector<std::size_t> sizes;
  for (std::size_t c : comp) {
    if (c >= sizes.size()) sizes.resize(c + 1, 0);
    ++sizes[c];
  }
  return sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
}

struct JaccardResult {
  double similarity = 0.0;
  std::size_t shared = 0;
};

/// Jaccard index of two edge sets given by counts. Two empty sets are
/// identical and score 1.
inline JaccardResult jaccard_from_counts(std::size_t edges_a, std::size_t edges_b, std::size_t shared) {
  if (shared > std::min(edges_a, edges_b)) throw Error(Errc::InvalidCounts, "jaccard: shared exceeds an edge count");
  const std::size_t uni = edges_a + edges_b - shared;
  return {uni == 0 ? 1.0 : static_cast<double>(shared) / static_cast<double>(uni), shared};
}

inline JaccardResult jaccard(const Graph& a, const Graph& b) {
  if (a.node_count() != b.node_count()) throw Error(Errc::NodeSetMismatch, "jaccard: graphs have different node counts");
  std::size_t shared = 0;
  for (const auto& [u, v] : a.edges()) shared += b.has_edge(u, v);
  return jaccard_from_counts(a.edge_count(), b.edge_count(), shared);
}

}  // namespace macnet
