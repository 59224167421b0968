#pragma once

// Edge and node classes derived from canonical-weight contributions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "macnet/error.hpp"
#include "macnet/matrix.hpp"
#include "macnet/network.hpp"

namespace macnet {

inline constexpr double kDefaultThreshold = 0.25;
inline constexpr double kContribTolerance = 1e-9;

enum class EdgeKind { Dominated, Mixed };
enum class NodeKind { Dominated, Mixed, Unclassified };

struct EdgeClass {
  std::size_t i = 0, j = 0;
  Vector contrib;
  EdgeKind kind = EdgeKind::Mixed;
  std::size_t attribute = 0;  // dominating attribute when kind == Dominated
  double threshold = kDefaultThreshold;

  bool operator==(const EdgeClass&) const = default;
};

struct NodeClass {
  std::size_t node = 0;
  Vector proportions;  // one per attribute, then mixed; all zero for degree 0
  NodeKind kind = NodeKind::Unclassified;
  std::size_t attribute = 0;
  std::size_t degree = 0;
};

inline std::string label_name(EdgeKind kind, std::size_t attribute, const std::vector<std::string>& names) {
  return kind == EdgeKind::Mixed ? "mixed" : names.at(attribute);
}

inline std::string label_name(const NodeClass& c, const std::vector<std::string>& names) {
  switch (c.kind) {
    case NodeKind::Dominated: return names.at(c.attribute);
    case NodeKind::Mixed: return "mixed";
    case NodeKind::Unclassified: return "unclassified";
  }
  return "?";
}

/// An edge is dominated by its largest contributor l when contrib[l] >= 1 - t
/// and mixed otherwise. For two attributes and t < 1/2 this is the triangle
/// rule: attribute 1 dominates when contrib[2] <= t, attribute 2 when
/// contrib[2] >= 1 - t.
inline EdgeClass classify_edge(std::span<const double> contrib, double t) {
  if (!(t > 0.0 && t < 1.0)) throw Error(Errc::InvalidThreshold, "classify_edge: threshold must lie in (0, 1)");
  if (contrib.empty()) throw Error(Errc::UnnormalizedContrib, "classify_edge: empty contribution vector");
  double sum = 0.0;
  for (double c : contrib) {
    if (!(c >= -kContribTolerance)) throw Error(Errc::UnnormalizedContrib, "classify_edge: negative contribution");
    sum += c;
  }
  if (std::abs(sum - 1.0) > kContribTolerance)
    throw Error(Errc::UnnormalizedContrib, "classify_edge: contributions sum to " + std::to_string(sum));
  EdgeClass e;
  e.contrib.assign(contrib.begin(), contrib.end());
  e.threshold = t;
  const auto top = static_cast<std::size_t>(std::max_element(contrib.begin(), contrib.end()) - contrib.begin());
  if (contrib[top] >= 1.0 - t) {
    e.kind = EdgeKind::Dominated;
    e.attribute = top;
  }
  return e;
}

/// Majority class of the incident edges. Ties go to mixed, then to the lowest
/// attribute index.
inline NodeClass classify_node(std::span<const EdgeClass> incident, std::size_t k) {
  NodeClass n;
  n.proportions.assign(k + 1, 0.0);
  n.degree = incident.size();
  if (incident.empty()) return n;
  std::vector<std::size_t> counts(k + 1, 0);
  for (const auto& e : incident) {
    if (e.kind == EdgeKind::Mixed) {
      ++counts[k];
    } else {
      if (e.attribute >= k) throw Error(Errc::LengthMismatch, "classify_node: attribute index out of range");
      ++counts[e.attribute];
    }
  }
  for (std::size_t c = 0; c <= k; ++c)
    n.proportions[c] = static_cast<double>(counts[c]) / static_cast<double>(incident.size());
  std::size_t best = k;
  for (std::size_t c = 0; c < k; ++c)
    if (counts[c] > counts[best] || (best != k && counts[c] == counts[best] && c < best)) best = c;
  if (best == k) {
    n.kind = NodeKind::Mixed;
  } else {
    n.kind = NodeKind::Dominated;
    n.attribute = best;
  }
  return n;
}

struct NetworkClasses {
  std::vector<EdgeClass> edges;
  std::vector<NodeClass> nodes;
};

inline NetworkClasses classify_network(const InferredNetwork& net, double t = kDefaultThreshold) {
  const std::size_t k = net.attribute_names.size();
  NetworkClasses out;
  std::vector<std::vector<EdgeClass>> incident(net.node_ids.size());
  for (const auto& e : net.edges) {
    if (e.contrib.size() != k)
      throw Error(Errc::UnnormalizedContrib, "classify: edge " + net.node_ids[e.i] + "-" + net.node_ids[e.j] +
                                                 " has no contribution vector (classification needs method cca)");
    EdgeClass c = classify_edge(e.contrib, t);
    c.i = e.i;
    c.j = e.j;
    incident[e.i].push_back(c);
    incident[e.j].push_back(c);
    out.edges.push_back(std::move(c));
  }
  for (std::size_t v = 0; v < net.node_ids.size(); ++v) {
    NodeClass c = classify_node(incident[v], k);
    c.node = v;
    out.nodes.push_back(std::move(c));
  }
  return out;
}

/// Counts of values in equal-width bins over [0, 1]; 1.0 falls in the last bin.
inline std::vector<std::size_t> contribution_histogram(std::span<const double> values, std::size_t bins = 50) {
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) {
    const double x = std::clamp(v, 0.0, 1.0);
    counts[std::min(bins - 1, static_cast<std::size_t>(x * static_cast<double>(bins)))]++;
  }
  return counts;
}

inline std::vector<std::size_t> contribution_histogram(const std::vector<EdgeClass>& edges, std::size_t attribute,
                                                       std::size_t bins = 50) {
  std::vector<double> v;
  v.reserve(edges.size());
  for (const auto& e : edges) v.push_back(e.contrib.at(attribute));
  return contribution_histogram(v, bins);
}

}  // namespace macnet
