#pragma once

// Hypergeometric over-representation of node classes in annotated sets.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "macnet/error.hpp"
#include "macnet/inference.hpp"

namespace macnet {

namespace detail {

inline double log_choose(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace detail

/// P(X = x) for X ~ Hypergeometric(universe, set_size, class_size).
inline double hypergeom_pmf(std::size_t x, std::size_t class_size, std::size_t set_size, std::size_t universe) {
  if (class_size > universe || set_size > universe)
    throw Error(Errc::InvalidCounts, "hypergeom_pmf: class_size and set_size must not exceed universe");
  if (x > class_size || x > set_size || class_size - x > universe - set_size) return 0.0;
  return std::exp(detail::log_choose(set_size, x) + detail::log_choose(universe - set_size, class_size - x) -
                  detail::log_choose(universe, class_size));
}

/// P(X >= overlap) for X ~ Hypergeometric(universe, set_size, class_size):
/// the chance that a random class of class_size items drawn from the universe
/// contains at least `overlap` of the set_size set members.
inline double hypergeom_upper(std::size_t overlap, std::size_t class_size, std::size_t set_size, std::size_t universe) {
  if (class_size > universe || set_size > universe || overlap > class_size)
    throw Error(Errc::InvalidCounts, "hypergeom_upper: need overlap <= class_size <= universe and set_size <= universe");
  const std::size_t hi = std::min(class_size, set_size);
  const std::size_t others = universe - set_size;
  const std::size_t lo = std::max(overlap, class_size > others ? class_size - others : std::size_t{0});
  if (lo > hi) return 0.0;
  if (lo == (class_size > others ? class_size - others : 0)) return 1.0;  // whole support
  const double denom = detail::log_choose(universe, class_size);
  std::vector<double> logs;
  logs.reserve(hi - lo + 1);
  for (std::size_t x = lo; x <= hi; ++x)
    logs.push_back(detail::log_choose(set_size, x) + detail::log_choose(others, class_size - x) - denom);
  const double top = *std::max_element(logs.begin(), logs.end());
  double s = 0.0;
  for (double l : logs) s += std::exp(l - top);
  return std::clamp(std::exp(top + std::log(s)), 0.0, 1.0);
}

struct GeneSet {
  std::string name;
  std::string description;
  std::vector<std::string> members;
};

struct GeneSetCollection {
  std::size_t universe_size = 0;
  std::vector<GeneSet> sets;
};

/// Reads tab-separated `name<TAB>description<TAB>member...` lines. Blank lines
/// are ignored and repeated members within a set are dropped.
inline std::vector<GeneSet> parse_gmt(std::istream& in, const std::string& source = "<gmt>") {
  std::vector<GeneSet> sets;
  std::set<std::string> names;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    const std::string where = source + ":" + std::to_string(lineno);
    if (fields.size() < 3 || fields[0].empty())
      throw Error(Errc::SchemaMismatch, where + ": expected name, description and at least one member");
    if (!names.insert(fields[0]).second) throw Error(Errc::SchemaMismatch, where + ": duplicate set '" + fields[0] + "'");
    GeneSet g{fields[0], fields[1], {}};
    std::set<std::string> seen;
    for (std::size_t c = 2; c < fields.size(); ++c)
      if (!fields[c].empty() && seen.insert(fields[c]).second) g.members.push_back(fields[c]);
    if (g.members.empty()) throw Error(Errc::SchemaMismatch, where + ": set '" + fields[0] + "' has no members");
    sets.push_back(std::move(g));
  }
  return sets;
}

struct EnrichmentResult {
  std::string class_label;
  std::string set_name;
  std::size_t overlap = 0;
  std::size_t class_size = 0;
  std::size_t set_size = 0;
  double p = 1.0;
  double q = 1.0;
  bool enriched = false;
};

struct EnrichmentReport {
  std::vector<EnrichmentResult> results;  // sorted by class label, then set name
  std::size_t annotated_nodes = 0;        // nodes present in at least one retained set
  std::vector<std::string> unannotated;   // node ids found in no retained set
  std::vector<std::string> excluded_sets;
  std::vector<std::string> warnings;
};

struct NodeLabel {
  std::string node_id;
  std::string label;
};

/// Tests each class against every retained set. Nodes are restricted to those
/// annotated in at least one retained set; sets whose name contains any of
/// the exclusion substrings are dropped; BH runs over the whole class x set
/// family. Classes named in `skip_labels` are not tested.
inline EnrichmentReport enrich(const std::vector<NodeLabel>& classes, const GeneSetCollection& gsc, double gamma,
                               const std::vector<std::string>& exclusions = {},
                               const std::set<std::string>& skip_labels = {"unclassified"}) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(Errc::InvalidGamma, "enrich: gamma must lie in (0, 1)");
  EnrichmentReport rep;

  std::vector<const GeneSet*> sets;
  for (const auto& s : gsc.sets) {
    const bool drop = std::any_of(exclusions.begin(), exclusions.end(), [&](const std::string& x) {
      return !x.empty() && s.name.find(x) != std::string::npos;
    });
    if (drop)
      rep.excluded_sets.push_back(s.name);
    else
      sets.push_back(&s);
  }
  std::sort(sets.begin(), sets.end(), [](const GeneSet* a, const GeneSet* b) { return a->name < b->name; });
  std::sort(rep.excluded_sets.begin(), rep.excluded_sets.end());

  std::set<std::string> annotated_ids;
  for (const GeneSet* s : sets) {
    if (s->members.size() > gsc.universe_size)
      throw Error(Errc::InvalidCounts, "enrich: set '" + s->name + "' is larger than the universe");
    annotated_ids.insert(s->members.begin(), s->members.end());
  }

  std::map<std::string, std::set<std::string>> members_by_class;
  std::set<std::string> seen_nodes;
  for (const auto& c : classes) {
    if (!seen_nodes.insert(c.node_id).second) throw Error(Errc::DuplicateNodeId, "enrich: node '" + c.node_id + "' listed twice");
    if (skip_labels.count(c.label)) continue;
    auto& bucket = members_by_class[c.label];
    if (annotated_ids.count(c.node_id)) {
      bucket.insert(c.node_id);
      ++rep.annotated_nodes;
    } else {
      rep.unannotated.push_back(c.node_id);
    }
  }
  if (rep.annotated_nodes > gsc.universe_size)
    throw Error(Errc::InvalidCounts, "enrich: more annotated nodes than the universe size");
  if (rep.annotated_nodes == 0 && !classes.empty())
    rep.warnings.push_back("IdentifierMismatch: no node identifier occurs in any retained set");

  for (const auto& [label, members] : members_by_class) {
    if (members.empty()) {
      rep.warnings.push_back("EmptyClass: class '" + label + "' has no annotated nodes; skipped");
      continue;
    }
    for (const GeneSet* s : sets) {
      EnrichmentResult r;
      r.class_label = label;
      r.set_name = s->name;
      r.class_size = members.size();
      r.set_size = s->members.size();
      for (const auto& m : s->members) r.overlap += members.count(m);
      r.p = hypergeom_upper(r.overlap, r.class_size, r.set_size, gsc.universe_size);
      rep.results.push_back(std::move(r));
    }
  }
  if (!rep.results.empty()) {
    std::vector<double> p;
    for (const auto& r : rep.results) p.push_back(r.p);
    const FdrDecision d = bh_fdr(p, gamma);
    for (std::size_t t = 0; t < rep.results.size(); ++t) rep.results[t].q = d.q[t];
    for (std::size_t t : d.rejected) rep.results[t].enriched = true;
  }
  return rep;
}

}  // namespace macnet
