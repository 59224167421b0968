#pragma once

// File formats: attribute CSV ingestion, edge lists, run metadata and the
// tabular outputs of classification, enrichment and simulation.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "macnet/classify.hpp"
#include "macnet/enrichment.hpp"
#include "macnet/error.hpp"
#include "macnet/network.hpp"
#include "macnet/simulation.hpp"

namespace macnet {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

/// 17 significant digits, enough for an exact round trip.
inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string location(const std::string& source, std::size_t line, std::size_t column) {
  return source + ":" + std::to_string(line) + ":" + std::to_string(column);
}

/// Strict decimal parse of a whole cell; NaN and infinities are rejected.
inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Usage, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// Writes to a temporary sibling and renames it over the target.
inline void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Usage, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error(Errc::Usage, "failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Attribute tables

/// One attribute for every node: values(v, s) is sample s of node v.
struct AttributeTable {
  std::string name;
  std::vector<std::string> node_ids;
  Matrix values;
};

inline AttributeTable parse_attribute_csv(std::istream& in, const std::string& source, const std::string& name) {
  AttributeTable t;
  t.name = name;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  std::vector<double> data;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (width == 0) {
      if (detail::trim(cells[0]) != "node_id")
        throw Error(Errc::SchemaMismatch, detail::location(source, lineno, 1) + ": header must start with 'node_id'");
      if (cells.size() < 2) throw Error(Errc::SchemaMismatch, detail::location(source, lineno, 2) + ": no sample columns");
      width = cells.size();
      continue;
    }
    if (cells.size() != width)
      throw Error(Errc::SchemaMismatch, detail::location(source, lineno, std::min(cells.size(), width) + 1) + ": expected " +
                                            std::to_string(width) + " cells, found " + std::to_string(cells.size()));
    std::string id = detail::trim(cells[0]);
    if (id.empty()) throw Error(Errc::SchemaMismatch, detail::location(source, lineno, 1) + ": empty node_id");
    if (!ids.insert(id).second)
      throw Error(Errc::DuplicateNodeId, detail::location(source, lineno, 1) + ": node '" + id + "' appears twice");
    for (std::size_t c = 1; c < width; ++c) {
      double v = 0.0;
      const std::string cell = detail::trim(cells[c]);
      if (!detail::parse_double(cell, v))
        throw Error(Errc::NonNumericCell, detail::location(source, lineno, c + 1) + ": '" + cell + "' is not a finite number");
      data.push_back(v);
    }
    t.node_ids.push_back(std::move(id));
  }
  if (width == 0) throw Error(Errc::SchemaMismatch, source + ": missing header");
  if (t.node_ids.empty()) throw Error(Errc::SchemaMismatch, source + ": no data rows");
  t.values = Matrix(t.node_ids.size(), width - 1, std::move(data));
  return t;
}

inline AttributeTable read_attribute_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Usage, "cannot open attribute file '" + path.string() + "'");
  return parse_attribute_csv(in, path.string(), path.stem().string());
}

/// Aligns attribute tables into a dataset, in table order, using the node
/// order of the first table.
inline AttributeDataset assemble_dataset(const std::vector<AttributeTable>& tables) {
  if (tables.empty()) throw Error(Errc::Usage, "no attribute files given");
  const AttributeTable& first = tables.front();
  std::map<std::string, std::size_t> index;
  for (std::size_t v = 0; v < first.node_ids.size(); ++v) index.emplace(first.node_ids[v], v);
  AttributeDataset d;
  d.node_ids = first.node_ids;
  const std::size_t n = first.values.cols();
  std::set<std::string> names;
  for (const auto& t : tables) {
    if (!names.insert(t.name).second) throw Error(Errc::SchemaMismatch, "attribute '" + t.name + "' given twice");
    d.attribute_names.push_back(t.name);
    if (t.values.cols() != n)
      throw Error(Errc::SchemaMismatch, "attribute '" + t.name + "' has " + std::to_string(t.values.cols()) +
                                            " samples, expected " + std::to_string(n));
    for (const auto& id : t.node_ids)
      if (!index.count(id)) throw Error(Errc::SchemaMismatch, "node '" + id + "' of attribute '" + t.name + "' is missing from '" + first.name + "'");
    if (t.node_ids.size() != first.node_ids.size()) {
      std::set<std::string> have(t.node_ids.begin(), t.node_ids.end());
      for (const auto& id : first.node_ids)
        if (!have.count(id)) throw Error(Errc::SchemaMismatch, "node '" + id + "' is missing from attribute '" + t.name + "'");
    }
  }
  d.samples.assign(d.node_ids.size(), Matrix(n, tables.size()));
  for (std::size_t a = 0; a < tables.size(); ++a)
    for (std::size_t r = 0; r < tables[a].node_ids.size(); ++r) {
      const std::size_t v = index.at(tables[a].node_ids[r]);
      for (std::size_t s = 0; s < n; ++s) d.samples[v](s, a) = tables[a].values(r, s);
    }
  return d;
}

inline AttributeDataset ingest(const std::vector<fs::path>& files) {
  std::vector<AttributeTable> tables;
  for (const auto& f : files) tables.push_back(read_attribute_csv(f));
  return assemble_dataset(tables);
}

// ---------------------------------------------------------------------------
// Edge lists and run metadata

inline std::string edges_csv(const InferredNetwork& net) {
  const std::size_t k = net.attribute_names.size();
  std::string out = "node_i,node_j,method,similarity,statistic,df,p,q";
  for (std::size_t l = 1; l <= k; ++l) out += ",contrib_" + std::to_string(l);
  out += '\n';
  for (const auto& e : net.edges) {
    out += net.node_ids[e.i] + ',' + net.node_ids[e.j] + ',' + std::string(method_name(e.method)) + ',' +
           fmt_double(e.similarity) + ',' + fmt_double(e.statistic) + ',' + (e.df ? fmt_double(*e.df) : "") + ',' +
           fmt_double(e.p) + ',' + fmt_double(e.q);
    for (std::size_t l = 0; l < k; ++l) out += ',' + (l < e.contrib.size() ? fmt_double(e.contrib[l]) : std::string());
    out += '\n';
  }
  return out;
}

inline json meta_json(const InferredNetwork& net) {
  json m;
  m["gamma"] = net.gamma;
  m["n"] = net.n;
  m["method"] = std::string(method_name(net.method));
  m["pvalue_mode"] = net.pvalue_mode == PValueMode::Formula ? "formula" : "montecarlo";
  m["sidedness"] = "two-sided";
  m["node_ids"] = net.node_ids;
  m["attributes"] = net.attribute_names;
  m["tested_pairs"] = net.tests.size();
  m["edges"] = net.edges.size();
  json skipped = json::array();
  for (const auto& s : net.skipped)
    skipped.push_back({{"node_i", net.node_ids[s.i]}, {"node_j", net.node_ids[s.j]}, {"reason", s.reason}});
  m["warning_count"] = net.skipped.size();
  m["skipped_pairs"] = skipped;
  json floored = json::array();
  for (const auto& f : net.floored)
    floored.push_back({{"node_i", net.node_ids[f.i]}, {"node_j", net.node_ids[f.j]}, {"max_eigenvalue_change", f.max_change}});
  m["floored_pairs"] = floored;
  m["homogeneity"] = {{"tested_pairs", net.homogeneity.tested},
                      {"rejected_pairs", net.homogeneity.rejected},
                      {"rejection_fraction", net.homogeneity.rejection_fraction()},
                      {"level", net.homogeneity.level},
                      {"df", net.homogeneity.df},
                      {"df_formula", "k(k+1)/2 + k(k-1)/2"},
                      {"note", "reported only; the general canonical solver is used for every pair"}};
  m["avg_correlation_definition"] = "mean |similarity| over declared edges";
  return m;
}

inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

/// Re-reads an edge list. Node identifiers and run parameters come from the
/// metadata when given; otherwise the node set is the identifiers in the
/// edge list, in order of appearance.
inline InferredNetwork parse_edges_csv(std::istream& in, const std::string& source, const json* meta = nullptr) {
  InferredNetwork net;
  std::map<std::string, std::size_t> index;
  if (meta) {
    net.node_ids = meta->at("node_ids").get<std::vector<std::string>>();
    net.attribute_names = meta->at("attributes").get<std::vector<std::string>>();
    net.gamma = meta->at("gamma").get<double>();
    net.n = meta->at("n").get<std::size_t>();
    net.method = parse_method(meta->at("method").get<std::string>());
    net.pvalue_mode = parse_pvalue_mode(meta->at("pvalue_mode").get<std::string>());
    for (std::size_t v = 0; v < net.node_ids.size(); ++v) index.emplace(net.node_ids[v], v);
  }
  auto node = [&](const std::string& id, std::size_t lineno) {
    const auto it = index.find(id);
    if (it != index.end()) return it->second;
    if (meta) throw Error(Errc::NodeSetMismatch, detail::location(source, lineno, 1) + ": node '" + id + "' is not in the metadata");
    index.emplace(id, net.node_ids.size());
    net.node_ids.push_back(id);
    return net.node_ids.size() - 1;
  };
  std::string line;
  std::size_t lineno = 0, width = 0, k = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (width == 0) {
      if (cells.size() < 8 || cells[0] != "node_i" || cells[1] != "node_j" || cells[7] != "q")
        throw Error(Errc::SchemaMismatch, detail::location(source, lineno, 1) + ": not an edge list header");
      width = cells.size();
      k = width - 8;
      if (!meta)
        for (std::size_t l = 1; l <= k; ++l) net.attribute_names.push_back("attr" + std::to_string(l));
      continue;
    }
    if (cells.size() != width)
      throw Error(Errc::SchemaMismatch, detail::location(source, lineno, 1) + ": expected " + std::to_string(width) + " cells");
    EdgeRecord e;
    e.i = node(cells[0], lineno);
    e.j = node(cells[1], lineno);
    if (e.i > e.j) std::swap(e.i, e.j);
    e.method = parse_method(cells[2]);
    e.n = net.n;
    auto num = [&](std::size_t c) {
      double v = 0.0;
      if (!detail::parse_double(cells[c], v))
        throw Error(Errc::NonNumericCell, detail::location(source, lineno, c + 1) + ": '" + cells[c] + "' is not a number");
      return v;
    };
    e.similarity = num(3);
    e.statistic = num(4);
    if (!cells[5].empty()) e.df = num(5);
    e.p = num(6);
    e.q = num(7);
    for (std::size_t l = 0; l < k; ++l)
      if (!cells[8 + l].empty()) e.contrib.push_back(num(8 + l));
    if (!meta) net.method = e.method;
    net.edges.push_back(std::move(e));
  }
  if (width == 0) throw Error(Errc::SchemaMismatch, source + ": missing header");
  return net;
}

inline InferredNetwork read_network(const fs::path& edges, const std::optional<fs::path>& meta = std::nullopt) {
  std::ifstream in(edges, std::ios::binary);
  if (!in) throw Error(Errc::Usage, "cannot open edge list '" + edges.string() + "'");
  if (meta) {
    json m;
    try {
      m = json::parse(detail::read_text(*meta));
    } catch (const json::exception& e) {
      throw Error(Errc::SchemaMismatch, meta->string() + ": " + e.what());
    }
    return parse_edges_csv(in, edges.string(), &m);
  }
  return parse_edges_csv(in, edges.string());
}

// ---------------------------------------------------------------------------
// Summaries

inline json summary_json(const InferredNetwork& net, const NetworkSummary& s) {
  json j;
  j["n_nodes"] = s.n_nodes;
  j["n_edges"] = s.n_edges;
  j["density"] = s.density;
  j["lcc_size"] = s.lcc_size;
  j["avg_abs_similarity"] = s.avg_abs_similarity;
  j["avg_degree"] = s.avg_degree;
  j["avg_clustering"] = s.avg_clustering;
  j["avg_betweenness"] = s.avg_betweenness;
  json nodes = json::array();
  for (std::size_t v = 0; v < s.n_nodes; ++v)
    nodes.push_back({{"node_id", net.node_ids[v]},
                     {"degree", s.degree[v]},
                     {"clustering", s.clustering[v]},
                     {"betweenness", s.betweenness[v]}});
  j["nodes"] = nodes;
  return j;
}

struct NamedJaccard {
  std::string a, b;
  JaccardResult result;
  std::size_t edges_a = 0, edges_b = 0;
};

inline std::string jaccard_csv(const std::vector<NamedJaccard>& rows) {
  std::string out = "network_a,network_b,edges_a,edges_b,shared,jaccard\n";
  for (const auto& r : rows)
    out += r.a + ',' + r.b + ',' + std::to_string(r.edges_a) + ',' + std::to_string(r.edges_b) + ',' +
           std::to_string(r.result.shared) + ',' + fmt_double(r.result.similarity) + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Classification outputs

inline std::string edge_classes_csv(const InferredNetwork& net, const NetworkClasses& cls) {
  std::string out = "node_i,node_j,label";
  for (const auto& a : net.attribute_names) out += ",contrib_" + a;
  out += '\n';
  for (const auto& e : cls.edges) {
    out += net.node_ids[e.i] + ',' + net.node_ids[e.j] + ',' + label_name(e.kind, e.attribute, net.attribute_names);
    for (double c : e.contrib) out += ',' + fmt_double(c);
    out += '\n';
  }
  return out;
}

inline std::string node_classes_csv(const InferredNetwork& net, const NetworkClasses& cls) {
  std::string out = "node_id,label";
  for (const auto& a : net.attribute_names) out += ",p_" + a;
  out += ",p_mixed\n";
  for (const auto& n : cls.nodes) {
    out += net.node_ids[n.node] + ',' + label_name(n, net.attribute_names);
    for (double p : n.proportions) out += ',' + fmt_double(p);
    out += '\n';
  }
  return out;
}

/// Barycentric coordinates; with two attributes also the planar position in
/// a triangle with attribute 1 at (0, 0), attribute 2 at (1, 0) and mixed at
/// the apex.
inline std::string simplex_csv(const InferredNetwork& net, const NetworkClasses& cls) {
  const bool planar = net.attribute_names.size() == 2;
  std::string out = "node_id";
  for (const auto& a : net.attribute_names) out += ",p_" + a;
  out += ",p_mixed";
  if (planar) out += ",x,y";
  out += '\n';
  for (const auto& n : cls.nodes) {
    if (n.degree == 0) continue;
    out += net.node_ids[n.node];
    for (double p : n.proportions) out += ',' + fmt_double(p);
    if (planar) {
      const double x = n.proportions[1] + 0.5 * n.proportions[2];
      const double y = std::sqrt(3.0) / 2.0 * n.proportions[2];
      out += ',' + fmt_double(x) + ',' + fmt_double(y);
    }
    out += '\n';
  }
  return out;
}

inline std::string histogram_csv(const std::vector<std::size_t>& counts, const std::string& attribute) {
  std::string out = "bin_lower,bin_upper,count,attribute\n";
  const double w = 1.0 / static_cast<double>(counts.size());
  for (std::size_t b = 0; b < counts.size(); ++b)
    out += fmt_double(b * w) + ',' + fmt_double((b + 1) * w) + ',' + std::to_string(counts[b]) + ',' + attribute + '\n';
  return out;
}

/// Reads a node-class CSV (node_id,label,...) as written by the classifier.
inline std::vector<NodeLabel> parse_node_classes_csv(std::istream& in, const std::string& source) {
  std::vector<NodeLabel> out;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (!header) {
      if (cells.size() < 2 || cells[0] != "node_id" || cells[1] != "label")
        throw Error(Errc::SchemaMismatch, detail::location(source, lineno, 1) + ": expected header node_id,label,...");
      header = true;
      continue;
    }
    if (cells.size() < 2) throw Error(Errc::SchemaMismatch, detail::location(source, lineno, 1) + ": missing label");
    out.push_back({cells[0], cells[1]});
  }
  if (!header) throw Error(Errc::SchemaMismatch, source + ": missing header");
  return out;
}

// ---------------------------------------------------------------------------
// Enrichment and simulation outputs

inline std::string enrichment_csv(const EnrichmentReport& rep) {
  std::string out = "class,set,overlap,M,class_size,p,q,enriched\n";
  for (const auto& r : rep.results)
    out += r.class_label + ',' + r.set_name + ',' + std::to_string(r.overlap) + ',' + std::to_string(r.set_size) + ',' +
           std::to_string(r.class_size) + ',' + fmt_double(r.p) + ',' + fmt_double(r.q) + ',' + (r.enriched ? "1" : "0") +
           '\n';
  return out;
}

inline std::string power_csv(const PowerStudySpec& spec, const PowerResult& res) {
  std::string out = "r,b,rho1,rho2,n,reps,alpha,scenario,power,mc_se\n";
  for (const auto& c : res.cells)
    out += fmt_double(c.point.r) + ',' + fmt_double(c.point.b) + ',' + fmt_double(spec.rho1) + ',' + fmt_double(spec.rho2) +
           ',' + std::to_string(spec.n) + ',' + std::to_string(spec.reps) + ',' + fmt_double(spec.alpha) + ',' +
           std::to_string(c.scenario) + ',' + fmt_double(c.power) + ',' + fmt_double(c.mc_se) + '\n';
  return out;
}

inline std::string calibration_csv(const std::vector<CalibrationRow>& rows) {
  std::string out = "rho_z,c,formula_cdf,formula_density,monte_carlo,mc_se,independence,deviation_cdf,deviation_density\n";
  for (const auto& r : rows)
    out += fmt_double(r.rho_z) + ',' + fmt_double(r.c) + ',' + fmt_double(r.formula) + ',' + fmt_double(r.formula_density) +
           ',' + fmt_double(r.monte_carlo) + ',' + fmt_double(r.mc_se) + ',' +
           (r.independence ? fmt_double(*r.independence) : "") + ',' + fmt_double(r.formula - r.monte_carlo) + ',' +
           fmt_double(r.formula_density - r.monte_carlo) + '\n';
  return out;
}

}  // namespace macnet
