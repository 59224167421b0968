// macnet: infer, summarize, classify and annotate multi-attribute
// association networks, and run the two-attribute power study.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "macnet/macnet.hpp"

namespace {

using namespace macnet;

void fail_json(const std::string& name, int category, const std::string& message) {
  json j{{"error", name}, {"exit_code", category}, {"message", message}};
  std::cerr << j.dump() << '\n';
}

void check_unit_interval(double v, const char* flag) {
  if (!(v > 0.0 && v < 1.0)) throw Error(Errc::Usage, std::string(flag) + " must lie strictly between 0 and 1");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// ---------------------------------------------------------------------------

struct InferArgs {
  std::vector<std::string> files;
  std::string method = "cca";
  std::string attributes;
  double fdr = 0.05;
  std::string pvalue_mode = "formula";
  std::uint64_t seed = 20240601;
  bool no_homogeneity = false;
  std::string out = ".";
};

int run_infer(const InferArgs& a) {
  check_unit_interval(a.fdr, "--fdr");
  std::vector<fs::path> files(a.files.begin(), a.files.end());
  AttributeDataset data = ingest(files);
  if (!a.attributes.empty()) data.select(split_list(a.attributes));
  InferenceOptions opt;
  opt.pvalue_mode = parse_pvalue_mode(a.pvalue_mode);
  opt.mc_seed = a.seed;
  opt.homogeneity_test = !a.no_homogeneity;
  const InferredNetwork net = infer_network(data, parse_method(a.method), a.fdr, opt);
  const fs::path out(a.out);
  write_file_atomic(out / "edges.csv", edges_csv(net));
  json meta = meta_json(net);
  meta["inputs"] = a.files;
  if (opt.pvalue_mode == PValueMode::MonteCarlo) meta["mc_seed"] = a.seed;
  write_file_atomic(out / "meta.json", dump_json(meta));
  for (const auto& s : net.skipped)
    std::cerr << "warning: skipped pair " << net.node_ids[s.i] << "-" << net.node_ids[s.j] << ": " << s.reason << '\n';
  std::cout << net.edges.size() << " edges among " << net.node_ids.size() << " nodes (" << net.tests.size()
            << " pairs tested, " << net.skipped.size() << " skipped)\n";
  return 0;
}

// ---------------------------------------------------------------------------

std::optional<fs::path> sibling_meta(const fs::path& edges, const std::vector<std::string>& metas, std::size_t idx) {
  if (idx < metas.size()) return fs::path(metas[idx]);
  const fs::path named = edges.parent_path() / (edges.stem().string() + ".meta.json");
  if (fs::exists(named)) return named;
  const fs::path plain = edges.parent_path() / "meta.json";
  if (fs::exists(plain)) return plain;
  return std::nullopt;
}

std::vector<std::string> read_node_list(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(Errc::Usage, "cannot open node list '" + p.string() + "'");
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

/// Re-indexes a network onto a given node list.
InferredNetwork with_nodes(const InferredNetwork& net, const std::vector<std::string>& ids) {
  std::map<std::string, std::size_t> index;
  for (std::size_t v = 0; v < ids.size(); ++v) index.emplace(ids[v], v);
  InferredNetwork out = net;
  out.node_ids = ids;
  for (auto& e : out.edges) {
    const auto a = index.find(net.node_ids[e.i]), b = index.find(net.node_ids[e.j]);
    if (a == index.end() || b == index.end())
      throw Error(Errc::NodeSetMismatch, "edge node missing from the node list");
    e.i = std::min(a->second, b->second);
    e.j = std::max(a->second, b->second);
  }
  return out;
}

InferredNetwork load_network(const fs::path& edges, const std::optional<fs::path>& meta,
                             const std::vector<std::string>& nodes) {
  InferredNetwork net = read_network(edges, meta);
  if (!nodes.empty()) {
    if (meta) {
      const std::set<std::string> a(net.node_ids.begin(), net.node_ids.end()), b(nodes.begin(), nodes.end());
      if (a != b) throw Error(Errc::NodeSetMismatch, "node list differs from the metadata of '" + edges.string() + "'");
    }
    net = with_nodes(net, nodes);
  }
  return net;
}

struct NetstatArgs {
  std::vector<std::string> edges;
  std::vector<std::string> metas;
  std::string nodes;
  std::string out = ".";
};

int run_netstat(const NetstatArgs& a) {
  std::vector<std::string> nodes;
  if (!a.nodes.empty()) nodes = read_node_list(a.nodes);
  std::vector<InferredNetwork> nets;
  std::vector<bool> had_meta;
  for (std::size_t f = 0; f < a.edges.size(); ++f) {
    const auto meta = sibling_meta(a.edges[f], a.metas, f);
    had_meta.push_back(meta.has_value());
    nets.push_back(load_network(a.edges[f], meta, nodes));
  }
  // Without metadata or a node list, compare over the union of identifiers.
  if (nodes.empty() && nets.size() > 1 && std::find(had_meta.begin(), had_meta.end(), false) != had_meta.end()) {
    std::set<std::string> all;
    for (const auto& n : nets) all.insert(n.node_ids.begin(), n.node_ids.end());
    const std::vector<std::string> ids(all.begin(), all.end());
    for (auto& n : nets) n = with_nodes(n, ids);
    std::cerr << "warning: node sets taken as the union of edge-list identifiers; isolated nodes are not counted\n";
  } else if (nodes.empty() && nets.size() == 1 && !had_meta[0]) {
    std::cerr << "warning: no metadata or --nodes given; isolated nodes are not counted\n";
  }

  json summaries = json::array();
  for (std::size_t f = 0; f < nets.size(); ++f) {
    json s = summary_json(nets[f], summary(nets[f]));
    s["file"] = a.edges[f];
    summaries.push_back(s);
  }
  const fs::path out(a.out);
  write_file_atomic(out / "summary.json", dump_json(nets.size() == 1 ? summaries[0] : summaries));
  if (nets.size() > 1) {
    std::vector<NamedJaccard> rows;
    for (std::size_t x = 0; x < nets.size(); ++x)
      for (std::size_t y = x + 1; y < nets.size(); ++y)
        rows.push_back({a.edges[x], a.edges[y], jaccard(nets[x], nets[y]), nets[x].edges.size(), nets[y].edges.size()});
    write_file_atomic(out / "jaccard.csv", jaccard_csv(rows));
    for (const auto& r : rows)
      std::printf("%s vs %s: jaccard %.2f (%zu shared)\n", r.a.c_str(), r.b.c_str(), r.result.similarity, r.result.shared);
  }
  for (std::size_t f = 0; f < nets.size(); ++f) {
    const auto& s = summaries[f];
    std::printf("%s: %zu nodes, %zu edges, density %.4f, LCC %zu, mean degree %.2f\n", a.edges[f].c_str(),
                s["n_nodes"].get<std::size_t>(), s["n_edges"].get<std::size_t>(), s["density"].get<double>(),
                s["lcc_size"].get<std::size_t>(), s["avg_degree"].get<double>());
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ClassifyArgs {
  std::string edges;
  std::string meta;
  double threshold = kDefaultThreshold;
  std::string histogram_attribute;
  std::string out = ".";
};

int run_classify(const ClassifyArgs& a) {
  check_unit_interval(a.threshold, "--threshold");
  const auto meta = sibling_meta(a.edges, a.meta.empty() ? std::vector<std::string>{} : std::vector<std::string>{a.meta}, 0);
  if (!meta) std::cerr << "warning: no metadata found; attribute names default to attr1..attrK\n";
  const InferredNetwork net = read_network(a.edges, meta);
  const NetworkClasses cls = classify_network(net, a.threshold);
  std::size_t hist_attr = net.attribute_names.empty() ? 0 : net.attribute_names.size() - 1;
  if (!a.histogram_attribute.empty()) {
    const auto it = std::find(net.attribute_names.begin(), net.attribute_names.end(), a.histogram_attribute);
    if (it == net.attribute_names.end()) throw Error(Errc::Usage, "unknown attribute '" + a.histogram_attribute + "'");
    hist_attr = static_cast<std::size_t>(it - net.attribute_names.begin());
  }
  const fs::path out(a.out);
  write_file_atomic(out / "edge_classes.csv", edge_classes_csv(net, cls));
  write_file_atomic(out / "node_classes.csv", node_classes_csv(net, cls));
  write_file_atomic(out / "simplex.csv", simplex_csv(net, cls));
  if (!net.attribute_names.empty())
    write_file_atomic(out / "contrib_histogram.csv",
                      histogram_csv(contribution_histogram(cls.edges, hist_attr), net.attribute_names[hist_attr]));
  std::map<std::string, std::size_t> counts;
  for (const auto& n : cls.nodes) ++counts[label_name(n, net.attribute_names)];
  for (const auto& [label, c] : counts) std::printf("%s: %zu nodes\n", label.c_str(), c);
  return 0;
}

// ---------------------------------------------------------------------------

struct EnrichArgs {
  std::string classes;
  std::string gmt;
  std::size_t universe = 0;
  double fdr = 0.05;
  std::string exclude;
  std::string out = ".";
};

int run_enrich(const EnrichArgs& a) {
  check_unit_interval(a.fdr, "--fdr");
  std::ifstream cin_(a.classes);
  if (!cin_) throw Error(Errc::Usage, "cannot open '" + a.classes + "'");
  const auto labels = parse_node_classes_csv(cin_, a.classes);
  std::ifstream gin(a.gmt);
  if (!gin) throw Error(Errc::Usage, "cannot open '" + a.gmt + "'");
  GeneSetCollection gsc{a.universe, parse_gmt(gin, a.gmt)};
  const EnrichmentReport rep = enrich(labels, gsc, a.fdr, split_list(a.exclude));
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
  if (!rep.unannotated.empty())
    std::cerr << "warning: " << rep.unannotated.size() << " node(s) are in no retained set and were left out\n";
  write_file_atomic(fs::path(a.out) / "enrichment.csv", enrichment_csv(rep));
  std::map<std::string, std::size_t> enriched;
  for (const auto& r : rep.results) enriched[r.class_label] += r.enriched;
  for (const auto& [label, c] : enriched) std::printf("%s: %zu enriched set(s)\n", label.c_str(), c);
  return 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  double rho1 = 0.3, rho2 = 0.1;
  std::string slice = "b=0.2r";
  std::string grid;
  double step = 0.05;
  std::size_t n = 50, reps = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::string scenarios = "1,2,3,4,5";
  bool two_sided = false;
  std::optional<double> rho_z;
  std::string pvalue_mode = "formula";
  std::string out = ".";
};

std::vector<GridPoint> parse_grid(const std::string& s) {
  std::vector<GridPoint> g;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto colon = item.find(':');
    double r = 0, b = 0;
    if (colon == std::string::npos || !detail::parse_double(item.substr(0, colon), r) ||
        !detail::parse_double(item.substr(colon + 1), b))
      throw Error(Errc::Usage, "--grid expects r:b pairs separated by ';'");
    g.push_back({r, b});
  }
  return g;
}

std::vector<GridPoint> parse_slice(const std::string& s, double rho1, double rho2, double step) {
  // Accepts b=<f>r or r=<f>b.
  if (s.size() >= 4 && s[1] == '=' && (s[0] == 'b' || s[0] == 'r')) {
    const char other = s[0] == 'b' ? 'r' : 'b';
    if (s.back() == other) {
      double f = 0;
      if (detail::parse_double(s.substr(2, s.size() - 3), f))
        return slice_grid(s[0] == 'b' ? SliceKind::BFromR : SliceKind::RFromB, f, rho1, rho2, step);
    }
  }
  throw Error(Errc::Usage, "--slice expects b=<factor>r or r=<factor>b, e.g. b=0.2r");
}

int run_simulate(const SimulateArgs& a) {
  check_unit_interval(a.alpha, "--alpha");
  if (!(a.step > 0.0 && a.step <= 1.0)) throw Error(Errc::Usage, "--step must lie in (0, 1]");
  PowerStudySpec spec;
  spec.rho1 = a.rho1;
  spec.rho2 = a.rho2;
  spec.grid = a.grid.empty() ? parse_slice(a.slice, a.rho1, a.rho2, a.step) : parse_grid(a.grid);
  spec.n = a.n;
  spec.reps = a.reps;
  spec.alpha = a.alpha;
  spec.seed = a.seed;
  spec.scenarios.clear();
  for (const auto& s : split_list(a.scenarios)) {
    double v = 0;
    if (!detail::parse_double(s, v) || v != std::floor(v)) throw Error(Errc::Usage, "--scenarios expects integers 1-5");
    spec.scenarios.push_back(static_cast<int>(v));
  }
  spec.sidedness = a.two_sided ? Sidedness::TwoSided : Sidedness::Greater;
  spec.rho_z = a.rho_z;
  spec.pvalue_mode = parse_pvalue_mode(a.pvalue_mode);
  const PowerResult res = power_study(spec);
  write_file_atomic(fs::path(a.out) / "power.csv", power_csv(spec, res));
  std::cout << res.cells.size() << " cells over " << spec.grid.size() << " grid points\n";
  return 0;
}

struct CalibrateArgs {
  std::size_t draws = ExtremeTailSampler::kDefaultDraws;
  std::uint64_t seed = 20240601;
  std::string out = ".";
};

int run_calibrate(const CalibrateArgs& a) {
  const ExtremeTailSampler sampler(a.draws, a.seed);
  const auto rows = wformula_calibration(sampler);
  write_file_atomic(fs::path(a.out) / "wformula_calibration.csv", calibration_csv(rows));
  std::printf("%6s %5s %10s %10s %10s\n", "rho_z", "c", "formula", "density", "montecarlo");
  for (const auto& r : rows)
    std::printf("%6.2f %5.2f %10.6f %10.6f %10.6f\n", r.rho_z, r.c, r.formula, r.formula_density, r.monte_carlo);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-attribute association network inference"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  InferArgs ia;
  auto* infer = app.add_subcommand("infer", "Infer a network from per-attribute CSV files");
  infer->add_option("files", ia.files, "Attribute CSVs (node_id,s1..sn), one per attribute")->required()->check(CLI::ExistingFile);
  infer->add_option("--method", ia.method, "pearson, max, min or cca")->check(CLI::IsMember({"pearson", "max", "min", "cca"}));
  infer->add_option("--attributes", ia.attributes, "Comma-separated attribute subset, by file stem");
  infer->add_option("--fdr", ia.fdr, "FDR level gamma");
  infer->add_option("--pvalue-mode", ia.pvalue_mode, "formula or montecarlo (max/min tails)")
      ->check(CLI::IsMember({"formula", "montecarlo"}));
  infer->add_option("--seed", ia.seed, "Seed for Monte Carlo tails");
  infer->add_flag("--no-homogeneity", ia.no_homogeneity, "Skip the per-pair homogeneity test");
  infer->add_option("--out", ia.out, "Output directory");

  NetstatArgs na;
  auto* netstat = app.add_subcommand("netstat", "Summary statistics and pairwise Jaccard similarity of edge lists");
  netstat->add_option("edges", na.edges, "edges.csv files")->required()->check(CLI::ExistingFile);
  netstat->add_option("--meta", na.metas, "meta.json per edge list (default: sibling <stem>.meta.json or meta.json)");
  netstat->add_option("--nodes", na.nodes, "File listing node ids, one per line")->check(CLI::ExistingFile);
  netstat->add_option("--out", na.out, "Output directory");

  ClassifyArgs ca;
  auto* classify = app.add_subcommand("classify", "Classify edges and nodes by attribute contribution");
  classify->add_option("edges", ca.edges, "edges.csv from a cca run")->required()->check(CLI::ExistingFile);
  classify->add_option("--meta", ca.meta, "meta.json (default: sibling)");
  classify->add_option("--threshold", ca.threshold, "Contribution threshold T");
  classify->add_option("--histogram-attribute", ca.histogram_attribute, "Attribute for the histogram (default: last)");
  classify->add_option("--out", ca.out, "Output directory");

  EnrichArgs ea;
  auto* enrich_cmd = app.add_subcommand("enrich", "Hypergeometric enrichment of node classes");
  enrich_cmd->add_option("--classes", ea.classes, "node_classes.csv")->required()->check(CLI::ExistingFile);
  enrich_cmd->add_option("--gmt", ea.gmt, "Tab-separated set file")->required()->check(CLI::ExistingFile);
  enrich_cmd->add_option("--universe", ea.universe, "Universe size")->required();
  enrich_cmd->add_option("--fdr", ea.fdr, "FDR level gamma");
  enrich_cmd->add_option("--exclude", ea.exclude, "Comma-separated substrings; matching set names are dropped");
  enrich_cmd->add_option("--out", ea.out, "Output directory");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Power study for the two-attribute model");
  simulate->add_option("--rho1", sa.rho1, "Between-node correlation of attribute 1");
  simulate->add_option("--rho2", sa.rho2, "Between-node correlation of attribute 2");
  simulate->add_option("--slice", sa.slice, "b=<f>r or r=<f>b");
  simulate->add_option("--grid", sa.grid, "Explicit points r:b;r:b (overrides --slice)");
  simulate->add_option("--step", sa.step, "Slice spacing");
  simulate->add_option("--n", sa.n, "Samples per replicate");
  simulate->add_option("--reps", sa.reps, "Replicates per grid point");
  simulate->add_option("--alpha", sa.alpha, "Per-test level");
  simulate->add_option("--seed", sa.seed, "Base seed");
  simulate->add_option("--scenarios", sa.scenarios, "Subset of 1,2,3,4,5");
  simulate->add_flag("--two-sided", sa.two_sided, "Two-sided alternatives");
  simulate->add_option("--rho-z", sa.rho_z, "Plug-in correlation of the two z statistics");
  simulate->add_option("--pvalue-mode", sa.pvalue_mode, "Tail mode for scenarios 3 and 4")->check(CLI::IsMember({"formula", "montecarlo"}));
  simulate->add_option("--out", sa.out, "Output directory");

  CalibrateArgs cb;
  auto* calibrate = app.add_subcommand("calibrate", "W-formula against Monte Carlo tails");
  calibrate->add_option("--draws", cb.draws, "Monte Carlo draws");
  calibrate->add_option("--seed", cb.seed, "Monte Carlo seed");
  calibrate->add_option("--out", cb.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail_json("Usage", 1, e.what());
    return 1;
  }

  try {
    if (*infer) return run_infer(ia);
    if (*netstat) return run_netstat(na);
    if (*classify) return run_classify(ca);
    if (*enrich_cmd) return run_enrich(ea);
    if (*simulate) return run_simulate(sa);
    if (*calibrate) return run_calibrate(cb);
  } catch (const Error& e) {
    const int code = static_cast<int>(e.category());
    fail_json(errc_name(e.code()), code, e.what());
    return code;
  } catch (const fs::filesystem_error& e) {
    fail_json("IoError", 2, e.what());
    return 2;
  } catch (const std::exception& e) {
    fail_json("InternalError", 3, e.what());
    return 3;
  }
  return 1;
}
