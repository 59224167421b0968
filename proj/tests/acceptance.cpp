// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "macnet/macnet.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"
#include "test_support.hpp"

namespace {

using namespace macnet;
using testing::Rng;
using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s %2d %-28s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void closed_form_equivalence() {
  const auto t0 = Clock::now();
  std::size_t valid = 0;
  double worst = 0.0;
  for (int i = -100; i <= 100; ++i)
    for (int j = -100; j <= 100; ++j) {
      const K2Params p{i / 100.0, j / 100.0, 0.3, 0.1};
      if (std::abs(p.r) >= 1.0 || !k2_domain(p)) continue;
      ++valid;
      const double numeric = canonical_corr_homogeneous(p.sigma_m(), p.sigma_c()).rho_c;
      worst = std::max(worst, std::abs(k2_closed_form(p) - numeric));
    }
  const double secs = seconds_since(t0);
  report(1, "closed-form equivalence", valid >= 10000 && worst <= 1e-10 && secs < 5.0,
         fmt("points=%zu max_err=%.2e time=%.2fs", valid, worst, secs));
}

void domain_equivalence() {
  std::size_t disagreements = 0, banded = 0, checked = 0;
  for (int i = 0; i < 181; ++i)
    for (int j = 0; j < 181; ++j) {
      const K2Params p{-0.9 + 0.01 * i, -0.9 + 0.01 * j, 0.3, 0.1};
      const double margin = std::min(p.a1() - std::abs(p.b - p.r), p.a2() - std::abs(p.b + p.r));
      if (std::abs(margin) <= 1e-9) {
        ++banded;
        continue;
      }
      ++checked;
      disagreements += k2_domain(p) != testing::sylvester_pd(testing::k2_sigma(p.r, p.b, p.rho1, p.rho2));
    }
  report(2, "domain equivalence", disagreements == 0,
         fmt("checked=%zu band=%zu disagreements=%zu", checked, banded, disagreements));
}

void cca_optimality() {
  Rng rng(101);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto s = PairCorrelationStructure::from_joint(testing::random_correlation(rng, 4, 6));
    const double got = canonical_corr(s).rho_c;
    worst = std::max(worst, std::abs(got - testing::grid_search_cca_k2(s.sigma_ii(), s.sigma_jj(), s.sigma_ij(), 720)));
  }
  report(3, "cca optimality", worst <= 1e-4, fmt("structures=200 max_err=%.2e", worst));
}

void homogeneous_weights() {
  Rng rng(103);
  double worst_w = 0.0, worst_rho = 0.0;
  int degenerate = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 2 + t % 3;
    const auto [sm, sc] = testing::random_homogeneous(rng, k);
    const CanonicalSolution g = canonical_corr(PairCorrelationStructure::homogeneous(sm, sc));
    const CanonicalSolution h = canonical_corr_homogeneous(sm, sc);
    worst_rho = std::max(worst_rho, std::abs(g.rho_c - h.rho_c));
    if (g.degenerate) {
      ++degenerate;
      continue;
    }
    const double sign = dot(g.w_i, g.w_j) >= 0.0 ? 1.0 : -1.0;
    for (std::size_t l = 0; l < k; ++l) worst_w = std::max(worst_w, std::abs(g.w_i[l] - sign * g.w_j[l]));
  }
  report(4, "homogeneous weight symmetry", worst_w <= 1e-9 && worst_rho <= 1e-9,
         fmt("structures=200 max_w_diff=%.2e max_rho_diff=%.2e repeated_root=%d", worst_w, worst_rho, degenerate));
}

void bartlett_null() {
  const auto t0 = Clock::now();
  const std::size_t reps = 5000, n = 200;
  std::vector<double> stats(reps);
  parallel_for(reps, [&](std::size_t r) {
    Engine eng = substream(5, {r});
    const Matrix x = sample_mvn(Matrix::identity(4), n, eng);
    const CanonicalSolution s = canonical_corr(PairCorrelationStructure::from_joint(corr_matrix(x)));
    stats[r] = bartlett_chi2(s.roots, n, 2).statistic;
  });
  const double p = testing::ks_pvalue(stats, [](double x) { return 1.0 - std::exp(-x / 2) * (1.0 + x / 2); });
  const double secs = seconds_since(t0);
  report(5, "bartlett null calibration", p > 0.01 && secs < 60.0, fmt("ks_p=%.4f time=%.2fs", p, secs));
}

void fisher_calibration() {
  const std::size_t reps = 5000, n = 50;
  const double alpha = 0.05;
  std::size_t rejections = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    Engine eng = substream(6, {r});
    const Matrix x = sample_mvn(Matrix::identity(2), n, eng);
    rejections += z_pvalue(fisher_z(pearson_corr(x.col(0), x.col(1)), n), Sidedness::TwoSided) <= alpha;
  }
  const double rate = static_cast<double>(rejections) / reps;
  const double se = std::sqrt(alpha * (1 - alpha) / reps);
  report(6, "fisher calibration", std::abs(rate - alpha) <= 3 * se, fmt("rate=%.4f se=%.4f", rate, se));
}

void bh_correctness() {
  Rng rng(107);
  std::uniform_int_distribution<int> len(1, 6), grid(0, 100), small(0, 10);
  const int gammas[] = {1, 5, 10, 20};
  std::size_t cases = 0, mismatches = 0;
  for (int t = 0; t < 20000; ++t) {
    std::vector<int> a(len(rng));
    for (int& x : a) x = (t % 2) ? small(rng) : grid(rng);
    const int g = gammas[t % 4];
    std::vector<double> p(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) p[i] = a[i] / 100.0;
    const FdrDecision d = bh_fdr(p, g / 100.0);
    mismatches += std::set<std::size_t>(d.rejected.begin(), d.rejected.end()) != testing::bh_oracle(a, g);
    ++cases;
  }
  report(7, "bh correctness", cases >= 10000 && mismatches == 0, fmt("cases=%zu mismatches=%zu", cases, mismatches));
}

void power_reproduction() {
  const auto t0 = Clock::now();
  PowerStudySpec spec;
  spec.grid.push_back({0.0, 0.0});
  for (const GridPoint& g : slice_grid(SliceKind::RFromB, 0.2, spec.rho1, spec.rho2))
    if (g.b > 0.0) spec.grid.push_back(g);
  const PowerResult res = power_study(spec);
  const double secs = seconds_since(t0);

  const double s1 = res.at(0, 1).power;
  const double analytic = fisher_power_approx(0.3, 50, 0.05);
  const bool a = std::abs(s1 - 0.683) <= 0.045;

  bool monotone = true, c = true;
  double top = 0.0, worst_gap = 0.0;
  for (std::size_t gi = 0; gi < spec.grid.size(); ++gi) {
    const PowerCell& p5 = res.at(gi, 5);
    top = std::max(top, p5.power);
    if (gi > 0) {
      const PowerCell& prev = res.at(gi - 1, 5);
      const double drop = prev.power - p5.power;
      worst_gap = std::max(worst_gap, drop);
      if (drop > 2.0 * std::hypot(prev.mc_se, p5.mc_se)) monotone = false;
    }
    if (spec.grid[gi].b >= 0.5 - 1e-12) {
      const PowerCell& p1 = res.at(gi, 1);
      const PowerCell& p2 = res.at(gi, 2);
      const PowerCell& best = p1.power >= p2.power ? p1 : p2;
      if (p5.power < best.power - 2.0 * std::hypot(p5.mc_se, best.mc_se)) c = false;
    }
  }
  const bool b = monotone && top >= 0.99;
  report(8, "power study", a && b && c && secs < 180.0,
         fmt("(a) s1=%.3f analytic=%.3f %s (b) max_drop=%.3f max_s5=%.3f %s (c) %s time=%.1fs", s1, analytic,
             a ? "ok" : "off", worst_gap, top, b ? "ok" : "off", c ? "ok" : "off", secs));
}

void graph_statistics() {
  Rng rng(109);
  std::uniform_int_distribution<std::size_t> nodes(1, 8);
  std::uniform_real_distribution<double> dens(0.0, 1.0);
  std::size_t bad = 0;
  for (int t = 0; t < 500; ++t) {
    const auto adj = testing::random_adj(rng, nodes(rng), dens(rng));
    const Graph g = testing::from_adj(adj);
    const auto bc = betweenness_values(g), want_bc = testing::betweenness_oracle(adj);
    const auto cc = clustering_values(g), want_cc = testing::clustering_oracle(adj);
    for (std::size_t v = 0; v < adj.size(); ++v) {
      std::size_t d = 0;
      for (bool e : adj[v]) d += e;
      bad += g.degree(v) != d;
      bad += std::abs(bc[v] - want_bc[v]) > 1e-12;
      bad += std::abs(cc[v] - want_cc[v]) > 1e-12;
    }
    bad += largest_connected_component(g) != testing::lcc_oracle(adj);
  }

  Graph big(91);
  std::size_t placed = 0;
  for (std::size_t u = 0; u < 91 && placed < 791; ++u)
    for (std::size_t v = u + 1; v < 91 && placed < 791; ++v) {
      big.add_edge(u, v);
      ++placed;
    }
  const NetworkSummary s = summarize(big);
  const bool table = s.n_edges == 791 && s.density == 2.0 * 791 / (91.0 * 90.0) && s.avg_degree == 2.0 * 791 / 91.0 &&
                     fmt("%.2f", s.density) == "0.19" && fmt("%.2f", s.avg_degree) == "17.38";
  report(9, "graph statistics", bad == 0 && table,
         fmt("graphs=500 mismatches=%zu density=%.4f avg_degree=%.4f", bad, s.density, s.avg_degree));
}

void jaccard_arithmetic() {
  const JaccardResult j = jaccard_from_counts(426, 791, 329);
  report(10, "jaccard", fmt("%.2f", j.similarity) == "0.37", fmt("similarity=%.6f", j.similarity));
}

void hypergeometric() {
  Rng rng(113);
  std::uniform_int_distribution<std::uint64_t> uni_d(1, 30);
  double worst = 0.0;
  std::size_t zero_mismatch = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::uint64_t uni = uni_d(rng);
    const std::uint64_t set = std::uniform_int_distribution<std::uint64_t>(0, uni)(rng);
    const std::uint64_t cls = std::uniform_int_distribution<std::uint64_t>(0, uni)(rng);
    const std::uint64_t ov = std::uniform_int_distribution<std::uint64_t>(0, std::min(set, cls))(rng);
    const double want = testing::exact_upper(ov, cls, set, uni);
    const double got = hypergeom_upper(ov, cls, set, uni);
    if (want == 0.0)
      zero_mismatch += got != 0.0;
    else
      worst = std::max(worst, std::abs(got - want) / want);
  }
  const double ex = hypergeom_upper(4, 5, 4, 10);
  const double ex_err = std::abs(ex - 6.0 / 252.0) / (6.0 / 252.0);
  report(11, "hypergeometric", worst < 1e-10 && zero_mismatch == 0 && ex_err < 1e-13,
         fmt("configs=1000 max_rel_err=%.2e worked_example=%.17g", worst, ex));
}

void wformula_table() {
  const ExtremeTailSampler sampler;
  const auto rows = wformula_calibration(sampler);
  bool ok = rows.size() == 9;
  std::string table;
  for (const auto& r : rows) {
    table += fmt("      rho_z=%.1f c=%.1f formula=%.6f density_form=%.6f monte_carlo=%.6f se=%.6f", r.rho_z, r.c,
                 r.formula, r.formula_density, r.monte_carlo, r.mc_se);
    if (r.independence) {
      const double se = sampler.standard_error(*r.independence);
      ok = ok && std::abs(r.monte_carlo - *r.independence) <= 3.0 * se;
      table += fmt(" independence=%.6f", *r.independence);
    }
    table += "\n";
  }
  report(12, "w-formula calibration", ok, fmt("draws=%zu rows=%zu", sampler.draws(), rows.size()));
  std::fputs(table.c_str(), stdout);
}

std::string pipeline_outputs(std::size_t threads) {
  PowerStudySpec spec;
  spec.grid = slice_grid(SliceKind::RFromB, 0.2, spec.rho1, spec.rho2, 0.25);
  spec.reps = 200;
  spec.seed = 7;
  std::string out = power_csv(spec, power_study(spec, threads));

  const AttributeDataset data = testing::synthetic_dataset(11, 12, 2, 60, {{0, 1, 0.6}, {2, 3, 0.6}});
  InferenceOptions opt;
  opt.threads = threads;
  for (Method m : {Method::Cca, Method::Max}) {
    const InferredNetwork net = infer_network(data, m, 0.05, opt);
    out += edges_csv(net);
    out += dump_json(meta_json(net));
    if (m == Method::Cca) out += node_classes_csv(net, classify_network(net, kDefaultThreshold));
  }
  return out;
}

void determinism() {
  const std::string a = pipeline_outputs(1), b = pipeline_outputs(thread_count()), c = pipeline_outputs(1);
  report(13, "determinism", a == b && a == c, fmt("bytes=%zu identical=%s", a.size(), a == b && a == c ? "yes" : "no"));
}

void end_to_end() {
  const std::vector<testing::PlantedPair> planted{{0, 1, 0.7}, {2, 3, 0.7}, {4, 5, 0.7}, {6, 7, 0.7}, {8, 9, 0.7}};
  std::set<std::pair<std::size_t, std::size_t>> truth;
  for (const auto& p : planted) truth.insert({p.i, p.j});
  InferenceOptions opt;
  opt.homogeneity_test = false;
  std::size_t exact = 0, all_found = 0, false_edges = 0;
  const std::size_t runs = 100;
  for (std::size_t s = 0; s < runs; ++s) {
    const AttributeDataset data = testing::synthetic_dataset(1000 + s, 20, 2, 60, planted, 0.3);
    const InferredNetwork net = infer_network(data, Method::Cca, 0.05, opt);
    std::set<std::pair<std::size_t, std::size_t>> got;
    for (const auto& e : net.edges) got.insert({e.i, e.j});
    std::size_t hits = 0;
    for (const auto& e : got) hits += truth.count(e);
    exact += got == truth;
    all_found += hits == truth.size();
    false_edges += got.size() - hits;
  }
  const double rate = static_cast<double>(exact) / runs;
  report(14, "end-to-end recovery", rate >= 0.95,
         fmt("exact=%zu/%zu planted_all_found=%zu/%zu false_edges_total=%zu", exact, runs, all_found, runs,
             false_edges));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{
      closed_form_equivalence, domain_equivalence, cca_optimality, homogeneous_weights, bartlett_null,
      fisher_calibration,      bh_correctness,     power_reproduction, graph_statistics, jaccard_arithmetic,
      hypergeometric,          wformula_table,     determinism,        end_to_end};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), "exception", false, e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
