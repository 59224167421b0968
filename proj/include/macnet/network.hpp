#pragma once

// All-pairs network inference and the summary statistics of the result.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "macnet/error.hpp"
#include "macnet/graph.hpp"
#include "macnet/inference.hpp"
#include "macnet/matrix.hpp"
#include "macnet/numkernel.hpp"
#include "macnet/parallel.hpp"
#include "macnet/similarity.hpp"

namespace macnet {

/// Per-node measurements: samples[v] is an n x K block whose column a holds
/// attribute a across the n samples.
struct AttributeDataset {
  std::vector<std::string> node_ids;
  std::vector<std::string> attribute_names;
  std::vector<Matrix> samples;
  std::vector<std::size_t> selected;  // attribute subset C; empty means all

  std::size_t node_count() const noexcept { return node_ids.size(); }
  std::size_t attribute_count() const noexcept { return attribute_names.size(); }
  std::size_t sample_count() const noexcept { return samples.empty() ? 0 : samples.front().rows(); }

  std::vector<std::size_t> selection() const {
    if (!selected.empty()) return selected;
    std::vector<std::size_t> all(attribute_count());
    for (std::size_t a = 0; a < all.size(); ++a) all[a] = a;
    return all;
  }

  /// Restricts C to the named attributes, in the given order.
  void select(const std::vector<std::string>& names) {
    selected.clear();
    for (const auto& name : names) {
      const auto it = std::find(attribute_names.begin(), attribute_names.end(), name);
      if (it == attribute_names.end()) throw Error(Errc::Usage, "unknown attribute '" + name + "'");
      const auto idx = static_cast<std::size_t>(it - attribute_names.begin());
      if (std::find(selected.begin(), selected.end(), idx) != selected.end())
        throw Error(Errc::Usage, "attribute '" + name + "' selected twice");
      selected.push_back(idx);
    }
  }

  /// n x |C| block of node v restricted to the selected attributes.
  Matrix block(std::size_t v) const {
    const auto sel = selection();
    const Matrix& s = samples.at(v);
    Matrix out(s.rows(), sel.size());
    for (std::size_t r = 0; r < s.rows(); ++r)
      for (std::size_t c = 0; c < sel.size(); ++c) out(r, c) = s(r, sel[c]);
    return out;
  }

  void validate() const {
    if (node_count() < 2) throw Error(Errc::InsufficientSamples, "dataset needs at least 2 nodes");
    if (attribute_count() == 0) throw Error(Errc::SchemaMismatch, "dataset has no attributes");
    if (samples.size() != node_count()) throw Error(Errc::LengthMismatch, "one sample block per node expected");
    const std::size_t n = sample_count();
    if (n < 3) throw Error(Errc::InsufficientSamples, "dataset needs at least 3 samples");
    for (std::size_t v = 0; v < node_count(); ++v) {
      if (samples[v].rows() != n || samples[v].cols() != attribute_count())
        throw Error(Errc::LengthMismatch, "node '" + node_ids[v] + "' has a mis-shaped sample block");
      for (double x : samples[v].data())
        if (!std::isfinite(x)) throw Error(Errc::NonFiniteInput, "node '" + node_ids[v] + "' has a non-finite sample");
    }
    for (std::size_t a : selection())
      if (a >= attribute_count()) throw Error(Errc::Usage, "selected attribute index out of range");
  }
};

struct EdgeRecord : EdgeTest {
  Vector contrib;  // cca only: edge-level first-root contributions
};

struct SkippedPair {
  std::size_t i = 0, j = 0;
  std::string reason;
};

/// Pair whose estimated supermatrix needed eigenvalue flooring.
struct FlooredPair {
  std::size_t i = 0, j = 0;
  double max_change = 0.0;
};

struct HomogeneitySummary {
  std::size_t tested = 0;
  std::size_t rejected = 0;
  double level = 0.05;
  std::size_t df = 0;

  double rejection_fraction() const { return tested == 0 ? 0.0 : static_cast<double>(rejected) / static_cast<double>(tested); }
};

struct InferredNetwork {
  std::vector<std::string> node_ids;
  std::vector<std::string> attribute_names;  // selected attributes, in order
  Method method = Method::Cca;
  double gamma = 0.05;
  std::size_t n = 0;
  PValueMode pvalue_mode = PValueMode::Formula;
  std::vector<EdgeRecord> edges;  // pairs rejected by BH, canonical order
  std::vector<EdgeRecord> tests;  // every tested pair, canonical order
  std::vector<SkippedPair> skipped;
  std::vector<FlooredPair> floored;
  HomogeneitySummary homogeneity;
};

struct InferenceOptions {
  PValueMode pvalue_mode = PValueMode::Formula;
  std::size_t mc_draws = ExtremeTailSampler::kDefaultDraws;
  std::uint64_t mc_seed = 20240601;
  bool homogeneity_test = true;
  std::size_t threads = thread_count();
};

/// Eigenvalue floor applied to estimated supermatrices that are not
/// positive-definite, and the largest eigenvalue change tolerated before a
/// pair is skipped instead.
inline constexpr double kEigenFloor = 1e-8;
inline constexpr double kMaxFloorChange = 0.01;

namespace detail {

inline Matrix hconcat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out.set_block(0, 0, a);
  out.set_block(0, a.cols(), b);
  return out;
}

inline Matrix unit_diagonal(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = r == c ? 1.0 : a(r, c) / std::sqrt(a(r, r) * a(c, c));
  return out;
}

/// Fisher statistic with |rho| = 1 pulled to the nearest representable value,
/// so a perfect correlation yields a large finite statistic.
inline double fisher_z_clamped(double rho, std::size_t n) {
  const double lim = std::nextafter(1.0, 0.0);
  return fisher_z(std::clamp(rho, -lim, lim), n);
}

struct PairOutcome {
  std::optional<EdgeRecord> record;
  std::optional<SkippedPair> skipped;
  std::optional<FlooredPair> floored;
  std::optional<bool> homogeneity_rejects;
};

}  // namespace detail

inline std::size_t minimum_samples(Method method, std::size_t k) {
  if (method == Method::Cca) {
    std::size_t n = 2 * k + 3;
    while (!bartlett_sample_ok(n, k)) ++n;
    return n;
  }
  return 4;
}

inline InferredNetwork infer_network(const AttributeDataset& data, Method method, double gamma,
                                     const InferenceOptions& opt = {}) {
  data.validate();
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(Errc::InvalidGamma, "infer_network: gamma must lie in (0, 1)");
  const auto sel = data.selection();
  const std::size_t k = sel.size(), n = data.sample_count(), nv = data.node_count();
  if (method == Method::Pearson && k != 1)
    throw Error(Errc::Usage, "method pearson needs exactly one attribute; select one with --attributes");
  if ((method == Method::Max || method == Method::Min) && k > 2)
    throw Error(Errc::Usage, "methods max and min support at most two attributes");
  if (n < minimum_samples(method, k))
    throw Error(Errc::InsufficientSamples, "n = " + std::to_string(n) + " is below the minimum of " +
                                               std::to_string(minimum_samples(method, k)) + " for method " +
                                               std::string(method_name(method)) + " with " + std::to_string(k) +
                                               " attribute(s)");

  InferredNetwork net;
  net.node_ids = data.node_ids;
  for (std::size_t a : sel) net.attribute_names.push_back(data.attribute_names[a]);
  net.method = method;
  net.gamma = gamma;
  net.n = n;
  net.pvalue_mode = opt.pvalue_mode;
  net.homogeneity.df = homogeneity_df(k);

  // Per-node blocks and their within-node correlations; a constant column is
  // reported by node and attribute.
  std::vector<Matrix> blocks(nv), within(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    blocks[v] = data.block(v);
    try {
      within[v] = corr_matrix(blocks[v]);
    } catch (const IndexedError& e) {
      throw IndexedError(Errc::ZeroVariance, "node '" + data.node_ids[v] + "', attribute '" +
                                                 data.attribute_names[sel[e.index()]] + "' is constant",
                         v);
    }
  }

  std::optional<ExtremeTail> tail;
  if (method == Method::Max || method == Method::Min) tail.emplace(opt.pvalue_mode, opt.mc_draws, opt.mc_seed);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(nv * (nv - 1) / 2);
  for (std::size_t i = 0; i < nv; ++i)
    for (std::size_t j = i + 1; j < nv; ++j) pairs.emplace_back(i, j);

  std::vector<detail::PairOutcome> outcomes(pairs.size());
  const bool run_lrt = opt.homogeneity_test && n >= 2 * k + 2;

  parallel_for(
      pairs.size(),
      [&](std::size_t idx) {
        const auto [i, j] = pairs[idx];
        detail::PairOutcome& out = outcomes[idx];
        if (run_lrt) {
          try {
            out.homogeneity_rejects = homogeneity_lrt(blocks[i], blocks[j]).p <= 0.05;
          } catch (const Error&) {
          }
        }
        EdgeRecord rec;
        rec.i = i;
        rec.j = j;
        rec.method = method;
        rec.n = n;
        try {
          if (method == Method::Cca) {
            Matrix joint = corr_matrix(detail::hconcat(blocks[i], blocks[j]));
            if (!is_positive_definite(joint)) {
              const FlooredSpectrum f = floor_eigenvalues(joint, kEigenFloor);
              if (f.max_change > kMaxFloorChange) {
                out.skipped = SkippedPair{i, j, "NotPositiveDefinite: flooring would change an eigenvalue by " +
                                                    std::to_string(f.max_change)};
                return;
              }
              joint = detail::unit_diagonal(f.matrix);
              out.floored = FlooredPair{i, j, f.max_change};
            }
            const CanonicalSolution sol = canonical_corr(PairCorrelationStructure::from_joint(joint));
            const ChiSquareTest t = bartlett_chi2(sol.roots, n, k);
            rec.similarity = sol.rho_c;
            rec.statistic = t.statistic;
            rec.df = t.df;
            rec.p = t.p;
            rec.contrib = sol.edge_contrib();
          } else {
            Vector rho(k), z(k);
            for (std::size_t l = 0; l < k; ++l) {
              rho[l] = pearson_corr(blocks[i].col(l), blocks[j].col(l));
              z[l] = detail::fisher_z_clamped(rho[l], n);
            }
            if (k == 1) {
              rec.similarity = rho[0];
              rec.statistic = z[0];
              rec.p = z_pvalue(z[0], Sidedness::TwoSided);
            } else {
              // Under no association the two Fisher statistics have
              // asymptotic correlation r_i r_j, the product of the within-node
              // attribute correlations.
              const double rho_z = std::clamp(within[i](0, 1) * within[j](0, 1), -1.0, 1.0);
              const Extreme mode = method == Method::Max ? Extreme::Max : Extreme::Min;
              rec.similarity = aggregate_extreme(rho, mode);
              rec.statistic = aggregate_extreme(z, mode);
              rec.p = tail->pvalue(rec.statistic, rho_z, mode, Sidedness::TwoSided);
            }
          }
        } catch (const Error& e) {
          out.skipped = SkippedPair{i, j, e.what()};
          return;
        }
        out.record = std::move(rec);
      },
      opt.threads);

  std::vector<double> p;
  for (auto& o : outcomes) {
    if (o.homogeneity_rejects) {
      ++net.homogeneity.tested;
      net.homogeneity.rejected += *o.homogeneity_rejects;
    }
    if (o.skipped) net.skipped.push_back(*o.skipped);
    if (o.floored) net.floored.push_back(*o.floored);
    if (o.record) {
      p.push_back(o.record->p);
      net.tests.push_back(std::move(*o.record));
    }
  }
  if (!net.tests.empty()) {
    const FdrDecision d = bh_fdr(p, gamma);
    for (std::size_t t = 0; t < net.tests.size(); ++t) net.tests[t].q = d.q[t];
    for (std::size_t t : d.rejected) net.edges.push_back(net.tests[t]);
  }
  return net;
}

// ---------------------------------------------------------------------------
// Summary statistics

struct NetworkSummary {
  std::size_t n_nodes = 0;
  std::size_t n_edges = 0;
  double density = 0.0;
  std::size_t lcc_size = 0;
  double avg_abs_similarity = 0.0;  // mean |similarity| over declared edges
  std::vector<std::size_t> degree;
  double avg_degree = 0.0;
  std::vector<double> clustering;
  double avg_clustering = 0.0;
  std::vector<double> betweenness;
  double avg_betweenness = 0.0;
};

inline Graph to_graph(const InferredNetwork& net) {
  Graph g(net.node_ids.size());
  for (const auto& e : net.edges) g.add_edge(e.i, e.j);
  return g;
}

namespace detail {

template <class T>
double mean_of(const std::vector<T>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (const T& x : v) s += static_cast<double>(x);
  return s / static_cast<double>(v.size());
}

}  // namespace detail

inline NetworkSummary summarize(const Graph& g) {
  NetworkSummary s;
  s.n_nodes = g.node_count();
  s.n_edges = g.edge_count();
  s.density = density(s.n_nodes, s.n_edges);
  s.lcc_size = largest_connected_component(g);
  s.degree = degree_distribution(g);
  s.avg_degree = s.n_nodes == 0 ? 0.0 : 2.0 * static_cast<double>(s.n_edges) / static_cast<double>(s.n_nodes);
  s.clustering = clustering_values(g);
  s.avg_clustering = detail::mean_of(s.clustering);
  s.betweenness = betweenness_values(g);
  s.avg_betweenness = detail::mean_of(s.betweenness);
  return s;
}

inline NetworkSummary summary(const InferredNetwork& net) {
  NetworkSummary s = summarize(to_graph(net));
  double total = 0.0;
  for (const auto& e : net.edges) total += std::abs(e.similarity);
  s.avg_abs_similarity = net.edges.empty() ? 0.0 : total / static_cast<double>(net.edges.size());
  return s;
}

/// Jaccard similarity of two networks over the same node identifiers, which
/// may be listed in different orders.
inline JaccardResult jaccard(const InferredNetwork& a, const InferredNetwork& b) {
  std::map<std::string, std::size_t> index;
  for (std::size_t v = 0; v < a.node_ids.size(); ++v) index.emplace(a.node_ids[v], v);
  if (index.size() != b.node_ids.size()) throw Error(Errc::NodeSetMismatch, "jaccard: node sets differ in size");
  std::vector<std::size_t> map_b(b.node_ids.size());
  for (std::size_t v = 0; v < b.node_ids.size(); ++v) {
    const auto it = index.find(b.node_ids[v]);
    if (it == index.end()) throw Error(Errc::NodeSetMismatch, "jaccard: node '" + b.node_ids[v] + "' missing from the first network");
    map_b[v] = it->second;
  }
  Graph ga = to_graph(a), gb(a.node_ids.size());
  for (const auto& e : b.edges) gb.add_edge(map_b[e.i], map_b[e.j]);
  return jaccard(ga, gb);
}

}  // namespace macnet
