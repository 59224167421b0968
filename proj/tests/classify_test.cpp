#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "macnet/classify.hpp"
#include "macnet/distributions.hpp"
#include "synthetic.hpp"

namespace macnet {
namespace {

EdgeClass edge(std::vector<double> c, double t) { return classify_edge(c, t); }

TEST(ClassifyEdge, Examples) {
  // Attribute order (gene, protein) with 93% from protein.
  const EdgeClass a = edge({0.07, 0.93}, 0.25);
  EXPECT_EQ(a.kind, EdgeKind::Dominated);
  EXPECT_EQ(a.attribute, 1u);

  for (double t : {0.05, 0.25, 0.49}) EXPECT_EQ(edge({0.5, 0.5}, t).kind, EdgeKind::Mixed);

  EXPECT_EQ(edge({0.6, 0.3, 0.1}, 0.25).kind, EdgeKind::Mixed);
  const EdgeClass b = edge({0.6, 0.3, 0.1}, 0.45);
  EXPECT_EQ(b.kind, EdgeKind::Dominated);
  EXPECT_EQ(b.attribute, 0u);
}

TEST(ClassifyEdge, TwoAttributeTriangleRule) {
  for (int s = 0; s <= 1000; ++s) {
    const double protein = s / 1000.0;
    for (double t : {0.1, 0.25, 0.4}) {
      const EdgeClass c = edge({1.0 - protein, protein}, t);
      if (protein <= t) {
        EXPECT_EQ(c.kind, EdgeKind::Dominated);
        EXPECT_EQ(c.attribute, 0u);
      } else if (protein >= 1.0 - t) {
        EXPECT_EQ(c.kind, EdgeKind::Dominated);
        EXPECT_EQ(c.attribute, 1u);
      } else {
        EXPECT_EQ(c.kind, EdgeKind::Mixed);
      }
    }
  }
}

TEST(ClassifyEdge, Errors) {
  EXPECT_THROW(edge({0.5, 0.5}, 0.0), Error);
  EXPECT_THROW(edge({0.5, 0.5}, 1.0), Error);
  EXPECT_THROW(edge({0.5, 0.6}, 0.25), Error);
  EXPECT_THROW(edge({1.2, -0.2}, 0.25), Error);
}

TEST(ClassifyEdge, Properties) {
  std::mt19937_64 rng(4);
  std::gamma_distribution<double> g(1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t k = 2 + trial % 3;
    std::vector<double> c(k);
    double s = 0;
    for (double& x : c) s += (x = g(rng));
    for (double& x : c) x /= s;
    // Monotone in T: mixed at a larger T implies mixed at a smaller one.
    for (double t1 : {0.1, 0.2, 0.3})
      for (double t2 : {0.35, 0.45})
        if (edge(c, t2).kind == EdgeKind::Mixed) EXPECT_EQ(edge(c, t1).kind, EdgeKind::Mixed);
    // Permuting attributes permutes the label.
    std::vector<std::size_t> perm(k);
    for (std::size_t l = 0; l < k; ++l) perm[l] = (l + 1) % k;
    std::vector<double> pc(k);
    for (std::size_t l = 0; l < k; ++l) pc[perm[l]] = c[l];
    const EdgeClass a = edge(c, 0.3), b = edge(pc, 0.3);
    EXPECT_EQ(a.kind, b.kind);
    if (a.kind == EdgeKind::Dominated) EXPECT_EQ(perm[a.attribute], b.attribute);
    if (k == 2) {
      const EdgeClass m = edge({c[1], c[0]}, 0.3);
      EXPECT_EQ(m.kind, a.kind);
      if (a.kind == EdgeKind::Dominated) EXPECT_EQ(m.attribute, 1 - a.attribute);
    }
  }
}

TEST(ClassifyNode, Counting) {
  std::vector<EdgeClass> inc;
  for (int r = 0; r < 3; ++r) inc.push_back(edge({0.0, 1.0}, 0.25));
  inc.push_back(edge({1.0, 0.0}, 0.25));
  const NodeClass n = classify_node(inc, 2);
  EXPECT_EQ(n.proportions, (Vector{0.25, 0.75, 0.0}));
  EXPECT_EQ(n.kind, NodeKind::Dominated);
  EXPECT_EQ(n.attribute, 1u);

  const std::vector<EdgeClass> mixed(4, edge({0.5, 0.5}, 0.25));
  const NodeClass m = classify_node(mixed, 2);
  EXPECT_EQ(m.kind, NodeKind::Mixed);
  EXPECT_EQ(m.proportions, (Vector{0.0, 0.0, 1.0}));

  const NodeClass u = classify_node({}, 2);
  EXPECT_EQ(u.kind, NodeKind::Unclassified);
  EXPECT_EQ(label_name(u, {"gene", "protein"}), "unclassified");
}

TEST(ClassifyNode, TieBreaks) {
  const std::vector<EdgeClass> tie_mixed{edge({0.5, 0.5}, 0.25), edge({1.0, 0.0}, 0.25)};
  EXPECT_EQ(classify_node(tie_mixed, 2).kind, NodeKind::Mixed);
  const std::vector<EdgeClass> tie_attr{edge({0.0, 1.0}, 0.25), edge({1.0, 0.0}, 0.25)};
  const NodeClass n = classify_node(tie_attr, 2);
  EXPECT_EQ(n.kind, NodeKind::Dominated);
  EXPECT_EQ(n.attribute, 0u);
  // Order of incident edges does not matter.
  const std::vector<EdgeClass> rev{tie_attr[1], tie_attr[0]};
  EXPECT_EQ(classify_node(rev, 2).attribute, 0u);
}

TEST(ClassifyNetwork, ProportionsSumToOne) {
  const auto d = testing::synthetic_dataset(3, 12, 2, 60, {{0, 1, 0.8}, {2, 3, 0.7}, {4, 5, 0.6}, {1, 6, 0.5}}, 0.3);
  const auto net = infer_network(d, Method::Cca, 0.05);
  const auto cls = classify_network(net);
  EXPECT_EQ(cls.edges.size(), net.edges.size());
  for (const auto& n : cls.nodes) {
    double s = 0;
    for (double p : n.proportions) s += p;
    if (n.degree > 0)
      EXPECT_NEAR(s, 1.0, 1e-12);
    else
      EXPECT_EQ(n.kind, NodeKind::Unclassified);
  }
  const auto pearson = infer_network(d, Method::Max, 0.05);
  if (!pearson.edges.empty()) EXPECT_THROW(classify_network(pearson), Error);
}

TEST(Histogram, Bins) {
  const std::vector<double> ones(7, 1.0);
  const auto h = contribution_histogram(ones);
  EXPECT_EQ(h.size(), 50u);
  EXPECT_EQ(h.back(), 7u);
  const auto empty = contribution_histogram(std::vector<double>{});
  EXPECT_TRUE(std::all_of(empty.begin(), empty.end(), [](auto c) { return c == 0; }));
  const std::vector<double> edges{0.0, 0.02, 0.019999, 0.5};
  const auto e = contribution_histogram(edges);
  EXPECT_EQ(e[0], 2u);
  EXPECT_EQ(e[1], 1u);
  EXPECT_EQ(e[25], 1u);
}

TEST(Histogram, UniformInputIsFlat) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(20000);
  for (double& x : v) x = u(rng);
  const auto h = contribution_histogram(v);
  const double expected = v.size() / 50.0;
  double chi2 = 0;
  for (auto c : h) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_GT(chi2_sf(chi2, 49), 0.01);
}

}  // namespace
}  // namespace macnet
