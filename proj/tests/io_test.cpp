#include <gtest/gtest.h>

#include <sstream>

#include "macnet/io.hpp"
#include "synthetic.hpp"

namespace macnet {
namespace {

AttributeTable parse(const std::string& text, const std::string& name = "gene") {
  std::istringstream in(text);
  return parse_attribute_csv(in, name + ".csv", name);
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::Usage;
}

TEST(AttributeCsv, Parses) {
  const auto t = parse("node_id,s1,s2,s3\nA,1,2,3\r\nB,-1.5e0,+2,0.25\n\n");
  EXPECT_EQ(t.node_ids, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(t.values, (Matrix{{1, 2, 3}, {-1.5, 2, 0.25}}));
}

TEST(AttributeCsv, Errors) {
  EXPECT_EQ(code_of([] { parse("id,s1\nA,1\n"); }), Errc::SchemaMismatch);
  EXPECT_EQ(code_of([] { parse("node_id,s1,s2\nA,1\n"); }), Errc::SchemaMismatch);
  EXPECT_EQ(code_of([] { parse("node_id,s1\nA,1\nA,2\n"); }), Errc::DuplicateNodeId);
  EXPECT_EQ(code_of([] { parse("node_id,s1\nA,x\n"); }), Errc::NonNumericCell);
  EXPECT_EQ(code_of([] { parse("node_id,s1\nA,nan\n"); }), Errc::NonNumericCell);
  EXPECT_EQ(code_of([] { parse("node_id,s1\nA,\n"); }), Errc::NonNumericCell);
  try {
    parse("node_id,s1,s2\nA,1,2\nB,1,oops\n");
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("gene.csv:3:3"), std::string::npos) << e.what();
  }
}

TEST(Ingest, AlignsByNodeId) {
  const auto a = parse("node_id,s1,s2,s3\nA,1,2,3\nB,4,5,7\n", "gene");
  const auto b = parse("node_id,s1,s2,s3\nB,9,8,7\nA,6,5,4\n", "protein");
  const AttributeDataset d = assemble_dataset({a, b});
  EXPECT_EQ(d.attribute_names, (std::vector<std::string>{"gene", "protein"}));
  EXPECT_EQ(d.sample_count(), 3u);
  EXPECT_EQ(d.samples[0], (Matrix{{1, 6}, {2, 5}, {3, 4}}));
  EXPECT_EQ(d.samples[1], (Matrix{{4, 9}, {5, 8}, {7, 7}}));
}

TEST(Ingest, SingleFile) {
  const auto d = assemble_dataset({parse("node_id,s1,s2,s3,s4\nA,1,2,3,4\nB,4,1,7,2\nC,0,1,0,2\n")});
  EXPECT_EQ(d.attribute_count(), 1u);
  EXPECT_NO_THROW(infer_network(d, Method::Pearson, 0.05));
}

TEST(Ingest, Mismatches) {
  const auto a = parse("node_id,s1,s2,s3\nA,1,2,3\nB,4,5,7\n", "gene");
  const auto c = parse("node_id,s1,s2,s3\nA,1,2,3\nZ,4,5,7\n", "protein");
  try {
    assemble_dataset({a, c});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SchemaMismatch);
    EXPECT_NE(std::string(e.what()).find("'Z'"), std::string::npos);
  }
  const auto shortn = parse("node_id,s1,s2\nA,1,2\nB,4,5\n", "protein");
  EXPECT_EQ(code_of([&] { assemble_dataset({a, shortn}); }), Errc::SchemaMismatch);
}

TEST(EdgeList, RoundTripsExactly) {
  for (Method m : {Method::Cca, Method::Max}) {
    const auto d = testing::synthetic_dataset(4, 10, 2, 60, {{0, 1, 0.7}, {2, 3, 0.5}, {4, 8, 0.6}}, 0.3);
    const InferredNetwork net = infer_network(d, m, 0.05);
    ASSERT_FALSE(net.edges.empty());
    const json meta = json::parse(dump_json(meta_json(net)));
    std::istringstream in(edges_csv(net));
    const InferredNetwork back = parse_edges_csv(in, "edges.csv", &meta);
    EXPECT_EQ(back.node_ids, net.node_ids);
    EXPECT_EQ(back.attribute_names, net.attribute_names);
    EXPECT_EQ(back.gamma, net.gamma);
    EXPECT_EQ(back.n, net.n);
    EXPECT_EQ(back.method, net.method);
    ASSERT_EQ(back.edges.size(), net.edges.size());
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
      const auto &x = net.edges[e], &y = back.edges[e];
      EXPECT_EQ(x.i, y.i);
      EXPECT_EQ(x.j, y.j);
      EXPECT_EQ(x.method, y.method);
      EXPECT_EQ(x.similarity, y.similarity);
      EXPECT_EQ(x.statistic, y.statistic);
      EXPECT_EQ(x.df, y.df);
      EXPECT_EQ(x.p, y.p);
      EXPECT_EQ(x.q, y.q);
      EXPECT_EQ(x.n, y.n);
      EXPECT_EQ(x.contrib, y.contrib);
    }
    EXPECT_EQ(edges_csv(back), edges_csv(net));
  }
}

TEST(EdgeList, WithoutMetadata) {
  std::istringstream in("node_i,node_j,method,similarity,statistic,df,p,q\nb,a,pearson,0.5,3,,0.001,0.01\n");
  const auto net = parse_edges_csv(in, "x.csv");
  EXPECT_EQ(net.node_ids, (std::vector<std::string>{"b", "a"}));
  ASSERT_EQ(net.edges.size(), 1u);
  EXPECT_FALSE(net.edges[0].df.has_value());
  std::istringstream bad("a,b\n");
  EXPECT_THROW(parse_edges_csv(bad, "x.csv"), Error);
}

TEST(Format, SeventeenDigits) {
  for (double x : {0.1, 1.0 / 3.0, 2.2250738585072014e-308, 1e300, -0.0}) {
    double back = 0;
    ASSERT_TRUE(detail::parse_double(fmt_double(x), back) || x == 0.0);
    EXPECT_EQ(back, x);
  }
}

TEST(Files, AtomicWrite) {
  const fs::path dir = fs::temp_directory_path() / "macnet_io_test";
  fs::remove_all(dir);
  write_file_atomic(dir / "a.txt", "one");
  write_file_atomic(dir / "a.txt", "two");
  EXPECT_EQ(detail::read_text(dir / "a.txt"), "two");
  EXPECT_FALSE(fs::exists(dir / "a.txt.tmp"));
  fs::remove_all(dir);
}

TEST(NodeClassesCsv, RoundTrip) {
  std::istringstream in("node_id,label,p_gene,p_protein,p_mixed\nA,gene,1,0,0\nB,mixed,0,0,1\n");
  const auto labels = parse_node_classes_csv(in, "nodes.csv");
  ASSERT_EQ(labels.size(), 2u);
  EXPECT_EQ(labels[1].label, "mixed");
}

}  // namespace
}  // namespace macnet
