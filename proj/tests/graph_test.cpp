// Copyright 2026 The commrank Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "commrank/error.hpp"
#include "commrank/graph.hpp"
#include "support.hpp"

namespace commrank {
namespace {

EdgeListLoad parse(const std::string& text) {
  std::istringstream in(text);
  return load_edge_list(in);
}

ErrorCode error_code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kIo;
}

TEST(EdgeList, BuildsDenseIndicesInFirstAppearanceOrder) {
  const auto load = parse("a b\nb c\n");
  const Graph& g = load.graph;
  EXPECT_EQ(g.num_nodes(), 3u);
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(g.degree(0), 1u);
  EXPECT_EQ(g.degree(1), 2u);
  EXPECT_EQ(g.degree(2), 1u);
  EXPECT_EQ(g.label(0), "a");
  EXPECT_EQ(*g.find("c"), 2u);
  EXPECT_FALSE(g.find("zz").has_value());
}

TEST(EdgeList, DropsDuplicatesAndSelfLoops) {
  const auto load = parse("a b\nb a\na a\n");
  EXPECT_EQ(load.graph.num_nodes(), 2u);
  EXPECT_EQ(load.graph.num_edges(), 1u);
  EXPECT_EQ(load.duplicates_dropped, 1u);
  EXPECT_EQ(load.self_loops_dropped, 1u);
}

TEST(EdgeList, IgnoresCommentsAndWeights) {
  const auto load = parse("# header\na b 0.5\n\nb c 2\n");
  EXPECT_EQ(load.graph.num_edges(), 2u);
}

TEST(EdgeList, MalformedLineReportsLineNumber) {
  try {
    parse("a b\nx\n");
    FAIL() << "expected parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_EQ(error_code_of([] { parse("x"); }), ErrorCode::kParse);
}

TEST(EdgeList, EmptyGraphIsRejected) {
  EXPECT_EQ(error_code_of([] { parse("# nothing\n"); }), ErrorCode::kEmptyInput);
  EXPECT_EQ(error_code_of([] { parse("a a\n"); }), ErrorCode::kEmptyInput);
}

TEST(EdgeList, WriteThenLoadRoundTrips) {
  Rng rng(5);
  const Graph g = testing::random_graph(rng, 40, 0.2);
  std::ostringstream out;
  write_edge_list(out, g);
  const auto back = parse(out.str());
  ASSERT_EQ(back.graph.num_edges(), g.num_edges());
  for (auto [u, v] : g.edges()) {
    const auto a = back.graph.find(g.label(u));
    const auto b = back.graph.find(g.label(v));
    ASSERT_TRUE(a && b);
    EXPECT_TRUE(back.graph.has_edge(*a, *b));
  }
}

TEST(Graph, InvariantsHoldOnRandomGraphs) {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + uniform_below(rng, 60);
    const Graph g = testing::random_graph(rng, n, uniform01(rng));
    std::size_t degree_sum = 0;
    for (NodeId u = 0; u < n; ++u) {
      degree_sum += g.degree(u);
      auto nbr = g.neighbors(u);
      EXPECT_TRUE(std::is_sorted(nbr.begin(), nbr.end()));
      EXPECT_EQ(std::adjacent_find(nbr.begin(), nbr.end()), nbr.end());
      for (NodeId v : nbr) {
        EXPECT_NE(u, v);
        EXPECT_TRUE(g.has_edge(v, u));
      }
    }
    EXPECT_EQ(degree_sum, 2 * g.num_edges());
  }
}

TEST(BackgroundRate, MatchesDegreeProduct) {
  // two disjoint edges: every degree is 1, m = 2
  const Edge pairs[] = {{0, 1}, {2, 3}};
  const Graph g = Graph::from_edges(4, pairs);
  EXPECT_DOUBLE_EQ(pair_background_rate(g, 0, 2), 0.25);

  const Edge star[] = {{0, 1}};
  const Graph h = Graph::from_edges(3, star);
  EXPECT_EQ(pair_background_rate(h, 0, 2), 0.0);

  const Edge cycle[] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  const Graph c4 = Graph::from_edges(4, cycle);
  for (NodeId u = 0; u < 4; ++u) {
    for (NodeId v = 0; v < 4; ++v) {
      if (u != v) EXPECT_DOUBLE_EQ(pair_background_rate(c4, u, v), 0.5);
    }
  }
}

TEST(BackgroundRate, SameNodeIsInvalid) {
  const Graph g = testing::clique_graph(3);
  EXPECT_EQ(error_code_of([&] { pair_background_rate(g, 1, 1); }), ErrorCode::kInvalidPair);
  EXPECT_EQ(error_code_of([&] { background_fraction(g, 1, 1); }), ErrorCode::kInvalidPair);
}

TEST(BackgroundRate, IsSymmetricAndFractionIsClamped) {
  Rng rng(3);
  const Graph g = testing::random_graph(rng, 30, 0.3);
  for (NodeId u = 0; u < 30; ++u) {
    for (NodeId v = u + 1; v < 30; ++v) {
      EXPECT_EQ(pair_background_rate(g, u, v), pair_background_rate(g, v, u));
      EXPECT_LE(background_fraction(g, u, v), 1.0 - 1e-12);
    }
  }
  // a single edge: e_uv = 1/2, m = 1, so e_uv/m = 1/2; a star with a hub
  // pushes e_uv/m above 1 and must be clamped
  const Edge star[] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}};
  const Graph s = Graph::from_edges(4, star);
  EXPECT_LE(background_fraction(s, 0, 1), 1.0 - 1e-12);
}

TEST(CutCounts, SpotValues) {
  const Graph triangle_plus = [] {
    const Edge e[] = {{0, 1}, {1, 2}, {0, 2}, {3, 4}};
    return Graph::from_edges(5, e);
  }();
  EXPECT_EQ(cut_counts(triangle_plus, make_community("t", {0, 1, 2}, 0, 5)), (CutCounts{3, 0}));

  const Edge star[] = {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}};
  const Graph s = Graph::from_edges(6, star);
  EXPECT_EQ(cut_counts(s, make_community("hub", {0}, 0, 6)), (CutCounts{0, 5}));

  const Edge path[] = {{0, 1}, {1, 2}, {2, 3}};
  const Graph p = Graph::from_edges(4, path);
  EXPECT_EQ(cut_counts(p, make_community("bc", {1, 2}, 0, 4)), (CutCounts{1, 2}));
}

TEST(CutCounts, MatchesBruteForce) {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + uniform_below(rng, 49);
    const Graph g = testing::random_graph(rng, n, uniform01(rng) * 0.5);
    const Community c = testing::random_community(rng, n, 1 + uniform_below(rng, n));
    CutCounts expected;
    for (auto [u, v] : g.edges()) {
      const int inside = c.contains(u) + c.contains(v);
      if (inside == 2) ++expected.internal;
      if (inside == 1) ++expected.boundary;
    }
    EXPECT_EQ(cut_counts(g, c), expected);
  }
  Rng r2(2);
  const Graph g = testing::random_graph(r2, 20, 0.4);
  std::vector<NodeId> all(20);
  std::iota(all.begin(), all.end(), NodeId{0});
  EXPECT_EQ(cut_counts(g, make_community("all", all, 0, 20)), (CutCounts{g.num_edges(), 0}));
}

TEST(Cover, ReadsLabelsAndRoundTrips) {
  const auto load = parse("a b\nb c\nc d\n");
  std::istringstream in("x\ta b\ny\tc d b\n");
  const Cover cover = read_cover(in, load.graph);
  ASSERT_EQ(cover.size(), 2u);
  EXPECT_EQ(cover[1].name, "y");
  EXPECT_EQ(cover[1].members, (std::vector<NodeId>{1, 2, 3}));
  std::ostringstream out;
  write_cover(out, cover, load.graph);
  std::istringstream again(out.str());
  const Cover back = read_cover(again, load.graph);
  ASSERT_EQ(back.size(), cover.size());
  for (std::size_t i = 0; i < cover.size(); ++i) {
    EXPECT_EQ(back[i].name, cover[i].name);
    EXPECT_EQ(back[i].members, cover[i].members);
  }
}

TEST(Cover, UnknownLabelNamesTheLabel) {
  const auto load = parse("a b\n");
  std::istringstream in("x\ta b\ny\tb q\n");
  try {
    read_cover(in, load.graph);
    FAIL() << "expected input error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInput);
    EXPECT_NE(std::string(e.what()).find("'q'"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Cover, LabelSpaceSharesIndicesAcrossFiles) {
  LabelSpace labels;
  std::istringstream a("c1\tx y z\n");
  std::istringstream b("t1\tz w\n");
  const Cover first = read_cover(a, labels);
  const Cover second = read_cover(b, labels);
  EXPECT_EQ(labels.size(), 4u);
  EXPECT_TRUE(first[0].contains(second[0].members[0]));
}

}  // namespace
}  // namespace commrank
