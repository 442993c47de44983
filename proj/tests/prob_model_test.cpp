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

#include <cmath>
#include <sstream>

#include "commrank/benchmark.hpp"
#include "commrank/error.hpp"
#include "commrank/prob_model.hpp"
#include "support.hpp"

namespace commrank {
namespace {

// Frozen high-precision values (50-digit evaluation).
constexpr double kPerturbedEdge = 0.4910465312013846;       // p=.5 q=.01 m=100 a=.2
constexpr double kPerturbedCommunity = 0.4586141080884412;  // p=.6 q=.02 m=50 a=.5

Graph two_cliques(std::size_t size) {
  std::vector<Edge> edges;
  for (NodeId base : {NodeId{0}, static_cast<NodeId>(size)}) {
    for (NodeId u = 0; u < size; ++u) {
      for (NodeId v = u + 1; v < size; ++v) edges.emplace_back(base + u, base + v);
    }
  }
  edges.emplace_back(0, static_cast<NodeId>(size));  // one bridge keeps the graph connected
  return Graph::from_edges(2 * size, edges);
}

TEST(Perturbation, ScalarOracleValues) {
  EXPECT_NEAR(perturb_probability(0.5, 0.01, 100, 0.2), kPerturbedEdge, 1e-12);
  EXPECT_NEAR(perturb_probability(0.6, 0.02, 50, 0.5), kPerturbedCommunity, 1e-12);
  EXPECT_EQ(perturb_probability(0.37, 0.2, 10, 0.0), 0.37);
  EXPECT_NEAR(perturb_probability(0.0, 0.1, 30, 1.0), 1.0 - std::pow(0.9, 30), 1e-12);
  EXPECT_EQ(perturb_probability(1.0, 0.1, 30, 1.0), 0.0);
}

TEST(Perturbation, ComplementAgreesWithOneMinus) {
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const double p = uniform01(rng);
    const double q = uniform01(rng) * 0.5;
    const double m = 1 + uniform_below(rng, 500);
    const double a = uniform01(rng);
    EXPECT_NEAR(perturb_complement(p, 1.0 - p, q, m, a), 1.0 - perturb_probability(p, q, m, a),
                1e-12);
  }
}

TEST(Perturbation, AffineInP) {
  const double q = 0.03, m = 40, a = 0.3;
  const double lo = perturb_probability(0.1, q, m, a);
  const double mid = perturb_probability(0.4, q, m, a);
  const double hi = perturb_probability(0.7, q, m, a);
  EXPECT_NEAR(mid - lo, hi - mid, 1e-14);
}

TEST(Perturbation, IntensityIsValidated) {
  EXPECT_THROW(PerturbationIntensity(-0.1), Error);
  EXPECT_THROW(PerturbationIntensity(1.5), Error);
  EXPECT_NO_THROW(PerturbationIntensity(1.0));
}

TEST(Perturbation, ZeroIntensityLeavesModelUntouchedAndOutputsStayInRange) {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 10 + uniform_below(rng, 30);
    const Graph g = testing::random_graph(rng, n, 0.2 + 0.3 * uniform01(rng));
    if (g.num_edges() == 0) continue;
    const AffiliationModel model = testing::random_affiliation(rng, n, 3, 1.5);
    const Community c = make_community("c", {0, 1, 2}, 1, n);
    const PerturbationIntensity zero(0.0);
    const PerturbationIntensity a(uniform01(rng));
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = 0; v < n; ++v) {
        if (u == v) continue;
        EXPECT_NEAR(perturbed_edge_prob(model, g, u, v, zero), model.edge_prob(u, v), 1e-12);
        EXPECT_NEAR(perturbed_community_edge_prob(model, g, c, u, v, zero),
                    model.community_edge_prob(c, u, v), 1e-12);
        for (double x : {perturbed_edge_prob(model, g, u, v, a),
                         perturbed_non_edge_prob(model, g, u, v, a),
                         perturbed_community_edge_prob(model, g, c, u, v, a),
                         model.membership_prob(c, u)}) {
          EXPECT_GE(x, 0.0);
          EXPECT_LE(x, 1.0);
        }
        EXPECT_EQ(model.edge_prob(u, v), model.edge_prob(v, u));
        EXPECT_EQ(model.community_edge_prob(c, u, v), model.community_edge_prob(c, v, u));
        const JointPairTerms t = joint_pair_terms(model, g, c, u, v, a);
        EXPECT_DOUBLE_EQ(t.edge + t.non_edge, model.membership_prob(c, u) * model.membership_prob(c, v));
      }
    }
  }
}

TEST(Perturbation, InvalidPairIsRejected) {
  const Graph g = testing::clique_graph(4);
  const auto model = testing::FixedModel::uniform(0.5);
  EXPECT_THROW(perturbed_edge_prob(model, g, 2, 2, PerturbationIntensity(0.1)), Error);
}

TEST(JointPairTerms, Substitution) {
  const Graph g = testing::clique_graph(4);
  const Community c = make_community("c", {0, 1}, 0, 4);
  const auto member = testing::FixedModel::uniform(0.7);
  const JointPairTerms t = joint_pair_terms(member, g, c, 0, 1, PerturbationIntensity(0.0));
  EXPECT_DOUBLE_EQ(t.edge, 0.7);
  EXPECT_DOUBLE_EQ(t.non_edge, 0.3);

  const testing::FixedModel outsider([](NodeId, NodeId) { return 0.5; },
                                     [](NodeId u) { return u == 0 ? 0.0 : 1.0; },
                                     [](NodeId, NodeId) { return 0.5; });
  const JointPairTerms z = joint_pair_terms(outsider, g, c, 0, 1, PerturbationIntensity(0.3));
  EXPECT_EQ(z.edge, 0.0);
  EXPECT_EQ(z.non_edge, 0.0);
}

TEST(AffiliationModel, ZeroWeightsGiveBackgroundEverywhere) {
  const AffiliationModel model(5, 2, 0.03);
  for (NodeId u = 0; u < 5; ++u) {
    for (NodeId v = u + 1; v < 5; ++v) EXPECT_DOUBLE_EQ(model.edge_prob(u, v), 0.03);
  }
  EXPECT_THROW(extract_cover(model), Error);
}

TEST(AffiliationModel, RejectsBadParameters) {
  EXPECT_THROW(AffiliationModel(3, 1, 0.0), Error);
  EXPECT_THROW(AffiliationModel(3, 1, 1.0), Error);
  EXPECT_THROW(AffiliationModel(2, 1, 0.1, {1.0, -1.0}), Error);
  EXPECT_THROW(AffiliationModel(2, 2, 0.1, {1.0}), Error);
}

TEST(AffiliationModel, ThresholdIsInclusive) {
  const double eps = 1.0 - std::exp(-1.0);
  EXPECT_NEAR(affiliation_threshold(eps), 1.0, 1e-15);
  // compute the threshold exactly as extract_cover will, then sit on it
  const double t = affiliation_threshold(eps);
  const AffiliationModel model(3, 1, eps, {t, 0.5, t});
  const Cover cover = extract_cover(model);
  ASSERT_EQ(cover.size(), 1u);
  EXPECT_EQ(cover[0].members, (std::vector<NodeId>{0, 2}));
}

TEST(AffiliationModel, ExtractCoverRecoversPlantedColumns) {
  std::vector<double> weights(8 * 3, 0.0);
  for (NodeId u = 0; u < 4; ++u) weights[u * 3 + 0] = 10.0;
  for (NodeId u = 4; u < 8; ++u) weights[u * 3 + 2] = 10.0;
  const Cover cover = extract_cover(AffiliationModel(8, 3, 0.1, weights));
  ASSERT_EQ(cover.size(), 2u);
  EXPECT_EQ(cover[0].members, (std::vector<NodeId>{0, 1, 2, 3}));
  EXPECT_EQ(cover[1].members, (std::vector<NodeId>{4, 5, 6, 7}));
  EXPECT_EQ(cover[1].name, "1");
  EXPECT_EQ(cover[1].source, 2u);
}

TEST(AffiliationFit, RecoversTwoCliques) {
  const Graph g = two_cliques(15);
  const AffiliationFit fit = fit_affiliation(g, {.num_communities = 2, .max_iters = 100, .seed = 4});
  const Cover cover = extract_cover(fit.model);
  std::vector<NodeId> left(15), right(15);
  for (NodeId u = 0; u < 15; ++u) {
    left[u] = u;
    right[u] = u + 15;
  }
  ASSERT_GE(cover.size(), 2u);
  double best_left = 0.0, best_right = 0.0;
  for (const Community& c : cover) {
    best_left = std::max(best_left, jaccard(left, c.members));
    best_right = std::max(best_right, jaccard(right, c.members));
  }
  EXPECT_GE(best_left, 0.9);
  EXPECT_GE(best_right, 0.9);
}

// Independent evaluator: every unordered pair visited explicitly.
double full_sum_log_likelihood(const Graph& g, const AffiliationModel& model) {
  double total = 0.0;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    for (NodeId v = u + 1; v < g.num_nodes(); ++v) {
      double x = 0.0;
      for (std::size_t c = 0; c < model.num_communities(); ++c) {
        x += model.weight(u, c) * model.weight(v, c);
      }
      total += g.has_edge(u, v) ? std::log(std::max(1.0 - std::exp(-x), 1e-300)) : -x;
    }
  }
  return total;
}

TEST(AffiliationFit, LogLikelihoodIsNonDecreasing) {
  Rng rng(99);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t n = 20 + uniform_below(rng, 180);
    const PlantedGraph planted = generate_sbm(
        SbmSpec{{n / 2, n - n / 2}, {0.3, 0.2}, 0.02}, 1000 + trial);
    const Graph& g = planted.graph;
    if (g.num_edges() == 0) continue;
    // refit with growing caps so each sweep's model can be evaluated independently
    double previous = -std::numeric_limits<double>::infinity();
    for (std::size_t iters = 0; iters <= 6; ++iters) {
      const AffiliationFit fit = fit_affiliation(
          g, {.num_communities = 3, .max_iters = iters, .seed = 7, .relative_tolerance = -1.0});
      const double value = full_sum_log_likelihood(g, fit.model);
      EXPECT_NEAR(value, fit.log_likelihood_trace.back(), 1e-8 * std::abs(value));
      EXPECT_GE(value, previous - 1e-9 * std::abs(value)) << "n=" << n << " sweep " << iters;
      previous = value;
    }
  }
}

TEST(AffiliationFit, RejectsBadCommunityCount) {
  const Graph g = testing::clique_graph(4);
  EXPECT_THROW(fit_affiliation(g, {.num_communities = 5}), Error);
  EXPECT_THROW(fit_affiliation(g, {.num_communities = 0}), Error);
}

TEST(AffiliationFit, BackgroundEpsIsClamped) {
  EXPECT_DOUBLE_EQ(affiliation_background_eps(testing::clique_graph(3)), 0.5);
  const Edge one[] = {{0, 1}};
  EXPECT_NEAR(affiliation_background_eps(Graph::from_edges(11, one)), 2.0 / 110.0, 1e-15);
}

TEST(AffiliationModel, SerializationRoundTrips) {
  Rng rng(2);
  const Graph g = testing::random_graph(rng, 12, 0.4);
  const AffiliationModel model = testing::random_affiliation(rng, 12, 3, 2.0);
  std::ostringstream out;
  write_affiliation_model(out, model, g);
  std::istringstream in(out.str());
  const AffiliationModel back = read_affiliation_model(in, g);
  EXPECT_EQ(back.num_communities(), 3u);
  EXPECT_DOUBLE_EQ(back.eps(), model.eps());
  EXPECT_EQ(back.weights(), model.weights());
}

TEST(EmpiricalModel, SmoothedDensityAndNoisyOr) {
  // n = 200, m = 199 gives a background rate of exactly 0.01
  std::vector<Edge> edges = {{0, 1}, {1, 2}, {0, 3}, {3, 4}};
  for (NodeId u = 5; u < 199; ++u) edges.emplace_back(u, u + 1);
  edges.emplace_back(5, 7);
  const Graph g = Graph::from_edges(200, edges);
  ASSERT_EQ(g.num_edges(), 199u);
  const Cover cover = {make_community("a", {0, 1, 2}, 0, 200),
                       make_community("b", {0, 1, 3, 4}, 1, 200)};
  const EmpiricalCoverModel model = empirical_model(g, cover);
  EXPECT_DOUBLE_EQ(model.density(0), 0.6);
  EXPECT_DOUBLE_EQ(model.density(1), 0.5);
  EXPECT_DOUBLE_EQ(model.background(), 0.01);
  EXPECT_NEAR(model.edge_prob(0, 1), 0.802, 1e-12);
  EXPECT_NEAR(model.edge_prob(10, 50), 0.01, 1e-15);
  EXPECT_NEAR(model.edge_prob(1, 2), 1.0 - 0.99 * 0.4, 1e-12);
  EXPECT_EQ(model.membership_prob(cover[0], 3), 0.0);
  EXPECT_EQ(model.community_edge_prob(cover[0], 0, 3), 0.0);
  EXPECT_DOUBLE_EQ(model.community_edge_prob(cover[1], 0, 3), 0.5);
}

TEST(EmpiricalModel, SingletonDensityIsOneHalf) {
  const Graph g = testing::clique_graph(4);
  const Cover cover = {make_community("s", {2}, 0, 4)};
  EXPECT_DOUBLE_EQ(empirical_model(g, cover).density(0), 0.5);
}

}  // namespace
}  // namespace commrank
