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

// Generators and fixed-probability models shared by the test suites.

#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "commrank/graph.hpp"
#include "commrank/prob_model.hpp"
#include "commrank/random.hpp"

namespace commrank::testing {

inline Graph random_graph(Rng& rng, std::size_t n, double p) {
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (uniform01(rng) < p) edges.emplace_back(u, v);
    }
  }
  return Graph::from_edges(n, edges);
}

inline Graph clique_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  }
  return Graph::from_edges(n, edges);
}

inline Community random_community(Rng& rng, std::size_t n, std::size_t size, std::size_t source = 0) {
  std::vector<NodeId> order(n);
  for (NodeId u = 0; u < n; ++u) order[u] = u;
  for (std::size_t i = 0; i < size; ++i) std::swap(order[i], order[i + uniform_below(rng, n - i)]);
  order.resize(size);
  return make_community(std::to_string(source), order, source, n);
}

inline Cover random_cover(Rng& rng, std::size_t n, std::size_t count, std::size_t min_size,
                          std::size_t max_size) {
  Cover cover;
  for (std::size_t c = 0; c < count; ++c) {
    const std::size_t size = min_size + uniform_below(rng, max_size - min_size + 1);
    cover.push_back(random_community(rng, n, std::min(size, n), c));
  }
  return cover;
}

inline AffiliationModel random_affiliation(Rng& rng, std::size_t n, std::size_t k, double scale) {
  std::vector<double> weights(n * k);
  for (double& w : weights) w = uniform01(rng) < 0.3 ? 0.0 : scale * uniform01(rng);
  return AffiliationModel(n, k, 0.01 + 0.2 * uniform01(rng), std::move(weights));
}

/// Probabilities given by callbacks, for pinning feature inputs exactly.
class FixedModel final : public EdgeProbabilityModel {
 public:
  using PairFn = std::function<double(NodeId, NodeId)>;
  using NodeFn = std::function<double(NodeId)>;

  FixedModel(PairFn edge, NodeFn membership, PairFn community_edge)
      : edge_(std::move(edge)), membership_(std::move(membership)),
        community_edge_(std::move(community_edge)) {}

  static FixedModel uniform(double p) {
    return FixedModel([p](NodeId, NodeId) { return p; }, [](NodeId) { return 1.0; },
                      [p](NodeId, NodeId) { return p; });
  }

  double edge_prob(NodeId u, NodeId v) const override { return edge_(u, v); }
  double membership_prob(const Community&, NodeId u) const override { return membership_(u); }
  double community_edge_prob(const Community&, NodeId u, NodeId v) const override {
    return community_edge_(u, v);
  }

 private:
  PairFn edge_;
  NodeFn membership_;
  PairFn community_edge_;
};

}  // namespace commrank::testing
