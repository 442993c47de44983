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

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "commrank/metrics.hpp"

namespace commrank {

// A ranked list holds one real-valued rank per community, 1 = best, with
// tied communities sharing the average of the positions they span.
using RankedList = std::vector<double>;

/// Ranks scores where higher is better.
RankedList to_ranked_list(std::span<const double> scores);

/// Community indices sorted by (rank, index).
std::vector<std::size_t> rank_order(std::span<const double> ranks);

struct AggregationParams {
  std::size_t bag_size = 50;
  double pi = 0.05;
  std::size_t max_iters = 20;
  // Replace K < 1 by 1, so that no bag can reverse the order of its members.
  bool clamp_weights = false;

  void validate() const;
};

struct BagAssignment {
  std::size_t num_bags = 0;
  std::vector<std::size_t> bag_of;     // per community, 0-based bag index
  std::vector<std::size_t> bag_sizes;  // per bag
};

/// B = max(3, floor(N / bag_size)); the community at position p (1-based, in
/// rank_order) goes to bag ceil(p B / N).
BagAssignment partition_bags(std::span<const double> ranks, std::size_t bag_size);

/// ((overlap + 1) / (bag_size - overlap + 1)) ((1 - pi) / pi).
double bayes_weight(std::size_t overlap, std::size_t bag_size, double pi);

/// Running median of three with extrapolated end points, repeated until a
/// pass changes nothing. Each pass takes interior medians from the previous
/// values, then applies the end point rules to the updated sequence.
std::vector<double> tukey_smooth(std::vector<double> weights);

/// S(C) = sum_r log(K_r[bag_r(C)]) R_r(C). Smaller is better.
std::vector<double> weighted_aggregate(std::span<const RankedList> lists,
                                       std::span<const BagAssignment> bags,
                                       std::span<const std::vector<double>> weights);

struct ScoreColumn {
  std::string name;
  std::vector<double> scores;  // higher is better, one per table row
};

/// The selected r_f columns of a metric table.
std::vector<ScoreColumn> metric_columns(const MetricTable& table,
                                        std::span<const Feature> features = kAllFeatures);

struct IterationRecord {
  // weights[list][bag] after smoothing
  std::vector<std::vector<double>> weights;
  std::size_t rank_changes = 0;  // communities whose rank moved
};

struct Prioritization {
  RankedList ranks;
  std::vector<double> scores;  // the aggregate the ranks were derived from
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::string> list_names;
  std::vector<BagAssignment> bags;
  std::vector<IterationRecord> trace;
};

/// Iterative Bayes-factor aggregation. Without `supervision` the top
/// ceil(pi N) communities of the current aggregate serve as the temporary
/// gold standard until the ranking stops changing; with it, the given row
/// indices are the gold standard and a single weighting pass is made.
Prioritization crank_aggregate(std::span<const ScoreColumn> columns, const AggregationParams& params,
                               const std::optional<std::vector<std::size_t>>& supervision = {});

enum class AggregatorKind { kCrank, kQuadraticMean, kBorda, kFootrule, kPickAPerm };

std::string_view aggregator_name(AggregatorKind kind);
AggregatorKind parse_aggregator_kind(std::string_view name);

inline constexpr std::size_t kDefaultFootruleLimit = 2000;

/// Minimum-cost assignment for a square row-major cost matrix. Returns the
/// column assigned to each row.
std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n);

/// sum_r |R_r(C) - position(C)| for positions given per community (1-based).
double footrule_cost(std::span<const RankedList> lists, std::span<const std::size_t> positions);

/// One of the four reference aggregators. Quadratic mean works on scores,
/// the others on the ranks derived from them.
Prioritization baseline_aggregate(AggregatorKind kind, std::span<const ScoreColumn> columns,
                                  std::uint64_t seed = 0,
                                  std::size_t footrule_limit = kDefaultFootruleLimit);

/// `community_id rank aggregated_score r_likelihood r_density r_boundary
/// r_allegiance size`, rows in rank order.
void write_prioritization(std::ostream& out, const MetricTable& table, const Prioritization& p);

nlohmann::json prioritization_diagnostics(const Prioritization& p, const AggregationParams& params,
                                          AggregatorKind kind);

}  // namespace commrank
