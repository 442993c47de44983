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

#include "commrank/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "commrank/error.hpp"
#include "commrank/random.hpp"
#include "commrank/text.hpp"

namespace commrank {

namespace {

constexpr std::size_t kMaxSmoothingPasses = 10000;

double median3(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

std::size_t column_length(std::span<const ScoreColumn> columns) {
  if (columns.empty()) throw Error(ErrorCode::kInvalidArgument, "no score columns to aggregate");
  const std::size_t n = columns.front().scores.size();
  for (const auto& column : columns) {
    if (column.scores.size() != n) {
      throw Error(ErrorCode::kInput, "score column '" + column.name + "' has " +
                                         std::to_string(column.scores.size()) +
                                         " entries, expected " + std::to_string(n));
    }
  }
  return n;
}

std::vector<RankedList> rank_columns(std::span<const ScoreColumn> columns) {
  std::vector<RankedList> lists;
  lists.reserve(columns.size());
  for (const auto& column : columns) lists.push_back(to_ranked_list(column.scores));
  return lists;
}

std::vector<double> mean_rank(std::span<const RankedList> lists, std::size_t n) {
  std::vector<double> mean(n, 0.0);
  for (const auto& list : lists) {
    for (std::size_t i = 0; i < n; ++i) mean[i] += list[i];
  }
  for (double& x : mean) x /= static_cast<double>(lists.size());
  return mean;
}

RankedList rank_ascending(std::span<const double> values) {
  std::vector<double> negated(values.size());
  std::transform(values.begin(), values.end(), negated.begin(), [](double x) { return -x; });
  return to_ranked_list(negated);
}

std::vector<std::string> column_names(std::span<const ScoreColumn> columns) {
  std::vector<std::string> names;
  for (const auto& column : columns) names.push_back(column.name);
  return names;
}

std::vector<std::vector<double>> bag_weights(std::span<const BagAssignment> bags,
                                             const std::vector<char>& in_gold,
                                             const AggregationParams& params) {
  std::vector<std::vector<double>> weights;
  weights.reserve(bags.size());
  for (const auto& assignment : bags) {
    std::vector<std::size_t> overlap(assignment.num_bags, 0);
    for (std::size_t c = 0; c < in_gold.size(); ++c) {
      if (in_gold[c]) ++overlap[assignment.bag_of[c]];
    }
    std::vector<double> k(assignment.num_bags);
    for (std::size_t j = 0; j < assignment.num_bags; ++j) {
      k[j] = bayes_weight(overlap[j], assignment.bag_sizes[j], params.pi);
    }
    k = tukey_smooth(std::move(k));
    if (params.clamp_weights) {
      for (double& x : k) x = std::max(x, 1.0);
    }
    weights.push_back(std::move(k));
  }
  return weights;
}

std::size_t count_changes(const RankedList& a, const RankedList& b) {
  std::size_t changes = 0;
  for (std::size_t i = 0; i < a.size(); ++i) changes += a[i] != b[i] ? 1 : 0;
  return changes;
}

}  // namespace

RankedList to_ranked_list(std::span<const double> scores) {
  for (double s : scores) {
    if (!std::isfinite(s)) throw Error(ErrorCode::kInvalidArgument, "cannot rank a non-finite score");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  RankedList ranks(scores.size());
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo + 1;
    while (hi < order.size() && scores[order[hi]] == scores[order[lo]]) ++hi;
    // positions lo+1 .. hi share their mean
    const double rank = 0.5 * static_cast<double>(lo + 1 + hi);
    for (std::size_t k = lo; k < hi; ++k) ranks[order[k]] = rank;
    lo = hi;
  }
  return ranks;
}

std::vector<std::size_t> rank_order(std::span<const double> ranks) {
  std::vector<std::size_t> order(ranks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ranks[a] < ranks[b]; });
  return order;
}

void AggregationParams::validate() const {
  if (bag_size < 1) throw Error(ErrorCode::kInvalidArgument, "bag size must be at least 1");
  if (!(pi > 0.0 && pi < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "pi must lie strictly between 0 and 1");
  }
  if (max_iters < 1) throw Error(ErrorCode::kInvalidArgument, "max iterations must be at least 1");
}

BagAssignment partition_bags(std::span<const double> ranks, std::size_t bag_size) {
  const std::size_t n = ranks.size();
  if (n < 3) {
    throw Error(ErrorCode::kTooFewCommunities,
                "at least 3 communities are needed, got " + std::to_string(n));
  }
  if (bag_size < 1) throw Error(ErrorCode::kInvalidArgument, "bag size must be at least 1");
  BagAssignment result;
  result.num_bags = std::max<std::size_t>(3, n / bag_size);
  result.bag_of.resize(n);
  result.bag_sizes.assign(result.num_bags, 0);
  const auto order = rank_order(ranks);
  for (std::size_t p = 1; p <= n; ++p) {
    const std::size_t bag = (p * result.num_bags + n - 1) / n - 1;
    result.bag_of[order[p - 1]] = bag;
    ++result.bag_sizes[bag];
  }
  return result;
}

double bayes_weight(std::size_t overlap, std::size_t bag_size, double pi) {
  if (overlap > bag_size) {
    throw Error(ErrorCode::kInvalidArgument, "bag overlap exceeds the bag size");
  }
  const double o = static_cast<double>(overlap);
  const double b = static_cast<double>(bag_size);
  return ((o + 1.0) / (b - o + 1.0)) * ((1.0 - pi) / pi);
}

std::vector<double> tukey_smooth(std::vector<double> weights) {
  const std::size_t n = weights.size();
  if (n < 3) return weights;
  std::vector<double> next(n);
  for (std::size_t pass = 0; pass < kMaxSmoothingPasses; ++pass) {
    next.front() = weights.front();
    next.back() = weights.back();
    for (std::size_t i = 1; i + 1 < n; ++i) {
      next[i] = median3(weights[i - 1], weights[i], weights[i + 1]);
    }
    next[0] = median3(next[0], next[1], 3.0 * next[1] - 2.0 * next[2]);
    next[n - 1] = median3(next[n - 1], next[n - 2], 3.0 * next[n - 2] - 2.0 * next[n - 3]);
    if (next == weights) break;
    std::swap(weights, next);
  }
  return weights;
}

std::vector<double> weighted_aggregate(std::span<const RankedList> lists,
                                       std::span<const BagAssignment> bags,
                                       std::span<const std::vector<double>> weights) {
  if (lists.empty()) throw Error(ErrorCode::kInvalidArgument, "no ranked lists to aggregate");
  if (bags.size() != lists.size() || weights.size() != lists.size()) {
    throw Error(ErrorCode::kInput, "every ranked list needs one bag assignment and weight vector");
  }
  const std::size_t n = lists.front().size();
  std::vector<double> s(n, 0.0);
  for (std::size_t r = 0; r < lists.size(); ++r) {
    if (lists[r].size() != n || bags[r].bag_of.size() != n) {
      throw Error(ErrorCode::kInput, "ranked lists cover different community sets");
    }
    if (weights[r].size() != bags[r].num_bags) {
      throw Error(ErrorCode::kInput, "weight vector does not match the bag count");
    }
    for (double k : weights[r]) {
      if (!(k > 0.0)) throw Error(ErrorCode::kInvalidArgument, "bag weights must be positive");
    }
    for (std::size_t c = 0; c < n; ++c) {
      s[c] += std::log(weights[r][bags[r].bag_of[c]]) * lists[r][c];
    }
  }
  return s;
}

std::vector<ScoreColumn> metric_columns(const MetricTable& table, std::span<const Feature> features) {
  std::vector<ScoreColumn> columns;
  for (Feature f : features) {
    ScoreColumn column{"r_" + std::string(feature_name(f)), {}};
    column.scores.reserve(table.rows.size());
    for (const auto& row : table.rows) column.scores.push_back(row.score[static_cast<int>(f)]);
    columns.push_back(std::move(column));
  }
  return columns;
}

Prioritization crank_aggregate(std::span<const ScoreColumn> columns, const AggregationParams& params,
                               const std::optional<std::vector<std::size_t>>& supervision) {
  params.validate();
  const std::size_t n = column_length(columns);
  Prioritization result;
  result.list_names = column_names(columns);
  const auto lists = rank_columns(columns);
  for (const auto& list : lists) result.bags.push_back(partition_bags(list, params.bag_size));

  std::vector<char> in_gold(n, 0);
  auto update = [&](const std::vector<char>& gold) {
    IterationRecord record;
    record.weights = bag_weights(result.bags, gold, params);
    result.scores = weighted_aggregate(lists, result.bags, record.weights);
    RankedList next = rank_ascending(result.scores);
    record.rank_changes = count_changes(result.ranks, next);
    result.ranks = std::move(next);
    result.trace.push_back(std::move(record));
    ++result.iterations;
  };

  result.ranks = rank_ascending(mean_rank(lists, n));

  if (supervision) {
    if (supervision->empty()) throw Error(ErrorCode::kInput, "supervision set is empty");
    for (std::size_t c : *supervision) {
      if (c >= n) {
        throw Error(ErrorCode::kInput, "supervision refers to unknown community " + std::to_string(c));
      }
      in_gold[c] = 1;
    }
    update(in_gold);
    result.converged = true;
    return result;
  }

  const double raw_size = std::ceil(params.pi * static_cast<double>(n) - 1e-9);
  const std::size_t gold_size = std::clamp<std::size_t>(static_cast<std::size_t>(raw_size), 1, n);
  while (result.iterations < params.max_iters) {
    const auto order = rank_order(result.ranks);
    std::fill(in_gold.begin(), in_gold.end(), 0);
    for (std::size_t k = 0; k < gold_size; ++k) in_gold[order[k]] = 1;
    update(in_gold);
    if (result.trace.back().rank_changes == 0) {
      result.converged = true;
      break;
    }
  }
  return result;
}

std::string_view aggregator_name(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::kCrank: return "crank";
    case AggregatorKind::kQuadraticMean: return "quadratic";
    case AggregatorKind::kBorda: return "borda";
    case AggregatorKind::kFootrule: return "footrule";
    case AggregatorKind::kPickAPerm: return "pick-a-perm";
  }
  return "unknown";
}

AggregatorKind parse_aggregator_kind(std::string_view name) {
  if (name == "quadratic-mean") return AggregatorKind::kQuadraticMean;
  for (auto kind : {AggregatorKind::kCrank, AggregatorKind::kQuadraticMean, AggregatorKind::kBorda,
                    AggregatorKind::kFootrule, AggregatorKind::kPickAPerm}) {
    if (aggregator_name(kind) == name) return kind;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown aggregator '" + std::string(name) + "'");
}

std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw Error(ErrorCode::kInvalidArgument, "cost matrix is not square");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // Shortest augmenting paths with potentials, 1-based with a sentinel column 0.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), min_slack(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double slack = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (slack < min_slack[j]) {
          min_slack[j] = slack;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
  return assignment;
}

double footrule_cost(std::span<const RankedList> lists, std::span<const std::size_t> positions) {
  double total = 0.0;
  for (const auto& list : lists) {
    for (std::size_t c = 0; c < positions.size(); ++c) {
      total += std::abs(list[c] - static_cast<double>(positions[c]));
    }
  }
  return total;
}

Prioritization baseline_aggregate(AggregatorKind kind, std::span<const ScoreColumn> columns,
                                  std::uint64_t seed, std::size_t footrule_limit) {
  const std::size_t n = column_length(columns);
  Prioritization result;
  result.list_names = column_names(columns);
  result.iterations = 1;
  result.converged = true;
  switch (kind) {
    case AggregatorKind::kCrank:
      throw Error(ErrorCode::kInvalidArgument, "crank is not a baseline aggregator");
    case AggregatorKind::kQuadraticMean: {
      result.scores.assign(n, 0.0);
      for (const auto& column : columns) {
        for (std::size_t c = 0; c < n; ++c) result.scores[c] += column.scores[c] * column.scores[c];
      }
      for (double& s : result.scores) s = std::sqrt(s / static_cast<double>(columns.size()));
      result.ranks = to_ranked_list(result.scores);
      break;
    }
    case AggregatorKind::kBorda: {
      const auto lists = rank_columns(columns);
      result.scores = mean_rank(lists, n);
      result.ranks = rank_ascending(result.scores);
      break;
    }
    case AggregatorKind::kFootrule: {
      if (n > footrule_limit) {
        throw Error(ErrorCode::kSizeLimit, "footrule aggregation is limited to " +
                                               std::to_string(footrule_limit) +
                                               " communities; use borda instead");
      }
      const auto lists = rank_columns(columns);
      std::vector<double> cost(n * n, 0.0);
      for (const auto& list : lists) {
        for (std::size_t c = 0; c < n; ++c) {
          for (std::size_t p = 0; p < n; ++p) {
            cost[c * n + p] += std::abs(list[c] - static_cast<double>(p + 1));
          }
        }
      }
      const auto assignment = solve_assignment(cost, n);
      result.scores.resize(n);
      result.ranks.resize(n);
      for (std::size_t c = 0; c < n; ++c) {
        result.scores[c] = static_cast<double>(assignment[c] + 1);
        result.ranks[c] = result.scores[c];
      }
      break;
    }
    case AggregatorKind::kPickAPerm: {
      Rng rng = make_rng(seed, Stream::kPickAPerm);
      const auto chosen = uniform_below(rng, columns.size());
      result.list_names = {columns[chosen].name};
      result.scores = columns[chosen].scores;
      result.ranks = to_ranked_list(result.scores);
      break;
    }
  }
  return result;
}

void write_prioritization(std::ostream& out, const MetricTable& table, const Prioritization& p) {
  if (p.ranks.size() != table.rows.size()) {
    throw Error(ErrorCode::kInput, "prioritization does not match the metric table");
  }
  out << "community_id\trank\taggregated_score\tr_likelihood\tr_density\tr_boundary\tr_allegiance\tsize\n";
  for (std::size_t c : rank_order(p.ranks)) {
    const auto& row = table.rows[c];
    out << row.name << '\t' << format_double(p.ranks[c]) << '\t' << format_double(p.scores[c]);
    for (double s : row.score) out << '\t' << format_double(s);
    out << '\t' << row.size << '\n';
  }
}

nlohmann::json prioritization_diagnostics(const Prioritization& p, const AggregationParams& params,
                                          AggregatorKind kind) {
  nlohmann::json doc;
  doc["aggregator"] = aggregator_name(kind);
  doc["parameters"] = {{"bag_size", params.bag_size},
                       {"pi", params.pi},
                       {"max_iters", params.max_iters},
                       {"clamp_weights", params.clamp_weights}};
  doc["communities"] = p.ranks.size();
  doc["iterations"] = p.iterations;
  doc["converged"] = p.converged;
  doc["lists"] = p.list_names;
  auto bags = nlohmann::json::array();
  for (const auto& b : p.bags) bags.push_back({{"num_bags", b.num_bags}, {"sizes", b.bag_sizes}});
  doc["bags"] = bags;
  auto trace = nlohmann::json::array();
  for (std::size_t i = 0; i < p.trace.size(); ++i) {
    trace.push_back({{"iteration", i + 1},
                     {"rank_changes", p.trace[i].rank_changes},
                     {"weights", p.trace[i].weights}});
  }
  doc["trace"] = trace;
  return doc;
}

}  // namespace commrank
