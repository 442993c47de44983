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

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "commrank/graph.hpp"
#include "commrank/prob_model.hpp"

namespace commrank {

// Every feature is a geometric mean of probability factors (or a fraction),
// so values lie in [0, 1] regardless of community size.

/// Joint probability of the community's internal edges and non-edges.
double likelihood_feature(const EdgeProbabilityModel& model, const Graph& g, const Community& c,
                          PerturbationIntensity a);

/// Geometric mean of p(u,v|alpha) over internal edges; 0 without internal edges.
double density_feature(const EdgeProbabilityModel& model, const Graph& g, const Community& c,
                       PerturbationIntensity a);

/// Geometric mean of 1 - p(u,v|alpha) over boundary edges plus, per member,
/// `samples` exterior nodes drawn uniformly with replacement from the nodes
/// with no edge into c. The draw depends only on (seed, community_id), so
/// evaluations at different alpha see the same sample. Returns 1 when there
/// is no factor at all.
double boundary_feature(const EdgeProbabilityModel& model, const Graph& g, const Community& c,
                        PerturbationIntensity a, std::size_t samples, std::uint64_t seed,
                        std::uint64_t community_id);

/// Fraction of members whose summed edge probability into c is at least the
/// summed probability of their edges leaving c.
double allegiance_feature(const EdgeProbabilityModel& model, const Graph& g, const Community& c,
                          PerturbationIntensity a);

/// f0 / (1 + |f0 - fa|).
double adjust_metric(double original, double perturbed);

enum class Feature { kLikelihood = 0, kDensity = 1, kBoundary = 2, kAllegiance = 3 };
inline constexpr std::array<Feature, 4> kAllFeatures = {
    Feature::kLikelihood, Feature::kDensity, Feature::kBoundary, Feature::kAllegiance};
std::string_view feature_name(Feature f);

enum class BaselineKind {
  kConductance,
  kModularity,
  kCutRatio,
  kTpr,
  kFomd,
  kFlakeOdf,
  kSize,
  kRandom,
};

std::string_view baseline_name(BaselineKind kind);
BaselineKind parse_baseline_kind(std::string_view name);

/// Classic community scoring functions, oriented so that higher is better.
double baseline_score(BaselineKind kind, const Graph& g, const Community& c,
                      std::uint64_t seed = 0, std::uint64_t community_id = 0);

/// 10 below 100k nodes, else 3.
std::size_t default_negative_samples(std::size_t num_nodes);

struct MetricOptions {
  double alpha = 0.15;
  std::size_t negative_samples = 0;  // 0 selects default_negative_samples
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::vector<BaselineKind> baselines;
};

struct MetricRow {
  std::size_t community = 0;  // index into the cover
  std::string name;
  std::size_t size = 0;
  std::array<double, 4> original{};   // f at alpha = 0
  std::array<double, 4> perturbed{};  // f at alpha = alpha0
  std::array<double, 4> score{};      // r_f
  std::vector<double> baselines;      // parallel to MetricTable::baseline_kinds
};

struct ExcludedCommunity {
  std::size_t community = 0;
  std::string name;
  std::string reason;
};

struct MetricTable {
  std::vector<BaselineKind> baseline_kinds;
  std::vector<MetricRow> rows;
  std::vector<ExcludedCommunity> excluded;
};

/// Scores every community of the cover at alpha = 0 and alpha = alpha0.
/// Communities that cannot be scored (fewer than two members) are listed in
/// `excluded` instead of `rows`. The result does not depend on `workers`.
MetricTable compute_metric_table(const EdgeProbabilityModel& model, const Graph& g,
                                 const Cover& cover, const MetricOptions& options);

/// `community_id size r_likelihood r_density r_boundary r_allegiance [baselines]`.
void write_metric_table(std::ostream& out, const MetricTable& table);

}  // namespace commrank
