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

#include "commrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "commrank/error.hpp"
#include "commrank/parallel.hpp"
#include "commrank/random.hpp"
#include "commrank/text.hpp"

namespace commrank {

namespace {

constexpr double kProbabilityFloor = 1e-300;

// Running geometric mean; an exact zero factor pins the result to zero.
class GeometricMean {
 public:
  void add(double factor) {
    ++count_;
    if (factor <= 0.0) {
      zero_ = true;
      return;
    }
    log_sum_ += std::log(std::max(factor, kProbabilityFloor));
  }

  std::size_t count() const { return count_; }

  double value(double if_empty) const {
    if (count_ == 0) return if_empty;
    if (zero_) return 0.0;
    return std::exp(log_sum_ / static_cast<double>(count_));
  }

 private:
  double log_sum_ = 0.0;
  std::size_t count_ = 0;
  bool zero_ = false;
};

// Index-th node (0-based) of the sorted complement of `excluded` in [0, n).
NodeId nth_outside(const std::vector<NodeId>& excluded, std::uint64_t index) {
  std::size_t lo = 0, hi = excluded.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (excluded[mid] - mid > index) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return static_cast<NodeId>(index + lo);
}

double median_degree(const Graph& g) {
  std::vector<std::size_t> degrees(g.num_nodes());
  for (NodeId u = 0; u < g.num_nodes(); ++u) degrees[u] = g.degree(u);
  if (degrees.empty()) return 0.0;
  const std::size_t mid = degrees.size() / 2;
  std::nth_element(degrees.begin(), degrees.begin() + mid, degrees.end());
  const double upper = static_cast<double>(degrees[mid]);
  if (degrees.size() % 2 == 1) return upper;
  const double lower =
      static_cast<double>(*std::max_element(degrees.begin(), degrees.begin() + mid));
  return 0.5 * (lower + upper);
}

std::size_t internal_degree(const Graph& g, const Community& c, NodeId u) {
  std::size_t d = 0;
  for (NodeId v : g.neighbors(u)) d += c.contains(v) ? 1 : 0;
  return d;
}

double triangle_participation(const Graph& g, const Community& c) {
  // internal[i] = members adjacent to members[i], as sorted node ids
  std::vector<std::vector<NodeId>> internal(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (NodeId v : g.neighbors(c.members[i])) {
      if (c.contains(v)) internal[i].push_back(v);
    }
  }
  auto position = [&](NodeId v) {
    return static_cast<std::size_t>(
        std::lower_bound(c.members.begin(), c.members.end(), v) - c.members.begin());
  };
  std::size_t in_triangle = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    bool found = false;
    for (NodeId v : internal[i]) {
      const auto& a = internal[i];
      const auto& b = internal[position(v)];
      auto x = a.begin();
      auto y = b.begin();
      while (x != a.end() && y != b.end()) {
        if (*x < *y) {
          ++x;
        } else if (*y < *x) {
          ++y;
        } else {
          found = true;
          break;
        }
      }
      if (found) break;
    }
    in_triangle += found ? 1 : 0;
  }
  return static_cast<double>(in_triangle) / static_cast<double>(c.size());
}

double baseline_with_median(BaselineKind kind, const Graph& g, const Community& c,
                            std::uint64_t seed, std::uint64_t community_id, double median) {
  const double size = static_cast<double>(c.size());
  switch (kind) {
    case BaselineKind::kConductance: {
      const auto cut = cut_counts(g, c);
      const double volume = 2.0 * static_cast<double>(cut.internal) + static_cast<double>(cut.boundary);
      const double raw = volume == 0.0 ? 1.0 : static_cast<double>(cut.boundary) / volume;
      return 1.0 - raw;
    }
    case BaselineKind::kModularity: {
      const auto cut = cut_counts(g, c);
      double degree_sum = 0.0;
      for (NodeId u : c.members) degree_sum += static_cast<double>(g.degree(u));
      const double m = static_cast<double>(g.num_edges());
      return static_cast<double>(cut.internal) - (m == 0.0 ? 0.0 : degree_sum * degree_sum / (4.0 * m));
    }
    case BaselineKind::kCutRatio: {
      const auto cut = cut_counts(g, c);
      const double outside = static_cast<double>(g.num_nodes()) - size;
      const double raw = outside == 0.0 ? 0.0 : static_cast<double>(cut.boundary) / (size * outside);
      return 1.0 - raw;
    }
    case BaselineKind::kTpr:
      return triangle_participation(g, c);
    case BaselineKind::kFomd: {
      std::size_t above = 0;
      for (NodeId u : c.members) above += static_cast<double>(internal_degree(g, c, u)) > median ? 1 : 0;
      return static_cast<double>(above) / size;
    }
    case BaselineKind::kFlakeOdf: {
      std::size_t leaning_out = 0;
      for (NodeId u : c.members) {
        const std::size_t in = internal_degree(g, c, u);
        leaning_out += g.degree(u) - in > in ? 1 : 0;
      }
      return 1.0 - static_cast<double>(leaning_out) / size;
    }
    case BaselineKind::kSize:
      return -size;
    case BaselineKind::kRandom: {
      Rng rng = make_rng(seed, Stream::kRandomBaseline, community_id);
      return uniform01(rng);
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown baseline kind");
}

}  // namespace

double likelihood_feature(const EdgeProbabilityModel& model, const Graph& g, const Community& c,
                          PerturbationIntensity a) {
  if (c.size() < 2) {
    throw Error(ErrorCode::kDegenerateCommunity,
                "community '" + c.name + "' needs at least two members for the likelihood");
  }
  std::vector<double> membership(c.size());
  GeometricMean mean;
  for (std::size_t i = 0; i < c.size(); ++i) {
    membership[i] = model.membership_prob(c, c.members[i]);
    mean.add(membership[i]);
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    const NodeId u = c.members[i];
    auto nbr = g.neighbors(u);
    auto it = std::upper_bound(nbr.begin(), nbr.end(), u);
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      const NodeId v = c.members[j];
      while (it != nbr.end() && *it < v) ++it;
      const bool edge = it != nbr.end() && *it == v;
      const double p = edge ? perturbed_community_edge_prob(model, g, c, u, v, a)
                            : perturbed_community_non_edge_prob(model, g, c, u, v, a);
      mean.add(membership[j] * p);
    }
  }
  return mean.value(0.0);
}

double density_feature(const EdgeProbabilityModel& model, const Graph& g, const Community& c,
                       PerturbationIntensity a) {
  GeometricMean mean;
  for (NodeId u : c.members) {
    for (NodeId v : g.neighbors(u)) {
      if (u < v && c.contains(v)) mean.add(perturbed_edge_prob(model, g, u, v, a));
    }
  }
  return mean.value(0.0);
}

double boundary_feature(const EdgeProbabilityModel& model, const Graph& g, const Community& c,
                        PerturbationIntensity a, std::size_t samples, std::uint64_t seed,
                        std::uint64_t community_id) {
  GeometricMean mean;
  std::vector<NodeId> excluded(c.members);
  for (NodeId u : c.members) {
    for (NodeId v : g.neighbors(u)) {
      if (c.contains(v)) continue;
      mean.add(perturbed_non_edge_prob(model, g, u, v, a));
      excluded.push_back(v);
    }
  }
  if (samples > 0) {
    std::sort(excluded.begin(), excluded.end());
    excluded.erase(std::unique(excluded.begin(), excluded.end()), excluded.end());
    const std::uint64_t exterior = g.num_nodes() - excluded.size();
    if (exterior > 0) {
      Rng rng = make_rng(seed, Stream::kBoundarySampling, community_id);
      for (NodeId u : c.members) {
        for (std::size_t i = 0; i < samples; ++i) {
          const NodeId v = nth_outside(excluded, uniform_below(rng, exterior));
          mean.add(perturbed_non_edge_prob(model, g, u, v, a));
        }
      }
    }
  }
  return mean.value(1.0);
}

double allegiance_feature(const EdgeProbabilityModel& model, const Graph& g, const Community& c,
                          PerturbationIntensity a) {
  if (c.size() == 0) return 0.0;
  std::size_t loyal = 0;
  for (NodeId u : c.members) {
    double inside = 0.0, outside = 0.0;
    for (NodeId v : g.neighbors(u)) {
      const double p = perturbed_edge_prob(model, g, u, v, a);
      (c.contains(v) ? inside : outside) += p;
    }
    loyal += inside >= outside ? 1 : 0;
  }
  return static_cast<double>(loyal) / static_cast<double>(c.size());
}

double adjust_metric(double original, double perturbed) {
  return original / (1.0 + std::abs(original - perturbed));
}

std::string_view feature_name(Feature f) {
  switch (f) {
    case Feature::kLikelihood: return "likelihood";
    case Feature::kDensity: return "density";
    case Feature::kBoundary: return "boundary";
    case Feature::kAllegiance: return "allegiance";
  }
  return "unknown";
}

std::string_view baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kConductance: return "conductance";
    case BaselineKind::kModularity: return "modularity";
    case BaselineKind::kCutRatio: return "cut-ratio";
    case BaselineKind::kTpr: return "tpr";
    case BaselineKind::kFomd: return "fomd";
    case BaselineKind::kFlakeOdf: return "flake-odf";
    case BaselineKind::kSize: return "size";
    case BaselineKind::kRandom: return "random";
  }
  return "unknown";
}

BaselineKind parse_baseline_kind(std::string_view name) {
  for (auto kind : {BaselineKind::kConductance, BaselineKind::kModularity, BaselineKind::kCutRatio,
                    BaselineKind::kTpr, BaselineKind::kFomd, BaselineKind::kFlakeOdf,
                    BaselineKind::kSize, BaselineKind::kRandom}) {
    if (baseline_name(kind) == name) return kind;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown baseline metric '" + std::string(name) + "'");
}

double baseline_score(BaselineKind kind, const Graph& g, const Community& c, std::uint64_t seed,
                      std::uint64_t community_id) {
  const double median = kind == BaselineKind::kFomd ? median_degree(g) : 0.0;
  return baseline_with_median(kind, g, c, seed, community_id, median);
}

std::size_t default_negative_samples(std::size_t num_nodes) {
  return num_nodes < 100000 ? 10 : 3;
}

MetricTable compute_metric_table(const EdgeProbabilityModel& model, const Graph& g,
                                 const Cover& cover, const MetricOptions& options) {
  if (cover.empty()) throw Error(ErrorCode::kEmptyCover, "cover has no communities");
  const PerturbationIntensity original(0.0);
  const PerturbationIntensity perturbed(options.alpha);
  const std::size_t samples = options.negative_samples == 0
                                  ? default_negative_samples(g.num_nodes())
                                  : options.negative_samples;
  const double median = median_degree(g);

  struct Slot {
    MetricRow row;
    std::string failure;
  };
  std::vector<Slot> slots(cover.size());
  parallel_for(cover.size(), options.workers, [&](std::size_t i) {
    const Community& c = cover[i];
    Slot& slot = slots[i];
    slot.row.community = i;
    slot.row.name = c.name;
    slot.row.size = c.size();
    try {
      auto evaluate = [&](PerturbationIntensity a) {
        return std::array<double, 4>{
            likelihood_feature(model, g, c, a), density_feature(model, g, c, a),
            boundary_feature(model, g, c, a, samples, options.seed, i),
            allegiance_feature(model, g, c, a)};
      };
      slot.row.original = evaluate(original);
      slot.row.perturbed = evaluate(perturbed);
      for (std::size_t f = 0; f < 4; ++f) {
        slot.row.score[f] = adjust_metric(slot.row.original[f], slot.row.perturbed[f]);
      }
      for (auto kind : options.baselines) {
        slot.row.baselines.push_back(baseline_with_median(kind, g, c, options.seed, i, median));
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateCommunity) throw;
      slot.failure = e.what();
    }
  });

  MetricTable table;
  table.baseline_kinds = options.baselines;
  for (auto& slot : slots) {
    if (slot.failure.empty()) {
      table.rows.push_back(std::move(slot.row));
    } else {
      table.excluded.push_back({slot.row.community, slot.row.name, slot.failure});
    }
  }
  return table;
}

void write_metric_table(std::ostream& out, const MetricTable& table) {
  out << "community_id\tsize\tr_likelihood\tr_density\tr_boundary\tr_allegiance";
  for (auto kind : table.baseline_kinds) out << '\t' << baseline_name(kind);
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.name << '\t' << row.size;
    for (double s : row.score) out << '\t' << format_double(s);
    for (double b : row.baselines) out << '\t' << format_double(b);
    out << '\n';
  }
}

}  // namespace commrank
