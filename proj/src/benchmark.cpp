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

#include "commrank/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <ostream>
#include <set>

#include "commrank/error.hpp"
#include "commrank/metrics.hpp"
#include "commrank/parallel.hpp"
#include "commrank/prob_model.hpp"
#include "commrank/random.hpp"
#include "commrank/text.hpp"

namespace commrank {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

// Calls emit(k) for each k in [0, total) selected independently with
// probability p, skipping geometrically between hits.
template <typename Emit>
void bernoulli_positions(Rng& rng, std::uint64_t total, double p, Emit&& emit) {
  if (p <= 0.0 || total == 0) return;
  if (p >= 1.0) {
    for (std::uint64_t k = 0; k < total; ++k) emit(k);
    return;
  }
  const double log_q = std::log1p(-p);
  double k = -1.0;
  for (;;) {
    const double u = uniform01(rng);
    k += 1.0 + std::floor(std::log1p(-u) / log_q);
    if (k >= static_cast<double>(total)) return;
    emit(static_cast<std::uint64_t>(k));
  }
}

bool is_aggregator(const std::string& method) {
  try {
    parse_aggregator_kind(method);
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::vector<BaselineKind> baselines_for(const std::vector<std::string>& methods) {
  std::vector<BaselineKind> kinds;
  for (const auto& m : methods) {
    if (!is_aggregator(m)) kinds.push_back(parse_baseline_kind(m));
  }
  return kinds;
}

Cover noisy_cover(const Cover& truth, std::size_t num_nodes, double noise, std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::kNoise);
  std::vector<std::vector<NodeId>> members(truth.size());
  for (std::size_t c = 0; c < truth.size(); ++c) {
    for (NodeId u : truth[c].members) {
      std::size_t target = c;
      if (truth.size() > 1 && uniform01(rng) < noise) {
        target = uniform_below(rng, truth.size() - 1);
        if (target >= c) ++target;
      }
      members[target].push_back(u);
    }
  }
  Cover cover;
  for (std::size_t c = 0; c < truth.size(); ++c) {
    cover.push_back(make_community(truth[c].name, std::move(members[c]), c, num_nodes));
  }
  return cover;
}

bool is_trial_failure(ErrorCode code) {
  return code == ErrorCode::kEmptyCover || code == ErrorCode::kTooFewCommunities ||
         code == ErrorCode::kEmptyInput;
}

TrialResult run_trial(const BenchmarkConfig& config, std::size_t trial) {
  TrialResult result;
  result.trial = trial;
  result.rho.assign(config.methods.size(), std::nullopt);
  result.undefined.assign(config.methods.size(), "");
  const std::uint64_t seed = derive_seed(config.seed, Stream::kBenchmarkTrial, trial);
  try {
    const PlantedGraph planted = generate_sbm(config.sbm, seed);
    const Graph& g = planted.graph;
    if (g.num_edges() == 0) throw Error(ErrorCode::kEmptyInput, "generated graph has no edges");

    std::unique_ptr<EdgeProbabilityModel> model;
    Cover cover;
    if (config.mode == DetectionMode::kFit) {
      AffiliationFitOptions fit_options;
      fit_options.num_communities =
          config.num_communities == 0 ? config.sbm.sizes.size() : config.num_communities;
      fit_options.max_iters = config.detector_iters;
      fit_options.seed = seed;
      auto fit = fit_affiliation(g, fit_options);
      cover = extract_cover(fit.model);
      model = std::make_unique<AffiliationModel>(std::move(fit.model));
    } else {
      cover = noisy_cover(planted.truth, g.num_nodes(), config.noise, seed);
      model = std::make_unique<EmpiricalCoverModel>(g, cover);
    }

    MetricOptions metric_options;
    metric_options.alpha = config.alpha;
    metric_options.negative_samples = config.negative_samples;
    metric_options.seed = seed;
    metric_options.baselines = baselines_for(config.methods);
    const MetricTable table = compute_metric_table(*model, g, cover, metric_options);
    result.communities = table.rows.size();
    if (table.rows.size() < 3) {
      throw Error(ErrorCode::kTooFewCommunities,
                  "only " + std::to_string(table.rows.size()) + " communities could be scored");
    }

    Cover scored;
    for (const auto& row : table.rows) scored.push_back(cover[row.community]);
    const GoldStandard gold = gold_standard_ranking(scored, planted.truth);
    const auto columns = metric_columns(table);

    std::size_t baseline_index = 0;
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      const std::string& method = config.methods[m];
      RankedList ranks;
      if (method == "crank") {
        const auto p = crank_aggregate(columns, config.aggregation);
        result.crank_iterations = p.iterations;
        result.crank_converged = p.converged;
        ranks = p.ranks;
      } else if (is_aggregator(method)) {
        ranks = baseline_aggregate(parse_aggregator_kind(method), columns, seed).ranks;
      } else {
        std::vector<double> scores;
        for (const auto& row : table.rows) scores.push_back(row.baselines[baseline_index]);
        ++baseline_index;
        ranks = to_ranked_list(scores);
      }
      try {
        result.rho[m] = spearman(ranks, gold.ranks);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kUndefinedCorrelation) throw;
        result.undefined[m] = e.what();
      }
    }
  } catch (const Error& e) {
    if (!is_trial_failure(e.code())) throw;
    result.failed = true;
    result.failure = e.what();
  }
  return result;
}

nlohmann::json optional_number(std::optional<double> x) {
  return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

}  // namespace

void SbmSpec::validate() const {
  if (sizes.empty()) throw Error(ErrorCode::kInvalidArgument, "SBM spec has no communities");
  if (p_in.size() != sizes.size()) {
    throw Error(ErrorCode::kInvalidArgument, "SBM spec needs one p_in per community (" +
                                                 std::to_string(sizes.size()) + " sizes, " +
                                                 std::to_string(p_in.size()) + " p_in values)");
  }
  std::size_t total = 0;
  for (std::size_t s : sizes) {
    if (s < 1) throw Error(ErrorCode::kInvalidArgument, "SBM community sizes must be at least 1");
    total += s;
  }
  if (total < 2) throw Error(ErrorCode::kInvalidArgument, "SBM spec needs at least 2 nodes");
  for (double p : p_in) {
    if (!is_probability(p)) throw Error(ErrorCode::kInvalidArgument, "p_in must lie in [0, 1]");
  }
  if (!is_probability(p_out)) throw Error(ErrorCode::kInvalidArgument, "p_out must lie in [0, 1]");
}

SbmSpec figure2_spec() {
  SbmSpec spec;
  spec.sizes.assign(10, 30);
  spec.p_in = {0.6, 0.6, 0.6, 0.6, 0.6, 0.2, 0.2, 0.2, 0.2, 0.2};
  spec.p_out = 0.02;
  return spec;
}

PlantedGraph generate_sbm(const SbmSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t blocks = spec.sizes.size();
  std::vector<NodeId> start(blocks + 1, 0);
  for (std::size_t b = 0; b < blocks; ++b) start[b + 1] = start[b] + static_cast<NodeId>(spec.sizes[b]);
  const std::size_t n = start[blocks];

  Rng rng = make_rng(seed, Stream::kSbm);
  std::vector<Edge> edges;
  for (std::size_t a = 0; a < blocks; ++a) {
    const std::uint64_t sa = spec.sizes[a];
    // Within a block, position (i, j) of the s x s grid decides pair i < j.
    bernoulli_positions(rng, sa * sa, spec.p_in[a], [&](std::uint64_t k) {
      const auto i = static_cast<NodeId>(k / sa), j = static_cast<NodeId>(k % sa);
      if (i < j) edges.emplace_back(start[a] + i, start[a] + j);
    });
    for (std::size_t b = a + 1; b < blocks; ++b) {
      const std::uint64_t sb = spec.sizes[b];
      bernoulli_positions(rng, sa * sb, spec.p_out, [&](std::uint64_t k) {
        edges.emplace_back(start[a] + static_cast<NodeId>(k / sb), start[b] + static_cast<NodeId>(k % sb));
      });
    }
  }

  PlantedGraph result;
  result.graph = Graph::from_edges(n, edges);
  for (std::size_t b = 0; b < blocks; ++b) {
    std::vector<NodeId> members(spec.sizes[b]);
    for (std::size_t i = 0; i < members.size(); ++i) members[i] = start[b] + static_cast<NodeId>(i);
    result.truth.push_back(make_community(std::to_string(b), std::move(members), b, n));
  }
  return result;
}

double jaccard(std::span<const NodeId> a, std::span<const NodeId> b) {
  if (a.empty()) throw Error(ErrorCode::kInvalidArgument, "jaccard needs a non-empty first set");
  std::size_t common = 0;
  auto x = a.begin();
  auto y = b.begin();
  while (x != a.end() && y != b.end()) {
    if (*x < *y) {
      ++x;
    } else if (*y < *x) {
      ++y;
    } else {
      ++common;
      ++x;
      ++y;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

GoldStandard gold_standard_ranking(const Cover& detected, const Cover& truth) {
  if (detected.empty() || truth.empty()) {
    throw Error(ErrorCode::kEmptyCover, "gold standard needs non-empty detected and true covers");
  }
  GoldStandard gold;
  for (const auto& c : detected) {
    double best = 0.0;
    for (const auto& t : truth) best = std::max(best, c.members.empty() ? 0.0 : jaccard(c.members, t.members));
    gold.accuracy.push_back(best);
  }
  gold.ranks = to_ranked_list(gold.accuracy);
  return gold;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kInput, "rankings cover different community sets");
  if (a.size() < 2) throw Error(ErrorCode::kInvalidArgument, "correlation needs at least 2 communities");
  const double n = static_cast<double>(a.size());
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a, db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) {
    throw Error(ErrorCode::kUndefinedCorrelation, "correlation is undefined for an all-tied ranking");
  }
  return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

void BenchmarkConfig::validate() const {
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be at least 1");
  sbm.validate();
  PerturbationIntensity{alpha};
  aggregation.validate();
  if (methods.empty()) throw Error(ErrorCode::kInvalidArgument, "no benchmark methods selected");
  for (const auto& m : methods) {
    if (!is_aggregator(m)) parse_baseline_kind(m);
  }
  if (!is_probability(noise)) throw Error(ErrorCode::kInvalidArgument, "noise must lie in [0, 1]");
  if (detector_iters < 1) throw Error(ErrorCode::kInvalidArgument, "detector iterations must be at least 1");
}

BenchmarkConfig parse_benchmark_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kParse, "benchmark config must be a JSON object");
  BenchmarkConfig config;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "trials") {
        config.trials = value.get<std::size_t>();
      } else if (key == "sizes") {
        config.sbm.sizes = value.get<std::vector<std::size_t>>();
      } else if (key == "p_in") {
        config.sbm.p_in = value.get<std::vector<double>>();
      } else if (key == "p_out") {
        config.sbm.p_out = value.get<double>();
      } else if (key == "alpha") {
        config.alpha = value.get<double>();
      } else if (key == "bag_size") {
        config.aggregation.bag_size = value.get<std::size_t>();
      } else if (key == "pi") {
        config.aggregation.pi = value.get<double>();
      } else if (key == "max_iters") {
        config.aggregation.max_iters = value.get<std::size_t>();
      } else if (key == "clamp_weights") {
        config.aggregation.clamp_weights = value.get<bool>();
      } else if (key == "k") {
        config.negative_samples = value.get<std::size_t>();
      } else if (key == "num_communities") {
        config.num_communities = value.get<std::size_t>();
      } else if (key == "detector_iters") {
        config.detector_iters = value.get<std::size_t>();
      } else if (key == "mode") {
        const auto mode = value.get<std::string>();
        if (mode == "fit") {
          config.mode = DetectionMode::kFit;
        } else if (mode == "planted-noisy") {
          config.mode = DetectionMode::kPlantedNoisy;
        } else {
          throw Error(ErrorCode::kInvalidArgument, "unknown detection mode '" + mode + "'");
        }
      } else if (key == "noise") {
        config.noise = value.get<double>();
      } else if (key == "methods") {
        config.methods = value.get<std::vector<std::string>>();
      } else if (key == "seed") {
        config.seed = value.get<std::uint64_t>();
      } else if (key == "workers") {
        config.workers = value.get<std::size_t>();
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown benchmark config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("benchmark config: ") + e.what());
  }
  config.validate();
  return config;
}

nlohmann::json benchmark_config_json(const BenchmarkConfig& config) {
  return {{"trials", config.trials},
          {"sizes", config.sbm.sizes},
          {"p_in", config.sbm.p_in},
          {"p_out", config.sbm.p_out},
          {"alpha", config.alpha},
          {"bag_size", config.aggregation.bag_size},
          {"pi", config.aggregation.pi},
          {"max_iters", config.aggregation.max_iters},
          {"clamp_weights", config.aggregation.clamp_weights},
          {"k", config.negative_samples},
          {"num_communities", config.num_communities},
          {"detector_iters", config.detector_iters},
          {"mode", config.mode == DetectionMode::kFit ? "fit" : "planted-noisy"},
          {"noise", config.noise},
          {"methods", config.methods},
          {"seed", config.seed}};
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  BenchmarkReport report;
  report.config = config;
  report.trials.resize(config.trials);
  parallel_for(config.trials, config.workers,
               [&](std::size_t t) { report.trials[t] = run_trial(config, t); });

  for (const auto& t : report.trials) report.failed_trials += t.failed ? 1 : 0;
  if (report.failed_trials * 5 > config.trials) {
    throw Error(ErrorCode::kBenchmark, std::to_string(report.failed_trials) + " of " +
                                           std::to_string(config.trials) +
                                           " trials failed, more than 20%");
  }

  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    MethodSummary s;
    s.method = config.methods[m];
    std::vector<double> values;
    for (const auto& t : report.trials) {
      if (!t.failed && t.rho[m]) values.push_back(*t.rho[m]);
    }
    s.defined = values.size();
    if (!values.empty()) {
      double sum = 0.0;
      for (double v : values) sum += v;
      s.mean = sum / static_cast<double>(values.size());
    }
    if (values.size() > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - s.mean) * (v - s.mean);
      const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
      s.ci95 = 1.96 * sd / std::sqrt(static_cast<double>(values.size()));
    }
    report.summary.push_back(s);
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

nlohmann::json benchmark_report_json(const BenchmarkReport& report, bool include_runtime) {
  nlohmann::json doc;
  doc["config"] = benchmark_config_json(report.config);
  doc["failed_trials"] = report.failed_trials;
  auto methods = nlohmann::json::array();
  for (const auto& s : report.summary) {
    methods.push_back({{"method", s.method},
                       {"mean_rho", s.defined == 0 ? nlohmann::json(nullptr) : nlohmann::json(s.mean)},
                       {"ci95", s.ci95},
                       {"defined_trials", s.defined}});
  }
  doc["methods"] = methods;
  auto trials = nlohmann::json::array();
  for (const auto& t : report.trials) {
    nlohmann::json entry = {{"trial", t.trial}, {"status", t.failed ? "failed" : "ok"}};
    if (t.failed) {
      entry["failure"] = t.failure;
    } else {
      entry["communities"] = t.communities;
      entry["crank_iterations"] = t.crank_iterations;
      entry["crank_converged"] = t.crank_converged;
      nlohmann::json rho = nlohmann::json::object();
      nlohmann::json undefined = nlohmann::json::object();
      for (std::size_t m = 0; m < report.config.methods.size(); ++m) {
        rho[report.config.methods[m]] = optional_number(t.rho[m]);
        if (!t.undefined[m].empty()) undefined[report.config.methods[m]] = t.undefined[m];
      }
      entry["rho"] = rho;
      if (!undefined.empty()) entry["undefined"] = undefined;
    }
    trials.push_back(entry);
  }
  doc["trials"] = trials;
  if (include_runtime) doc["runtime_seconds"] = report.runtime_seconds;
  return doc;
}

void write_trial_table(std::ostream& out, const BenchmarkReport& report) {
  out << "trial\tstatus\tcommunities\tcrank_iterations";
  for (const auto& m : report.config.methods) out << '\t' << m;
  out << '\n';
  for (const auto& t : report.trials) {
    out << t.trial << '\t' << (t.failed ? "failed" : "ok") << '\t' << t.communities << '\t'
        << t.crank_iterations;
    for (const auto& rho : t.rho) out << '\t' << (rho && !t.failed ? format_double(*rho) : "NA");
    out << '\n';
  }
}

}  // namespace commrank
