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
#include <vector>

#include "json.hpp"

#include "commrank/aggregation.hpp"
#include "commrank/graph.hpp"

namespace commrank {

struct SbmSpec {
  std::vector<std::size_t> sizes;
  std::vector<double> p_in;  // one per community
  double p_out = 0.0;

  void validate() const;
};

/// Ten blocks of 30 nodes, five at p_in = 0.6 and five at 0.2, p_out = 0.02.
SbmSpec figure2_spec();

struct PlantedGraph {
  Graph graph;
  Cover truth;
};

/// Nodes of block b are numbered consecutively; labels are the indices.
PlantedGraph generate_sbm(const SbmSpec& spec, std::uint64_t seed);

double jaccard(std::span<const NodeId> a, std::span<const NodeId> b);

struct GoldStandard {
  std::vector<double> accuracy;  // best Jaccard per detected community
  RankedList ranks;
};

GoldStandard gold_standard_ranking(const Cover& detected, const Cover& truth);

/// Pearson correlation of two rank vectors.
double spearman(std::span<const double> a, std::span<const double> b);

enum class DetectionMode { kFit, kPlantedNoisy };

struct BenchmarkConfig {
  std::size_t trials = 50;
  SbmSpec sbm = figure2_spec();
  double alpha = 0.15;
  AggregationParams aggregation;
  std::size_t negative_samples = 0;  // 0 = automatic
  std::size_t num_communities = 0;   // 0 = number of planted blocks
  std::size_t detector_iters = 100;
  DetectionMode mode = DetectionMode::kFit;
  double noise = 0.1;  // membership flip rate for planted-noisy
  std::vector<std::string> methods = {"crank", "modularity", "conductance", "random"};
  std::uint64_t seed = 1;
  std::size_t workers = 1;

  void validate() const;
};

BenchmarkConfig parse_benchmark_config(const nlohmann::json& doc);
nlohmann::json benchmark_config_json(const BenchmarkConfig& config);

struct TrialResult {
  std::size_t trial = 0;
  bool failed = false;
  std::string failure;
  std::size_t communities = 0;  // scored communities
  std::size_t crank_iterations = 0;
  bool crank_converged = false;
  std::vector<std::optional<double>> rho;  // per method; empty when undefined
  std::vector<std::string> undefined;      // per method reason, "" when defined
};

struct MethodSummary {
  std::string method;
  double mean = 0.0;
  double ci95 = 0.0;
  std::size_t defined = 0;
};

struct BenchmarkReport {
  BenchmarkConfig config;
  std::vector<TrialResult> trials;
  std::vector<MethodSummary> summary;
  std::size_t failed_trials = 0;
  double runtime_seconds = 0.0;
};

/// Runs every trial (in parallel over `config.workers`) and summarizes. The
/// report is a function of the configuration only, runtime aside.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

nlohmann::json benchmark_report_json(const BenchmarkReport& report, bool include_runtime);
void write_trial_table(std::ostream& out, const BenchmarkReport& report);

}  // namespace commrank
