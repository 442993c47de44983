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

// commrank: detect, score and rank network communities.

#include <algorithm>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "commrank/aggregation.hpp"
#include "commrank/benchmark.hpp"
#include "commrank/error.hpp"
#include "commrank/graph.hpp"
#include "commrank/metrics.hpp"
#include "commrank/prob_model.hpp"
#include "commrank/text.hpp"

namespace {

using namespace commrank;

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitComputation = 3;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
      return kExitIo;
    case ErrorCode::kDegenerateCommunity:
    case ErrorCode::kEmptyCover:
    case ErrorCode::kTooFewCommunities:
    case ErrorCode::kUndefinedCorrelation:
    case ErrorCode::kBenchmark:
      return kExitComputation;
    default:
      return kExitUsage;
  }
}

void log_phase(const std::string& line) { std::cerr << "commrank: " << line << '\n'; }

// "30x10" or "0.6x5,0.2x5" or "30,30,20".
std::vector<double> parse_repeated_list(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto x = item.find('x');
    const double value = parse_double(item.substr(0, x), flag);
    std::size_t count = 1;
    if (x != std::string::npos) {
      const double raw = parse_double(item.substr(x + 1), flag);
      if (raw < 1 || raw != static_cast<double>(static_cast<std::size_t>(raw))) {
        throw Error(ErrorCode::kInvalidArgument, flag + ": repeat count must be a positive integer");
      }
      count = static_cast<std::size_t>(raw);
    }
    values.insert(values.end(), count, value);
  }
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, flag + ": empty list");
  return values;
}

Graph load_graph(const std::string& path) {
  std::istringstream in(read_file(path));
  auto load = load_edge_list(in);
  log_phase("loaded " + std::to_string(load.graph.num_nodes()) + " nodes and " +
            std::to_string(load.graph.num_edges()) + " edges from " + path);
  return std::move(load.graph);
}

Cover load_cover(const std::string& path, const Graph& g) {
  std::istringstream in(read_file(path));
  try {
    return read_cover(in, g);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string to_text(const auto& writer) {
  std::ostringstream out;
  writer(out);
  return out.str();
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string sizes;
  std::string p_in;
  double p_out = 0.02;
  std::string config;
  std::uint64_t seed = 0;
  std::string edges = "edges.txt";
  std::string truth = "truth.tsv";
};

int run_generate(const GenerateArgs& args) {
  SbmSpec spec;
  if (!args.config.empty()) {
    const auto doc = nlohmann::json::parse(read_file(args.config), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw Error(ErrorCode::kParse, args.config + ": not a JSON object");
    }
    try {
      spec.sizes = doc.at("sizes").get<std::vector<std::size_t>>();
      spec.p_in = doc.at("p_in").get<std::vector<double>>();
      spec.p_out = doc.value("p_out", 0.02);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, args.config + ": " + e.what());
    }
  } else {
    for (double s : parse_repeated_list(args.sizes, "--sizes")) {
      if (s < 1 || s != static_cast<double>(static_cast<std::size_t>(s))) {
        throw Error(ErrorCode::kInvalidArgument, "--sizes: community sizes must be positive integers");
      }
      spec.sizes.push_back(static_cast<std::size_t>(s));
    }
    spec.p_in = args.p_in.empty() ? std::vector<double>(spec.sizes.size(), 0.5)
                                  : parse_repeated_list(args.p_in, "--p-in");
    if (spec.p_in.size() == 1) spec.p_in.assign(spec.sizes.size(), spec.p_in.front());
    spec.p_out = args.p_out;
  }
  const auto planted = generate_sbm(spec, args.seed);
  log_phase("generated " + std::to_string(planted.graph.num_nodes()) + " nodes, " +
            std::to_string(planted.graph.num_edges()) + " edges");
  AtomicFileSet files;
  files.stage(args.edges, to_text([&](std::ostream& o) { write_edge_list(o, planted.graph); }));
  files.stage(args.truth, to_text([&](std::ostream& o) { write_cover(o, planted.truth, planted.graph); }));
  files.commit();
  return 0;
}

// ---------------------------------------------------------------------------
// detect

struct DetectArgs {
  std::string edges;
  std::size_t k = 0;
  std::size_t max_iters = 100;
  std::uint64_t seed = 0;
  std::string cover;
  std::string model;
};

int run_detect(const DetectArgs& args) {
  const Graph g = load_graph(args.edges);
  AffiliationFitOptions options;
  options.num_communities = args.k;
  options.max_iters = args.max_iters;
  options.seed = args.seed;
  const auto fit = fit_affiliation(g, options);
  log_phase("fitted affiliation model in " + std::to_string(fit.sweeps) + " sweeps, log-likelihood " +
            format_double(fit.log_likelihood_trace.back()));
  const Cover cover = extract_cover(fit.model);

  std::vector<std::size_t> sizes;
  for (const auto& c : cover) sizes.push_back(c.size());
  std::sort(sizes.begin(), sizes.end());
  std::cout << "communities: " << cover.size() << "\n"
            << "sizes: min " << sizes.front() << ", median " << sizes[sizes.size() / 2] << ", max "
            << sizes.back() << "\n";

  AtomicFileSet files;
  files.stage(args.cover, to_text([&](std::ostream& o) { write_cover(o, cover, g); }));
  files.stage(args.model, to_text([&](std::ostream& o) { write_affiliation_model(o, fit.model, g); }));
  files.commit();
  return 0;
}

// ---------------------------------------------------------------------------
// prioritize

struct PrioritizeArgs {
  std::string edges;
  std::string model;
  std::string cover;
  std::string output;
  std::string diagnostics;
  std::string metrics;
  std::string aggregator = "crank";
  double alpha = 0.15;
  std::size_t bag_size = 50;
  double pi = 0.05;
  std::size_t max_iters = 20;
  std::size_t negative_samples = 0;
  std::string supervise;
  std::string extra_scores;
  std::vector<std::string> baselines;
  bool clamp_weights = false;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::size_t footrule_limit = kDefaultFootruleLimit;
};

std::unordered_map<std::string, std::size_t> row_index(const MetricTable& table) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < table.rows.size(); ++i) index.emplace(table.rows[i].name, i);
  return index;
}

std::vector<std::size_t> read_supervision(const std::string& path, const MetricTable& table) {
  const auto index = row_index(table);
  std::vector<std::size_t> rows;
  for (auto token : split_whitespace(read_file(path))) {
    const auto it = index.find(std::string(token));
    if (it == index.end()) {
      throw Error(ErrorCode::kInput, path + ": supervision names unknown community '" +
                                         std::string(token) + "'");
    }
    rows.push_back(it->second);
  }
  if (rows.empty()) throw Error(ErrorCode::kInput, path + ": supervision set is empty");
  return rows;
}

// Header `community_id name...`, then one row of scores per community.
std::vector<ScoreColumn> read_extra_scores(const std::string& path, const MetricTable& table) {
  const auto index = row_index(table);
  std::istringstream in(read_file(path));
  std::string line;
  std::vector<ScoreColumn> columns;
  std::vector<char> seen(table.rows.size(), 0);
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_whitespace(line);
    if (fields.empty() || fields.front().front() == '#') continue;
    const std::string where = path + ": line " + std::to_string(line_no);
    if (columns.empty()) {
      if (fields.size() < 2) throw Error(ErrorCode::kParse, where + ": header needs a score column");
      for (std::size_t i = 1; i < fields.size(); ++i) {
        columns.push_back({std::string(fields[i]), std::vector<double>(table.rows.size(), 0.0)});
      }
      continue;
    }
    if (fields.size() != columns.size() + 1) {
      throw Error(ErrorCode::kParse, where + ": expected " + std::to_string(columns.size() + 1) + " fields");
    }
    const auto it = index.find(std::string(fields[0]));
    if (it == index.end()) continue;  // excluded or unknown communities carry no weight
    for (std::size_t i = 0; i < columns.size(); ++i) {
      columns[i].scores[it->second] = parse_double(fields[i + 1], where + " score");
    }
    seen[it->second] = 1;
  }
  if (columns.empty()) throw Error(ErrorCode::kParse, path + ": no header line");
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      throw Error(ErrorCode::kInput, path + ": no score for community '" + table.rows[i].name + "'");
    }
  }
  return columns;
}

int run_prioritize(const PrioritizeArgs& args) {
  AggregationParams params;
  params.bag_size = args.bag_size;
  params.pi = args.pi;
  params.max_iters = args.max_iters;
  params.clamp_weights = args.clamp_weights;
  params.validate();
  const AggregatorKind kind = parse_aggregator_kind(args.aggregator);
  MetricOptions options;
  options.alpha = args.alpha;
  PerturbationIntensity{args.alpha};
  options.negative_samples = args.negative_samples;
  options.seed = args.seed;
  options.workers = args.workers;
  for (const auto& b : args.baselines) options.baselines.push_back(parse_baseline_kind(b));

  const Graph g = load_graph(args.edges);
  std::unique_ptr<EdgeProbabilityModel> model;
  Cover cover;
  if (!args.model.empty()) {
    std::istringstream in(read_file(args.model));
    auto affiliation = read_affiliation_model(in, g);
    cover = extract_cover(affiliation);
    model = std::make_unique<AffiliationModel>(std::move(affiliation));
  } else {
    cover = load_cover(args.cover, g);
    for (std::size_t i = 0; i < cover.size(); ++i) cover[i].source = i;
    model = std::make_unique<EmpiricalCoverModel>(g, cover);
  }
  log_phase("scoring " + std::to_string(cover.size()) + " communities");
  const MetricTable table = compute_metric_table(*model, g, cover, options);
  for (const auto& e : table.excluded) log_phase("excluded community '" + e.name + "': " + e.reason);

  auto columns = metric_columns(table);
  if (!args.extra_scores.empty()) {
    for (auto& c : read_extra_scores(args.extra_scores, table)) columns.push_back(std::move(c));
  }
  std::optional<std::vector<std::size_t>> supervision;
  if (!args.supervise.empty()) {
    if (kind != AggregatorKind::kCrank) {
      throw Error(ErrorCode::kInvalidArgument, "--supervise requires the crank aggregator");
    }
    supervision = read_supervision(args.supervise, table);
  }

  Prioritization result;
  if (kind == AggregatorKind::kCrank) {
    result = crank_aggregate(columns, params, supervision);
  } else {
    result = baseline_aggregate(kind, columns, args.seed, args.footrule_limit);
  }
  log_phase(std::string("aggregated with ") + std::string(aggregator_name(kind)) + " in " +
            std::to_string(result.iterations) + " iterations" +
            (result.converged ? "" : " (not converged)"));

  auto diagnostics = prioritization_diagnostics(result, params, kind);
  diagnostics["alpha"] = args.alpha;
  diagnostics["seed"] = args.seed;
  diagnostics["supervised"] = supervision.has_value();
  auto excluded = nlohmann::json::array();
  for (const auto& e : table.excluded) excluded.push_back({{"community_id", e.name}, {"reason", e.reason}});
  diagnostics["excluded"] = excluded;

  AtomicFileSet files;
  files.stage(args.output, to_text([&](std::ostream& o) { write_prioritization(o, table, result); }));
  const std::string diagnostics_path = args.diagnostics.empty() ? args.output + ".json" : args.diagnostics;
  files.stage(diagnostics_path, diagnostics.dump(2) + "\n");
  if (!args.metrics.empty()) {
    files.stage(args.metrics, to_text([&](std::ostream& o) { write_metric_table(o, table); }));
  }
  files.commit();
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string ranking;
  std::string detected;
  std::string truth;
  std::string output;
};

int run_evaluate(const EvaluateArgs& args) {
  LabelSpace labels;
  Cover detected, truth;
  {
    std::istringstream in(read_file(args.detected));
    detected = read_cover(in, labels);
  }
  {
    std::istringstream in(read_file(args.truth));
    truth = read_cover(in, labels);
  }
  std::unordered_map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < detected.size(); ++i) by_name.emplace(detected[i].name, i);

  std::istringstream in(read_file(args.ranking));
  std::string line;
  std::size_t line_no = 0;
  Cover ranked;
  RankedList ranks;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_whitespace(line);
    if (fields.empty() || fields.front().front() == '#' || fields.front() == "community_id") continue;
    const std::string where = args.ranking + ": line " + std::to_string(line_no);
    if (fields.size() < 2) throw Error(ErrorCode::kParse, where + ": expected community_id and rank");
    const auto it = by_name.find(std::string(fields[0]));
    if (it == by_name.end()) {
      throw Error(ErrorCode::kInput, where + ": community '" + std::string(fields[0]) +
                                         "' is not in the detected cover");
    }
    ranked.push_back(detected[it->second]);
    ranks.push_back(parse_double(fields[1], where + " rank"));
  }
  if (ranked.empty()) throw Error(ErrorCode::kEmptyInput, args.ranking + ": no ranked communities");

  const GoldStandard gold = gold_standard_ranking(ranked, truth);
  const double rho = spearman(ranks, gold.ranks);
  nlohmann::json doc;
  doc["spearman"] = rho;
  doc["communities"] = ranked.size();
  auto accuracy = nlohmann::json::array();
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    accuracy.push_back({{"community_id", ranked[i].name},
                        {"rank", ranks[i]},
                        {"accuracy", gold.accuracy[i]},
                        {"gold_rank", gold.ranks[i]}});
  }
  doc["accuracy"] = accuracy;
  if (args.output.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    AtomicFileSet files;
    files.stage(args.output, doc.dump(2) + "\n");
    files.commit();
    std::cout << "spearman: " << format_double(rho) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// benchmark

struct BenchmarkArgs {
  std::string config;
  bool figure2 = false;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  std::string report = "benchmark.json";
  std::string table;
  bool timing = false;
};

int run_benchmark_command(const BenchmarkArgs& args) {
  BenchmarkConfig config;
  if (!args.config.empty()) {
    const auto doc = nlohmann::json::parse(read_file(args.config), nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::kParse, args.config + ": invalid JSON");
    config = parse_benchmark_config(doc);
  }
  if (args.figure2) config.sbm = figure2_spec();
  if (args.trials) config.trials = *args.trials;
  if (args.seed) config.seed = *args.seed;
  config.workers = args.workers;
  config.validate();
  log_phase("running " + std::to_string(config.trials) + " trials");
  const auto report = run_benchmark(config);
  for (const auto& s : report.summary) {
    std::cout << s.method << ": mean rho " << (s.defined ? format_double(s.mean) : "undefined")
              << " +/- " << format_double(s.ci95) << " (" << s.defined << " trials)\n";
  }
  if (report.failed_trials > 0) std::cout << "failed trials: " << report.failed_trials << "\n";

  AtomicFileSet files;
  files.stage(args.report, benchmark_report_json(report, args.timing).dump(2) + "\n");
  const std::string table_path = args.table.empty() ? args.report + ".tsv" : args.table;
  files.stage(table_path, to_text([&](std::ostream& o) { write_trial_table(o, report); }));
  files.commit();
  return 0;
}

}  // namespace

const CLI::Validator kAtLeastOne(
    [](std::string& value) -> std::string {
      try {
        if (std::stoll(value) >= 1) return {};
      } catch (const std::exception&) {
      }
      return "must be an integer >= 1, got " + value;
    },
    "INT>=1");

int main(int argc, char** argv) {
  CLI::App app{"Rank the communities of a network by structural quality."};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample a planted-partition network");
  auto* sizes_opt = generate->add_option("--sizes", gen.sizes, "Community sizes, e.g. 30x10");
  auto* config_opt = generate->add_option("--config", gen.config, "SBM spec as JSON")->check(CLI::ExistingFile);
  sizes_opt->excludes(config_opt);
  generate->add_option("--p-in", gen.p_in, "Within-community probabilities, e.g. 0.6x5,0.2x5");
  generate->add_option("--p-out", gen.p_out, "Between-community probability")->check(CLI::Range(0.0, 1.0));
  generate->add_option("--seed", gen.seed, "Random seed");
  generate->add_option("--edges", gen.edges, "Edge list output")->capture_default_str();
  generate->add_option("--truth", gen.truth, "Planted community output")->capture_default_str();

  DetectArgs det;
  auto* detect = app.add_subcommand("detect", "Fit the affiliation model and extract communities");
  detect->add_option("--edges", det.edges, "Edge list")->required();
  detect->add_option("--k", det.k, "Number of communities")->required()->check(kAtLeastOne);
  detect->add_option("--max-iters", det.max_iters, "Maximum sweeps")->check(kAtLeastOne);
  detect->add_option("--seed", det.seed, "Random seed");
  detect->add_option("--cover", det.cover, "Community file output")->required();
  detect->add_option("--model", det.model, "Model file output")->required();

  PrioritizeArgs pri;
  auto* prioritize = app.add_subcommand("prioritize", "Score and rank communities");
  prioritize->add_option("--edges", pri.edges, "Edge list")->required();
  auto* model_opt = prioritize->add_option("--model", pri.model, "Affiliation model file");
  auto* cover_opt = prioritize->add_option("--cover", pri.cover, "Community file");
  model_opt->excludes(cover_opt);
  prioritize->add_option("--output", pri.output, "Ranking TSV output")->required();
  prioritize->add_option("--diagnostics", pri.diagnostics, "Diagnostics JSON output (default: OUTPUT.json)");
  prioritize->add_option("--metrics", pri.metrics, "Metric table TSV output");
  prioritize->add_option("--aggregator", pri.aggregator, "crank, quadratic, borda, footrule or pick-a-perm")
      ->capture_default_str();
  prioritize->add_option("--alpha", pri.alpha, "Perturbation intensity")->check(CLI::Range(0.0, 1.0));
  prioritize->add_option("--bag-size", pri.bag_size, "Communities per bag")->check(kAtLeastOne);
  prioritize->add_option("--pi", pri.pi, "Temporary gold standard fraction")
      ->check(CLI::Range(0.0, 1.0));
  prioritize->add_option("--max-iters", pri.max_iters, "Aggregation iteration cap")->check(kAtLeastOne);
  prioritize->add_option("--negative-samples,-k", pri.negative_samples,
                         "Boundary samples per member (0: 10 below 100k nodes, else 3)");
  prioritize->add_option("--supervise", pri.supervise, "File listing known high-quality community ids");
  prioritize->add_option("--extra-scores", pri.extra_scores, "TSV of additional score columns");
  prioritize->add_option("--baselines", pri.baselines, "Baseline columns for --metrics")->delimiter(',');
  prioritize->add_flag("--clamp-weights", pri.clamp_weights, "Treat bag weights below 1 as 1");
  prioritize->add_option("--footrule-limit", pri.footrule_limit, "Largest footrule instance");
  prioritize->add_option("--seed", pri.seed, "Random seed");
  prioritize->add_option("--workers", pri.workers, "Worker threads")->check(kAtLeastOne);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Correlate a ranking with the gold standard");
  evaluate->add_option("--ranking", ev.ranking, "Ranking TSV")->required();
  evaluate->add_option("--cover", ev.detected, "Detected community file")->required();
  evaluate->add_option("--truth", ev.truth, "Ground-truth community file")->required();
  evaluate->add_option("--output", ev.output, "Evaluation JSON output (default: stdout)");

  BenchmarkArgs bench;
  auto* benchmark = app.add_subcommand("benchmark", "Planted-partition benchmark");
  benchmark->add_option("--config", bench.config, "Benchmark config JSON");
  benchmark->add_flag("--figure2", bench.figure2, "Ten blocks of 30 nodes, p_in 0.6 and 0.2, p_out 0.02");
  benchmark->add_option("--trials", bench.trials, "Number of trials")->check(kAtLeastOne);
  benchmark->add_option("--seed", bench.seed, "Master seed");
  benchmark->add_option("--workers", bench.workers, "Worker threads")->check(kAtLeastOne);
  benchmark->add_option("--report", bench.report, "Report JSON output")->capture_default_str();
  benchmark->add_option("--table", bench.table, "Per-trial TSV output (default: REPORT.tsv)");
  benchmark->add_flag("--timing", bench.timing, "Include runtime in the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? 0 : kExitUsage;
  }

  try {
    if (*generate) {
      if (gen.sizes.empty() && gen.config.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "--sizes or --config is required");
      }
      return run_generate(gen);
    }
    if (*detect) return run_detect(det);
    if (*prioritize) {
      if (pri.model.empty() && pri.cover.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "one of --model or --cover is required");
      }
      return run_prioritize(pri);
    }
    if (*evaluate) return run_evaluate(ev);
    if (*benchmark) return run_benchmark_command(bench);
  } catch (const Error& e) {
    std::cerr << "commrank: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::bad_alloc&) {
    std::cerr << "commrank: out of memory\n";
    return kExitComputation;
  }
  return kExitUsage;
}
