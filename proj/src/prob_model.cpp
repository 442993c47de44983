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

#include "commrank/prob_model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "commrank/error.hpp"
#include "commrank/random.hpp"
#include "commrank/text.hpp"

namespace commrank {

namespace {

constexpr double kProbabilityFloor = 1e-300;
constexpr double kMaxAffiliation = 1000.0;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

PerturbationIntensity::PerturbationIntensity(double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "perturbation intensity must lie in [0, 1]");
  }
}

// ---------------------------------------------------------------------------
// Affiliation model
// ---------------------------------------------------------------------------

AffiliationModel::AffiliationModel(std::size_t num_nodes, std::size_t num_communities, double eps)
    : AffiliationModel(num_nodes, num_communities, eps,
                       std::vector<double>(num_nodes * num_communities, 0.0)) {}

AffiliationModel::AffiliationModel(std::size_t num_nodes, std::size_t num_communities, double eps,
                                   std::vector<double> weights)
    : num_nodes_(num_nodes),
      num_communities_(num_communities),
      eps_(eps),
      weights_(std::move(weights)) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "background probability must lie in (0, 1)");
  }
  if (weights_.size() != num_nodes * num_communities) {
    throw Error(ErrorCode::kInvalidArgument, "affiliation matrix has the wrong shape");
  }
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidArgument, "affiliation weights must be finite and >= 0");
    }
  }
}

double AffiliationModel::edge_prob(NodeId u, NodeId v) const {
  return eps_ + (1.0 - eps_) * -std::expm1(-dot(row(u), row(v)));
}

double AffiliationModel::membership_prob(const Community& c, NodeId u) const {
  return -std::expm1(-weight(u, c.source));
}

double AffiliationModel::community_edge_prob(const Community& c, NodeId u, NodeId v) const {
  return -std::expm1(-weight(u, c.source) * weight(v, c.source));
}

double AffiliationModel::non_edge_prob(NodeId u, NodeId v) const {
  return (1.0 - eps_) * std::exp(-dot(row(u), row(v)));
}

double AffiliationModel::community_non_edge_prob(const Community& c, NodeId u, NodeId v) const {
  return std::exp(-weight(u, c.source) * weight(v, c.source));
}

double affiliation_background_eps(const Graph& g) {
  const double n = static_cast<double>(g.num_nodes());
  const double m = static_cast<double>(g.num_edges());
  const double raw = n > 1 ? 2.0 * m / (n * (n - 1.0)) : 0.5;
  return std::clamp(raw, 1e-8, 0.5);
}

double affiliation_edge_log_term(double dot_product) {
  return std::log(std::max(-std::expm1(-dot_product), kProbabilityFloor));
}

double affiliation_threshold(double eps) { return std::sqrt(-std::log1p(-eps)); }

double affiliation_log_likelihood(const Graph& g, const AffiliationModel& model) {
  const std::size_t k = model.num_communities();
  std::vector<double> column_sum(k, 0.0);
  double self_sq = 0.0;
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    auto r = model.row(u);
    for (std::size_t c = 0; c < k; ++c) column_sum[c] += r[c];
    self_sq += dot(r, r);
  }
  double edge_terms = 0.0;
  double edge_dots = 0.0;
  for (auto [u, v] : g.edges()) {
    const double x = dot(model.row(u), model.row(v));
    edge_terms += affiliation_edge_log_term(x);
    edge_dots += x;
  }
  const double all_pairs = 0.5 * (dot(column_sum, column_sum) - self_sq);
  return edge_terms - (all_pairs - edge_dots);
}

namespace {

// Anchor-overlap initialization: F_uk = |N[u] & N[a_k]| / |N[a_k]| + U[0, 0.1]
// with closed neighborhoods N[.] and K distinct random anchors a_k.
std::vector<double> initial_affiliations(const Graph& g, std::size_t k, Rng& rng) {
  const std::size_t n = g.num_nodes();
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(order[i], order[i + uniform_below(rng, n - i)]);
  }

  std::vector<double> f(n * k, 0.0);
  std::vector<std::uint32_t> shared(n, 0);
  for (std::size_t c = 0; c < k; ++c) {
    const NodeId anchor = order[c];
    std::vector<NodeId> closed(g.neighbors(anchor).begin(), g.neighbors(anchor).end());
    closed.push_back(anchor);
    std::vector<NodeId> touched;
    for (NodeId w : closed) {
      if (shared[w]++ == 0) touched.push_back(w);
      for (NodeId u : g.neighbors(w)) {
        if (shared[u]++ == 0) touched.push_back(u);
      }
    }
    const double norm = static_cast<double>(closed.size());
    for (NodeId u : touched) {
      f[u * k + c] = static_cast<double>(shared[u]) / norm;
      shared[u] = 0;
    }
  }
  for (double& w : f) w = std::min(w, 1.0) + 0.1 * uniform01(rng);
  return f;
}

class RowObjective {
 public:
  RowObjective(const Graph& g, std::size_t k) : g_(g), k_(k), non_neighbor_sum_(k) {}

  // Prepares the cached non-neighbor column sums for node u.
  void prepare(NodeId u, const std::vector<double>& f, const std::vector<double>& column_sum) {
    for (std::size_t c = 0; c < k_; ++c) non_neighbor_sum_[c] = column_sum[c] - f[u * k_ + c];
    for (NodeId v : g_.neighbors(u)) {
      for (std::size_t c = 0; c < k_; ++c) non_neighbor_sum_[c] -= f[v * k_ + c];
    }
  }

  double value(NodeId u, std::span<const double> row, const std::vector<double>& f) const {
    double s = 0.0;
    for (NodeId v : g_.neighbors(u)) {
      s += affiliation_edge_log_term(dot(row, {f.data() + v * k_, k_}));
    }
    return s - dot(row, non_neighbor_sum_);
  }

  void gradient(NodeId u, std::span<const double> row, const std::vector<double>& f,
                std::vector<double>& grad) const {
    for (std::size_t c = 0; c < k_; ++c) grad[c] = -non_neighbor_sum_[c];
    for (NodeId v : g_.neighbors(u)) {
      std::span<const double> fv{f.data() + v * k_, k_};
      const double x = std::max(dot(row, fv), 1e-8);
      const double coef = 1.0 / std::expm1(x);
      for (std::size_t c = 0; c < k_; ++c) grad[c] += fv[c] * coef;
    }
  }

 private:
  const Graph& g_;
  std::size_t k_;
  std::vector<double> non_neighbor_sum_;
};

}  // namespace

AffiliationFit fit_affiliation(const Graph& g, const AffiliationFitOptions& options) {
  const std::size_t n = g.num_nodes();
  const std::size_t k = options.num_communities;
  if (n == 0 || g.num_edges() == 0) {
    throw Error(ErrorCode::kEmptyInput, "cannot fit an affiliation model to an empty graph");
  }
  if (k == 0 || k > n) {
    throw Error(ErrorCode::kInvalidArgument,
                "community count must lie in [1, n]; got " + std::to_string(k));
  }
  const double eps = affiliation_background_eps(g);

  Rng rng = make_rng(options.seed, Stream::kDetection);
  std::vector<double> f = initial_affiliations(g, k, rng);
  std::vector<double> column_sum(k, 0.0);
  for (NodeId u = 0; u < n; ++u) {
    for (std::size_t c = 0; c < k; ++c) column_sum[c] += f[u * k + c];
  }

  AffiliationFit fit{AffiliationModel(n, k, eps, f), {}, 0};
  double current = affiliation_log_likelihood(g, fit.model);
  fit.log_likelihood_trace.push_back(current);

  RowObjective objective(g, k);
  std::vector<double> grad(k), candidate(k);
  constexpr double kArmijo = 0.05;
  constexpr double kShrink = 0.3;
  constexpr int kMaxTries = 30;

  for (std::size_t sweep = 0; sweep < options.max_iters; ++sweep) {
    for (NodeId u = 0; u < n; ++u) {
      std::span<double> row{f.data() + u * k, k};
      objective.prepare(u, f, column_sum);
      objective.gradient(u, row, f, grad);
      const double before = objective.value(u, row, f);
      double step = 1.0;
      for (int attempt = 0; attempt < kMaxTries; ++attempt, step *= kShrink) {
        double ascent = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
          candidate[c] = std::clamp(row[c] + step * grad[c], 0.0, kMaxAffiliation);
          ascent += grad[c] * (candidate[c] - row[c]);
        }
        const double after = objective.value(u, candidate, f);
        if (after >= before + kArmijo * ascent) {
          for (std::size_t c = 0; c < k; ++c) {
            column_sum[c] += candidate[c] - row[c];
            row[c] = candidate[c];
          }
          break;
        }
      }
    }
    fit.model = AffiliationModel(n, k, eps, f);
    const double next = affiliation_log_likelihood(g, fit.model);
    fit.log_likelihood_trace.push_back(next);
    ++fit.sweeps;
    const bool stalled = next - current <= options.relative_tolerance * std::abs(current);
    current = next;
    if (stalled) break;
  }
  return fit;
}

Cover extract_cover(const AffiliationModel& model) {
  const double threshold = affiliation_threshold(model.eps());
  Cover cover;
  for (std::size_t c = 0; c < model.num_communities(); ++c) {
    std::vector<NodeId> members;
    for (NodeId u = 0; u < model.num_nodes(); ++u) {
      if (model.weight(u, c) >= threshold) members.push_back(u);
    }
    if (members.empty()) continue;
    cover.push_back(Community{std::to_string(cover.size()), std::move(members), c});
  }
  if (cover.empty()) {
    throw Error(ErrorCode::kEmptyCover, "no node passes the membership threshold");
  }
  return cover;
}

void write_affiliation_model(std::ostream& out, const AffiliationModel& model, const Graph& g) {
  out << "# affiliation communities=" << model.num_communities()
      << " eps=" << format_double(model.eps()) << '\n';
  for (NodeId u = 0; u < model.num_nodes(); ++u) {
    out << g.label(u) << '\t';
    bool first = true;
    for (std::size_t c = 0; c < model.num_communities(); ++c) {
      const double w = model.weight(u, c);
      if (w == 0.0) continue;
      if (!first) out << ' ';
      out << c << ':' << format_double(w);
      first = false;
    }
    out << '\n';
  }
}

AffiliationModel read_affiliation_model(std::istream& in, const Graph& g) {
  std::size_t k = 0;
  double eps = affiliation_background_eps(g);
  struct Entry {
    NodeId node;
    std::size_t community;
    double weight;
  };
  std::vector<Entry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (fields[0].front() == '#') {
      for (auto field : fields) {
        if (field.starts_with("communities=")) {
          k = static_cast<std::size_t>(parse_double(field.substr(12), "community count"));
        } else if (field.starts_with("eps=")) {
          eps = parse_double(field.substr(4), "eps");
        }
      }
      continue;
    }
    auto node = g.find(fields[0]);
    if (!node) {
      throw Error(ErrorCode::kInput, "model line " + std::to_string(line_no) + ": label '" +
                                         std::string(fields[0]) + "' is not in the edge list");
    }
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto colon = fields[i].find(':');
      if (colon == std::string_view::npos) {
        throw Error(ErrorCode::kParse, "model line " + std::to_string(line_no) +
                                           ": expected community:weight");
      }
      const auto c = static_cast<std::size_t>(parse_double(fields[i].substr(0, colon), "community"));
      const double w = parse_double(fields[i].substr(colon + 1), "weight");
      entries.push_back({*node, c, w});
      k = std::max(k, c + 1);
    }
  }
  std::vector<double> weights(g.num_nodes() * k, 0.0);
  for (const auto& e : entries) weights[e.node * k + e.community] = e.weight;
  return AffiliationModel(g.num_nodes(), k, eps, std::move(weights));
}

// ---------------------------------------------------------------------------
// Empirical cover model
// ---------------------------------------------------------------------------

EmpiricalCoverModel::EmpiricalCoverModel(const Graph& g, const Cover& cover) {
  const std::size_t n = g.num_nodes();
  std::size_t max_source = 0;
  for (const auto& c : cover) max_source = std::max(max_source, c.source + 1);
  densities_.assign(max_source, 0.5);
  node_offsets_.assign(n + 1, 0);
  for (const auto& c : cover) {
    if (!c.members.empty() && c.members.back() >= n) {
      throw Error(ErrorCode::kInput, "community '" + c.name + "' references node outside the graph");
    }
    const double size = static_cast<double>(c.size());
    const double pairs = size * (size - 1.0) / 2.0;
    const double internal = static_cast<double>(cut_counts(g, c).internal);
    densities_[c.source] = (internal + 1.0) / (pairs + 2.0);
    for (NodeId u : c.members) ++node_offsets_[u + 1];
  }
  for (std::size_t i = 0; i < n; ++i) node_offsets_[i + 1] += node_offsets_[i];
  node_communities_.resize(node_offsets_[n]);
  std::vector<std::size_t> cursor(node_offsets_.begin(), node_offsets_.end() - 1);
  for (const auto& c : cover) {
    for (NodeId u : c.members) node_communities_[cursor[u]++] = static_cast<std::uint32_t>(c.source);
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto first = node_communities_.begin() + node_offsets_[i];
    auto last = node_communities_.begin() + node_offsets_[i + 1];
    std::sort(first, last);
  }

  const double dn = static_cast<double>(n);
  const double raw = n > 1 ? static_cast<double>(g.num_edges()) / (dn * (dn - 1.0) / 2.0) : 0.5;
  background_ = std::clamp(raw, 1e-8, 0.5);
}

double EmpiricalCoverModel::edge_prob(NodeId u, NodeId v) const {
  return 1.0 - non_edge_prob(u, v);
}

double EmpiricalCoverModel::non_edge_prob(NodeId u, NodeId v) const {
  auto a = node_communities_.begin() + node_offsets_[u];
  auto a_end = node_communities_.begin() + node_offsets_[u + 1];
  auto b = node_communities_.begin() + node_offsets_[v];
  auto b_end = node_communities_.begin() + node_offsets_[v + 1];
  double miss = 1.0 - background_;
  while (a != a_end && b != b_end) {
    if (*a < *b) {
      ++a;
    } else if (*b < *a) {
      ++b;
    } else {
      miss *= 1.0 - densities_[*a];
      ++a;
      ++b;
    }
  }
  return miss;
}

double EmpiricalCoverModel::membership_prob(const Community& c, NodeId u) const {
  return c.contains(u) ? 1.0 : 0.0;
}

double EmpiricalCoverModel::community_edge_prob(const Community& c, NodeId u, NodeId v) const {
  return c.contains(u) && c.contains(v) ? densities_[c.source] : 0.0;
}

EmpiricalCoverModel empirical_model(const Graph& g, const Cover& cover) {
  return EmpiricalCoverModel(g, cover);
}

// ---------------------------------------------------------------------------
// Perturbed probabilities
// ---------------------------------------------------------------------------

double perturb_probability(double p, double q, double m, double alpha) {
  const double rewired = -std::expm1(alpha * m * std::log1p(-q));
  return std::clamp(p * (1.0 - alpha) + (1.0 - p) * rewired, 0.0, 1.0);
}

double perturb_complement(double p, double complement, double q, double m, double alpha) {
  const double kept = std::exp(alpha * m * std::log1p(-q));
  return std::clamp(complement * kept + p * alpha, 0.0, 1.0);
}

double perturbed_edge_prob(const EdgeProbabilityModel& model, const Graph& g, NodeId u,
                           NodeId v, PerturbationIntensity a) {
  const double q = background_fraction(g, u, v);  // throws on u == v
  return perturb_probability(model.edge_prob(u, v), q, static_cast<double>(g.num_edges()),
                             a.alpha());
}

double perturbed_community_edge_prob(const EdgeProbabilityModel& model, const Graph& g,
                                     const Community& c, NodeId u, NodeId v,
                                     PerturbationIntensity a) {
  const double q = background_fraction(g, u, v);
  return perturb_probability(model.community_edge_prob(c, u, v), q,
                             static_cast<double>(g.num_edges()), a.alpha());
}

double perturbed_non_edge_prob(const EdgeProbabilityModel& model, const Graph& g, NodeId u,
                               NodeId v, PerturbationIntensity a) {
  const double q = background_fraction(g, u, v);
  return perturb_complement(model.edge_prob(u, v), model.non_edge_prob(u, v), q,
                            static_cast<double>(g.num_edges()), a.alpha());
}

double perturbed_community_non_edge_prob(const EdgeProbabilityModel& model, const Graph& g,
                                         const Community& c, NodeId u, NodeId v,
                                         PerturbationIntensity a) {
  const double q = background_fraction(g, u, v);
  return perturb_complement(model.community_edge_prob(c, u, v),
                            model.community_non_edge_prob(c, u, v), q,
                            static_cast<double>(g.num_edges()), a.alpha());
}

JointPairTerms joint_pair_terms(const EdgeProbabilityModel& model, const Graph& g,
                                const Community& c, NodeId u, NodeId v,
                                PerturbationIntensity a) {
  const double members = model.membership_prob(c, u) * model.membership_prob(c, v);
  const double p = perturbed_community_edge_prob(model, g, c, u, v, a);
  JointPairTerms t;
  t.edge = members * p;
  t.non_edge = members - t.edge;
  return t;
}

}  // namespace commrank
