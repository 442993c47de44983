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
#include <span>
#include <vector>

#include "commrank/graph.hpp"

namespace commrank {

/// The three probabilities a statistical community model has to expose:
/// p(u,v), p_C(u) and p_C(u,v). Communities are addressed through their
/// `source` index, so a cover must come from (or be bound to) the model.
class EdgeProbabilityModel {
 public:
  virtual ~EdgeProbabilityModel() = default;

  virtual double edge_prob(NodeId u, NodeId v) const = 0;
  virtual double membership_prob(const Community& c, NodeId u) const = 0;
  virtual double community_edge_prob(const Community& c, NodeId u, NodeId v) const = 0;

  // Complements, overridden where 1 - p would cancel to zero.
  virtual double non_edge_prob(NodeId u, NodeId v) const { return 1.0 - edge_prob(u, v); }
  virtual double community_non_edge_prob(const Community& c, NodeId u, NodeId v) const {
    return 1.0 - community_edge_prob(c, u, v);
  }
};

/// Fraction of edges rewired by the degree-preserving perturbation.
class PerturbationIntensity {
 public:
  explicit PerturbationIntensity(double alpha);
  double alpha() const { return alpha_; }

 private:
  double alpha_;
};

/// Affiliation graph model: node u joins community c with nonnegative weight
/// F[u][c], and p(u,v) = 1 - (1 - eps) exp(-F_u . F_v).
class AffiliationModel final : public EdgeProbabilityModel {
 public:
  AffiliationModel(std::size_t num_nodes, std::size_t num_communities, double eps);
  AffiliationModel(std::size_t num_nodes, std::size_t num_communities, double eps,
                   std::vector<double> weights);

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_communities() const { return num_communities_; }
  double eps() const { return eps_; }

  double weight(NodeId u, std::size_t c) const { return weights_[u * num_communities_ + c]; }
  std::span<const double> row(NodeId u) const {
    return {weights_.data() + u * num_communities_, num_communities_};
  }
  const std::vector<double>& weights() const { return weights_; }

  double edge_prob(NodeId u, NodeId v) const override;
  /// 1 - exp(-F_uc).
  double membership_prob(const Community& c, NodeId u) const override;
  /// 1 - exp(-F_uc F_vc), the share of the edge explained by c alone.
  double community_edge_prob(const Community& c, NodeId u, NodeId v) const override;
  double non_edge_prob(NodeId u, NodeId v) const override;
  double community_non_edge_prob(const Community& c, NodeId u, NodeId v) const override;

 private:
  std::size_t num_nodes_;
  std::size_t num_communities_;
  double eps_;
  std::vector<double> weights_;
};

/// Background edge probability used by the affiliation fitter:
/// 2m / (n(n-1)) clamped to [1e-8, 0.5].
double affiliation_background_eps(const Graph& g);

struct AffiliationFit {
  AffiliationModel model;
  std::vector<double> log_likelihood_trace;  // initial value, then one per sweep
  std::size_t sweeps = 0;
};

struct AffiliationFitOptions {
  std::size_t num_communities = 0;
  std::size_t max_iters = 100;
  std::uint64_t seed = 0;
  // Stop once a sweep improves the log-likelihood by less than this fraction.
  double relative_tolerance = 1e-5;
};

/// Coordinate projected-gradient ascent on the affiliation log-likelihood
///   sum_{(u,v) in E} log(1 - exp(-F_u.F_v)) - sum_{(u,v) not in E} F_u.F_v.
/// Each row update uses the cached column sums, so a sweep costs O(m K).
/// Rows are only replaced when their share of the objective does not drop.
AffiliationFit fit_affiliation(const Graph& g, const AffiliationFitOptions& options);

/// The objective above, evaluated with the cached-sum identity in O(m K + n K).
double affiliation_log_likelihood(const Graph& g, const AffiliationModel& model);

/// log(1 - exp(-x)) with the probability floored at 1e-300.
double affiliation_edge_log_term(double dot);

/// Membership threshold sqrt(-log(1 - eps)).
double affiliation_threshold(double eps);

/// u joins community k iff F_uk >= threshold. Empty columns are dropped and
/// the remaining communities renamed 0..K'-1; `source` keeps the column.
Cover extract_cover(const AffiliationModel& model);

void write_affiliation_model(std::ostream& out, const AffiliationModel& model, const Graph& g);
AffiliationModel read_affiliation_model(std::istream& in, const Graph& g);

/// Adapter that turns any cover into an edge probability model:
/// Laplace-smoothed community densities combined by a noisy-or.
class EmpiricalCoverModel final : public EdgeProbabilityModel {
 public:
  EmpiricalCoverModel(const Graph& g, const Cover& cover);

  double density(std::size_t source) const { return densities_[source]; }
  double background() const { return background_; }

  double edge_prob(NodeId u, NodeId v) const override;
  double membership_prob(const Community& c, NodeId u) const override;
  double community_edge_prob(const Community& c, NodeId u, NodeId v) const override;
  double non_edge_prob(NodeId u, NodeId v) const override;

 private:
  std::vector<double> densities_;
  std::vector<std::size_t> node_offsets_;
  std::vector<std::uint32_t> node_communities_;  // per node, sorted source ids
  double background_ = 0.0;
};

EmpiricalCoverModel empirical_model(const Graph& g, const Cover& cover);

/// p(1 - alpha) + (1 - p)(1 - (1 - q)^{alpha m}) where q = e_uv / m; the power
/// is evaluated as exp(alpha m log1p(-q)).
double perturb_probability(double p, double q, double m, double alpha);

/// 1 - perturb_probability(p, q, m, alpha) given complement = 1 - p, as
/// complement (1 - q)^{alpha m} + p alpha.
double perturb_complement(double p, double complement, double q, double m, double alpha);

double perturbed_edge_prob(const EdgeProbabilityModel& model, const Graph& g, NodeId u,
                           NodeId v, PerturbationIntensity a);

double perturbed_community_edge_prob(const EdgeProbabilityModel& model, const Graph& g,
                                     const Community& c, NodeId u, NodeId v,
                                     PerturbationIntensity a);

/// 1 - perturbed_edge_prob, without cancellation when p is close to 1.
double perturbed_non_edge_prob(const EdgeProbabilityModel& model, const Graph& g, NodeId u,
                               NodeId v, PerturbationIntensity a);

double perturbed_community_non_edge_prob(const EdgeProbabilityModel& model, const Graph& g,
                                         const Community& c, NodeId u, NodeId v,
                                         PerturbationIntensity a);

struct JointPairTerms {
  double edge = 0.0;      // p_C(u) p_C(v) p_C(u,v|alpha)
  double non_edge = 0.0;  // p_C(u) p_C(v) (1 - p_C(u,v|alpha))
};

JointPairTerms joint_pair_terms(const EdgeProbabilityModel& model, const Graph& g,
                                const Community& c, NodeId u, NodeId v,
                                PerturbationIntensity a);

}  // namespace commrank
