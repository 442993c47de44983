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

#include "commrank/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "commrank/error.hpp"
#include "commrank/text.hpp"

namespace commrank {

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges,
                        std::vector<std::string> labels, BuildStats* stats) {
  if (labels.empty()) {
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  }
  if (labels.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "label count does not match node count");
  }

  BuildStats local;
  std::vector<Edge> canon;
  canon.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) throw Error(ErrorCode::kInvalidArgument, "edge endpoint out of range");
    if (u == v) {
      ++local.self_loops_dropped;
      continue;
    }
    canon.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(canon.begin(), canon.end());
  auto last = std::unique(canon.begin(), canon.end());
  local.duplicates_dropped = static_cast<std::size_t>(canon.end() - last);
  canon.erase(last, canon.end());

  Graph g;
  g.offsets_.assign(n + 1, 0);
  for (auto [u, v] : canon) {
    ++g.offsets_[u + 1];
    ++g.offsets_[v + 1];
  }
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
  g.adjacency_.resize(2 * canon.size());
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (auto [u, v] : canon) g.adjacency_[cursor[u]++] = v;
  for (auto [u, v] : canon) g.adjacency_[cursor[v]++] = u;
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(g.adjacency_.begin() + g.offsets_[i], g.adjacency_.begin() + g.offsets_[i + 1]);
  }

  g.labels_ = std::move(labels);
  g.label_index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!g.label_index_.emplace(g.labels_[i], static_cast<NodeId>(i)).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate node label '" + g.labels_[i] + "'");
    }
  }
  if (stats) *stats = local;
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  auto nu = neighbors(u);
  auto nv = neighbors(v);
  if (nu.size() <= nv.size()) return std::binary_search(nu.begin(), nu.end(), v);
  return std::binary_search(nv.begin(), nv.end(), u);
}

std::optional<NodeId> Graph::find(std::string_view label) const {
  auto it = label_index_.find(std::string(label));
  if (it == label_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

EdgeListLoad load_edge_list(std::istream& in) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, NodeId> index;
  std::vector<Edge> edges;
  auto intern = [&](std::string_view label) {
    auto [it, inserted] = index.emplace(std::string(label), static_cast<NodeId>(labels.size()));
    if (inserted) labels.emplace_back(label);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_whitespace(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    if (fields.size() < 2) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                         ": expected two node labels, got '" + line + "'");
    }
    NodeId u = intern(fields[0]);
    NodeId v = intern(fields[1]);
    edges.emplace_back(u, v);
  }

  EdgeListLoad result;
  Graph::BuildStats stats;
  const std::size_t n = labels.size();
  result.graph = Graph::from_edges(n, edges, std::move(labels), &stats);
  result.duplicates_dropped = stats.duplicates_dropped;
  result.self_loops_dropped = stats.self_loops_dropped;
  if (result.graph.num_edges() == 0) {
    throw Error(ErrorCode::kEmptyInput, "edge list contains no edges after cleaning");
  }
  return result;
}

void write_edge_list(std::ostream& out, const Graph& g) {
  for (auto [u, v] : g.edges()) out << g.label(u) << '\t' << g.label(v) << '\n';
}

bool Community::contains(NodeId u) const {
  return std::binary_search(members.begin(), members.end(), u);
}

Community make_community(std::string name, std::vector<NodeId> members, std::size_t source,
                         std::size_t n) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  if (members.empty()) {
    throw Error(ErrorCode::kInput, "community '" + name + "' has no members");
  }
  if (members.back() >= n) {
    throw Error(ErrorCode::kInput, "community '" + name + "' references node outside the graph");
  }
  return Community{std::move(name), std::move(members), source};
}

double pair_background_rate(const Graph& g, NodeId u, NodeId v) {
  if (u == v) throw Error(ErrorCode::kInvalidPair, "pair requires two distinct nodes");
  const double m = static_cast<double>(g.num_edges());
  if (m == 0.0) return 0.0;
  return static_cast<double>(g.degree(u)) * static_cast<double>(g.degree(v)) / (2.0 * m);
}

double background_fraction(const Graph& g, NodeId u, NodeId v) {
  const double rate = pair_background_rate(g, u, v);
  const double m = static_cast<double>(g.num_edges());
  if (m == 0.0) return 0.0;
  return std::min(rate / m, 1.0 - 1e-12);
}

CutCounts cut_counts(const Graph& g, const Community& c) {
  CutCounts counts;
  for (NodeId u : c.members) {
    for (NodeId v : g.neighbors(u)) {
      if (c.contains(v)) {
        if (u < v) ++counts.internal;
      } else {
        ++counts.boundary;
      }
    }
  }
  return counts;
}

NodeId LabelSpace::intern(std::string_view label) {
  auto [it, inserted] = index_.emplace(std::string(label), static_cast<NodeId>(labels_.size()));
  if (inserted) labels_.emplace_back(label);
  return it->second;
}

namespace {

template <typename Resolve>
Cover read_cover_impl(std::istream& in, std::size_t bound, Resolve resolve) {
  Cover cover;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_whitespace(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    std::vector<NodeId> members;
    members.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) members.push_back(resolve(fields[i], line_no));
    const std::size_t source = cover.size();
    cover.push_back(make_community(std::string(fields[0]), std::move(members), source, bound));
  }
  return cover;
}

}  // namespace

Cover read_cover(std::istream& in, const Graph& g) {
  return read_cover_impl(
      in, g.num_nodes(), [&g](std::string_view label, std::size_t line_no) {
        auto id = g.find(label);
        if (!id) {
          throw Error(ErrorCode::kInput, "line " + std::to_string(line_no) + ": label '" +
                                             std::string(label) + "' is not in the edge list");
        }
        return *id;
      });
}

Cover read_cover(std::istream& in, LabelSpace& labels) {
  return read_cover_impl(in, static_cast<std::size_t>(-1),
                         [&labels](std::string_view label, std::size_t) {
                           return labels.intern(label);
                         });
}

void write_cover(std::ostream& out, const Cover& cover, const Graph& g) {
  for (const auto& c : cover) {
    out << c.name << '\t';
    for (std::size_t i = 0; i < c.members.size(); ++i) {
      if (i) out << ' ';
      out << g.label(c.members[i]);
    }
    out << '\n';
  }
}

}  // namespace commrank
