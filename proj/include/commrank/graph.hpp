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
#include <unordered_map>
#include <utility>
#include <vector>

namespace commrank {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Immutable undirected simple graph in compressed sparse row form.
///
/// Node indices are dense (0..n-1) and each node carries an external string
/// label. Neighbor lists are sorted and free of duplicates and self-loops.
class Graph {
 public:
  struct BuildStats {
    std::size_t duplicates_dropped = 0;
    std::size_t self_loops_dropped = 0;
  };

  Graph() = default;

  /// Builds a graph over `n` nodes. Duplicate edges (in either orientation)
  /// and self-loops are dropped and counted in `stats` when given. Empty
  /// `labels` means "use the decimal index as label".
  static Graph from_edges(std::size_t n, std::span<const Edge> edges,
                          std::vector<std::string> labels = {},
                          BuildStats* stats = nullptr);

  std::size_t num_nodes() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const { return adjacency_.size() / 2; }

  std::size_t degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }

  std::span<const NodeId> neighbors(NodeId u) const {
    return {adjacency_.data() + offsets_[u], degree(u)};
  }

  bool has_edge(NodeId u, NodeId v) const;

  const std::string& label(NodeId u) const { return labels_[u]; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<NodeId> find(std::string_view label) const;

  /// Every edge once, as (u, v) with u < v, in ascending order.
  std::vector<Edge> edges() const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> adjacency_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> label_index_;
};

struct EdgeListLoad {
  Graph graph;
  std::size_t duplicates_dropped = 0;
  std::size_t self_loops_dropped = 0;
};

/// Parses whitespace-separated "label label [weight]" lines; '#' starts a
/// comment line. Labels get dense indices in order of first appearance.
EdgeListLoad load_edge_list(std::istream& in);

void write_edge_list(std::ostream& out, const Graph& g);

/// A detected community. `source` identifies the community inside the model
/// that produced it (an affiliation column, or the index in the cover).
struct Community {
  std::string name;
  std::vector<NodeId> members;  // sorted, unique
  std::size_t source = 0;

  std::size_t size() const { return members.size(); }
  bool contains(NodeId u) const;
};

using Cover = std::vector<Community>;

/// Sorts and deduplicates the member list, validating indices against `n`.
Community make_community(std::string name, std::vector<NodeId> members,
                         std::size_t source, std::size_t n);

/// k_u k_v / (2m).
double pair_background_rate(const Graph& g, NodeId u, NodeId v);

/// e_uv / m clamped to at most 1 - 1e-12, the quantity the rewiring model
/// raises to the power alpha*m.
double background_fraction(const Graph& g, NodeId u, NodeId v);

struct CutCounts {
  std::size_t internal = 0;
  std::size_t boundary = 0;

  bool operator==(const CutCounts&) const = default;
};

CutCounts cut_counts(const Graph& g, const Community& c);

/// Interns labels that are not tied to a graph, for comparing covers read
/// from files.
class LabelSpace {
 public:
  NodeId intern(std::string_view label);
  std::size_t size() const { return labels_.size(); }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> index_;
};

/// Community file: one community per line, `id<TAB>label label ...`.
/// Labels must exist in `g`; the first unknown label raises an input error.
Cover read_cover(std::istream& in, const Graph& g);
Cover read_cover(std::istream& in, LabelSpace& labels);

void write_cover(std::ostream& out, const Cover& cover, const Graph& g);

}  // namespace commrank
