#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlnet/layer.hpp"

namespace mlnet {

inline constexpr std::int32_t kUnassigned = -1;

/// Disjoint communities over a fixed vertex set. Every vertex belongs to at
/// most one community. Community ids are dense 0..k-1, ordered by size
/// descending, then smallest member ascending.
class Partition {
 public:
  Partition() = default;
  /// All vertices unassigned.
  explicit Partition(std::size_t n_vertices);

  /// Groups vertices by label (negative = unassigned), dissolves groups
  /// smaller than min_size and renumbers canonically.
  static Partition from_labels(std::span<const std::int64_t> labels, std::size_t min_size = 1);
  static Partition from_groups(std::size_t n_vertices, const std::vector<std::vector<Vertex>>& groups,
                               std::size_t min_size = 1);

  std::size_t vertex_count() const { return assignment_.size(); }
  std::size_t community_count() const { return communities_.size(); }
  std::int32_t community_of(Vertex v) const { return assignment_[v]; }
  bool assigned(Vertex v) const { return assignment_[v] != kUnassigned; }
  std::size_t assigned_count() const;

  const std::vector<std::int32_t>& assignment() const { return assignment_; }
  /// Members of community c, ascending.
  const std::vector<Vertex>& community(std::size_t c) const { return communities_[c]; }
  const std::vector<std::vector<Vertex>>& communities() const { return communities_; }

  friend bool operator==(const Partition& a, const Partition& b) { return a.assignment_ == b.assignment_; }

 private:
  // Orders communities by (size desc, smallest member asc) and rewrites ids.
  void canonicalise();

  std::vector<std::int32_t> assignment_;
  std::vector<std::vector<Vertex>> communities_;
};

/// Connected components; isolated vertices are left unassigned.
Partition connected_components(const Layer& layer);

struct DetectParams {
  /// 0 sweeps vertices in ascending id order; any other value sweeps each
  /// level in a seeded random order.
  std::uint64_t seed = 0;
  std::size_t min_size = 3;
};

/// Connected components up to this many vertices are partitioned optimally.
inline constexpr std::size_t kExactComponentLimit = 12;

/// Greedy modularity optimisation with Louvain-style level aggregation;
/// components of at most kExactComponentLimit vertices are solved exactly.
/// Gains are evaluated in exact integer arithmetic, so results are identical
/// across platforms. Communities smaller than min_size are dissolved.
Partition detect_communities(const Layer& layer, const DetectParams& params = {});

/// Newman-Girvan modularity; unassigned vertices count as singletons.
/// Throws DataError on an edgeless layer or a vertex-count mismatch.
double modularity(const Layer& layer, const Partition& partition);

/// Compressed adjacency (each undirected edge stored in both directions).
struct Graph {
  std::vector<std::size_t> offsets{0};
  std::vector<Vertex> targets;

  std::size_t vertex_count() const { return offsets.size() - 1; }
  std::size_t edge_count() const { return targets.size() / 2; }
  std::span<const Vertex> neighbours(Vertex v) const {
    return {targets.data() + offsets[v], targets.data() + offsets[v + 1]};
  }
  std::size_t degree(Vertex v) const { return offsets[v + 1] - offsets[v]; }
};

Graph to_graph(const Layer& layer);

/// Subgraph induced by `vertices` (new ids follow the given order).
Graph induced_subgraph(const Graph& g, std::span<const Vertex> vertices);

/// True if the subgraph induced by `vertices` is connected (empty counts as connected).
bool induces_connected(const Graph& g, std::span<const Vertex> vertices);

/// Raw Louvain labels (not canonicalised, no min_size) for `g`, using
/// `total_edges` as m in the modularity gain. Passing the edge count of a
/// larger graph that `g` is a union of components of reproduces exactly the
/// labels that graph would assign to these vertices when seed is 0.
std::vector<std::int64_t> louvain_labels(const Graph& g, std::uint64_t total_edges, std::uint64_t seed = 0);

// Partition file:
//   # partition <layer> vertices <N>
//   <vertex> <community or ->
std::string write_partition(const Partition& p, std::string_view layer_name);

struct NamedPartition {
  std::string layer;
  Partition partition;
};
NamedPartition read_partition(std::string_view text);

}  // namespace mlnet
