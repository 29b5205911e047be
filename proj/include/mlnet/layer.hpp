#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mlnet/schema.hpp"

namespace mlnet {

using Vertex = std::uint32_t;

struct Edge {
  Vertex u = 0;
  Vertex v = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Undirected simple graph over a fixed vertex universe 0..n-1.
///
/// The edge set is a packed bitset over the n(n-1)/2 unordered pairs, with
/// pair (u, v), u < v, stored at bit u*n - u(u+1)/2 + (v-u-1). Pairs are
/// therefore laid out row by row in lexicographic order, and Boolean
/// composition is word-wise.
class Layer {
 public:
  Layer() = default;
  Layer(std::string name, std::size_t n_vertices);

  static Layer complete(std::string name, std::size_t n_vertices);

  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  std::size_t vertex_count() const { return n_; }
  std::size_t pair_count() const { return n_ < 2 ? 0 : n_ * (n_ - 1) / 2; }

  std::size_t pair_index(Vertex u, Vertex v) const {
    if (u > v) std::swap(u, v);
    return std::size_t{u} * n_ - std::size_t{u} * (u + 1) / 2 + (v - u - 1);
  }

  bool has_edge(Vertex u, Vertex v) const;
  void add_edge(Vertex u, Vertex v);
  void remove_edge(Vertex u, Vertex v);
  void set_pair(std::size_t pair) { words_[pair >> 6] |= std::uint64_t{1} << (pair & 63); }

  std::size_t edge_count() const;
  std::vector<Edge> edges() const;

  /// Calls f(u, v) for every edge in ascending (u, v) order.
  template <class F>
  void for_each_edge(F&& f) const {
    if (n_ < 2) return;
    Vertex u = 0;
    std::size_t row_end = n_ - 1;  // one past the last pair index of row u
    std::size_t row_start = 0;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        const std::size_t idx = (w << 6) + static_cast<std::size_t>(std::countr_zero(bits));
        bits &= bits - 1;
        while (idx >= row_end) {
          ++u;
          row_start = row_end;
          row_end += n_ - 1 - u;
        }
        f(u, static_cast<Vertex>(u + 1 + (idx - row_start)));
      }
    }
  }

  /// Neighbour lists, each sorted ascending.
  std::vector<std::vector<Vertex>> adjacency() const;
  std::vector<std::size_t> degrees() const;

  std::span<const std::uint64_t> words() const { return words_; }
  std::span<std::uint64_t> words() { return words_; }

  /// Clears bits past the last valid pair in the final word.
  void mask_tail();

  bool same_edges(const Layer& other) const { return n_ == other.n_ && words_ == other.words_; }

 private:
  std::string name_;
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

/// |E| / (n(n-1)/2). Throws DataError for fewer than two vertices.
double layer_density(const Layer& layer);

/// Edge (i, j) iff the feature distance is defined and <= threshold.
/// Nominal features are built by bucketing equal values. `threads` > 1
/// splits the pairwise scan over row blocks; output is identical.
Layer build_layer(const InstanceTable& table, const FeatureSpec& spec, unsigned threads = 1);
Layer build_layer(const InstanceTable& table, std::string_view feature, unsigned threads = 1);

struct DensityPoint {
  double threshold = 0;
  double density = 0;
  double delta = 0;  // density minus the previous grid point's density (0 for the first)
};

/// Densities over an ascending threshold grid; pairwise distances are computed once.
std::vector<DensityPoint> threshold_sweep(const InstanceTable& table, const FeatureSpec& spec,
                                          std::span<const double> grid);

struct ThresholdSuggestion {
  double threshold = 0;
  bool warning = false;  // every delta was zero
};

/// Grid value with the largest density increase; ties go to the smaller threshold.
ThresholdSuggestion suggest_threshold(std::span<const DensityPoint> sweep);

std::string sweep_to_csv(std::span<const DensityPoint> sweep);

// Canonical edge-list format:
//   # layer <name> vertices <N>
//   u v            (u < v, ascending)
std::string write_edge_list(const Layer& layer);
Layer read_edge_list(std::string_view text);

}  // namespace mlnet
