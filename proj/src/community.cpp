#include "mlnet/community.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <unordered_map>

#include "mlnet/error.hpp"
#include "mlnet/rng.hpp"
#include "text.hpp"

namespace mlnet {

// ---------------------------------------------------------------------------
// Partition

Partition::Partition(std::size_t n_vertices) : assignment_(n_vertices, kUnassigned) {}

Partition Partition::from_labels(std::span<const std::int64_t> labels, std::size_t min_size) {
  const std::int64_t max_label = labels.empty() ? -1 : *std::max_element(labels.begin(), labels.end());
  if (max_label >= static_cast<std::int64_t>(2 * labels.size() + 16)) {
    std::unordered_map<std::int64_t, std::vector<Vertex>> groups;
    for (std::size_t v = 0; v < labels.size(); ++v)
      if (labels[v] >= 0) groups[labels[v]].push_back(static_cast<Vertex>(v));
    std::vector<std::vector<Vertex>> list;
    list.reserve(groups.size());
    for (auto& [label, members] : groups) list.push_back(std::move(members));
    return from_groups(labels.size(), list, min_size);
  }
  // Dense labels: bucket by counting, members come out ascending.
  std::vector<std::size_t> size(static_cast<std::size_t>(max_label + 1), 0);
  for (auto l : labels)
    if (l >= 0) ++size[static_cast<std::size_t>(l)];
  Partition p(labels.size());
  std::vector<std::int64_t> slot(size.size(), -1);
  for (std::size_t l = 0; l < size.size(); ++l)
    if (size[l] > 0 && size[l] >= min_size) {
      slot[l] = static_cast<std::int64_t>(p.communities_.size());
      p.communities_.emplace_back().reserve(size[l]);
    }
  for (std::size_t v = 0; v < labels.size(); ++v)
    if (labels[v] >= 0 && slot[static_cast<std::size_t>(labels[v])] >= 0)
      p.communities_[static_cast<std::size_t>(slot[static_cast<std::size_t>(labels[v])])].push_back(
          static_cast<Vertex>(v));
  p.canonicalise();
  return p;
}

Partition Partition::from_groups(std::size_t n_vertices, const std::vector<std::vector<Vertex>>& groups,
                                 std::size_t min_size) {
  Partition p(n_vertices);
  for (const auto& g : groups) {
    if (g.empty() || g.size() < min_size) continue;
    auto members = g;
    std::sort(members.begin(), members.end());
    if (std::adjacent_find(members.begin(), members.end()) != members.end())
      throw InvariantError("community lists a vertex twice");
    for (Vertex v : members) {
      if (v >= n_vertices) throw DataError("community member out of range");
      if (p.assignment_[v] != kUnassigned) throw InvariantError("vertex assigned to two communities");
      p.assignment_[v] = 0;
    }
    p.communities_.push_back(std::move(members));
  }
  p.canonicalise();
  return p;
}

void Partition::canonicalise() {
  std::sort(communities_.begin(), communities_.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  for (std::size_t c = 0; c < communities_.size(); ++c)
    for (Vertex v : communities_[c]) assignment_[v] = static_cast<std::int32_t>(c);
}

std::size_t Partition::assigned_count() const {
  return static_cast<std::size_t>(
      std::count_if(assignment_.begin(), assignment_.end(), [](std::int32_t c) { return c != kUnassigned; }));
}

// ---------------------------------------------------------------------------
// Graph helpers

Graph to_graph(const Layer& layer) {
  const std::size_t n = layer.vertex_count();
  std::vector<Edge> edges;
  edges.reserve(1024);
  layer.for_each_edge([&](Vertex u, Vertex v) { edges.push_back({u, v}); });
  Graph g;
  g.offsets.assign(n + 1, 0);
  for (const auto& e : edges) {
    ++g.offsets[e.u + 1];
    ++g.offsets[e.v + 1];
  }
  for (std::size_t v = 0; v < n; ++v) g.offsets[v + 1] += g.offsets[v];
  g.targets.resize(g.offsets[n]);
  std::vector<std::size_t> fill(g.offsets.begin(), g.offsets.end() - 1);
  // Edges are in (u, v) lexicographic order, so each list comes out sorted:
  // v receives every smaller neighbour before row v adds the larger ones.
  for (const auto& e : edges) {
    g.targets[fill[e.u]++] = e.v;
    g.targets[fill[e.v]++] = e.u;
  }
  return g;
}

Graph induced_subgraph(const Graph& g, std::span<const Vertex> vertices) {
  std::unordered_map<Vertex, Vertex> local;
  local.reserve(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) local.emplace(vertices[i], static_cast<Vertex>(i));
  Graph out;
  out.offsets.reserve(vertices.size() + 1);
  for (Vertex v : vertices) {
    for (Vertex w : g.neighbours(v))
      if (auto it = local.find(w); it != local.end()) out.targets.push_back(it->second);
    std::sort(out.targets.begin() + static_cast<std::ptrdiff_t>(out.offsets.back()), out.targets.end());
    out.offsets.push_back(out.targets.size());
  }
  return out;
}

Partition connected_components(const Layer& layer) {
  const Graph g = to_graph(layer);
  const std::size_t n = g.vertex_count();
  std::vector<std::int64_t> label(n, -1);
  std::vector<Vertex> stack;
  std::int64_t next = 0;
  for (Vertex s = 0; s < n; ++s) {
    if (label[s] >= 0 || g.degree(s) == 0) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      Vertex v = stack.back();
      stack.pop_back();
      for (Vertex w : g.neighbours(v))
        if (label[w] < 0) {
          label[w] = next;
          stack.push_back(w);
        }
    }
    ++next;
  }
  return Partition::from_labels(label, 1);
}

// ---------------------------------------------------------------------------
// Louvain

namespace {

// One aggregation level: node weights (degree sums) and weighted neighbour
// lists without self-loops.
struct Level {
  std::vector<std::int64_t> node_weight;
  std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> links;
};

// Local moving phase. Returns true if any node changed community.
bool move_nodes(const Level& level, std::int64_t two_m, std::vector<std::size_t>& comm,
                const std::vector<std::size_t>& order) {
  const std::size_t n = level.node_weight.size();
  std::vector<std::int64_t> tot(n, 0);
  for (std::size_t i = 0; i < n; ++i) tot[comm[i]] += level.node_weight[i];

  std::vector<std::int64_t> w_to(n, 0);
  std::vector<std::size_t> touched;
  bool any = false;
  for (;;) {
    bool moved = false;
    for (std::size_t i : order) {
      const std::size_t old = comm[i];
      const std::int64_t k = level.node_weight[i];
      touched.clear();
      for (auto [j, w] : level.links[i]) {
        const std::size_t c = comm[j];
        if (w_to[c] == 0) touched.push_back(c);
        w_to[c] += w;
      }
      tot[old] -= k;
      // Gain of joining c, scaled by 2m^2: 2m * k_{i,c} - tot_c * k_i.
      std::size_t best = old;
      std::int64_t best_gain = two_m * w_to[old] - tot[old] * k;
      for (std::size_t c : touched) {
        if (c == old) continue;
        const std::int64_t gain = two_m * w_to[c] - tot[c] * k;
        if (gain > best_gain || (gain == best_gain && best != old && c < best)) {
          best = c;
          best_gain = gain;
        }
      }
      tot[best] += k;
      for (std::size_t c : touched) w_to[c] = 0;
      if (best != old) {
        comm[i] = best;
        moved = true;
      }
    }
    if (!moved) return any;
    any = true;
  }
}

// Labels over g's vertices from aggregated Louvain levels.
std::vector<std::int64_t> aggregate_labels(const Graph& g, std::int64_t two_m, std::uint64_t seed) {
  const std::size_t n = g.vertex_count();
  std::vector<std::int64_t> labels(n, -1);

  Level level;
  level.node_weight.resize(n);
  level.links.resize(n);
  for (Vertex v = 0; v < n; ++v) {
    level.node_weight[v] = static_cast<std::int64_t>(g.degree(v));
    for (Vertex w : g.neighbours(v)) level.links[v].emplace_back(w, 1);
  }

  // membership[v]: node of the current level that original vertex v belongs to
  std::vector<std::size_t> membership(n);
  std::iota(membership.begin(), membership.end(), std::size_t{0});
  Rng rng(seed);

  for (;;) {
    const std::size_t ln = level.node_weight.size();
    std::vector<std::size_t> comm(ln);
    std::iota(comm.begin(), comm.end(), std::size_t{0});
    std::vector<std::size_t> order(comm);
    if (seed != 0) rng.shuffle(order);

    if (!move_nodes(level, two_m, comm, order)) break;

    // Renumber communities densely by first appearance in node order.
    std::vector<std::size_t> renum(ln, SIZE_MAX);
    std::size_t count = 0;
    for (std::size_t i = 0; i < ln; ++i)
      if (renum[comm[i]] == SIZE_MAX) renum[comm[i]] = count++;

    Level next;
    next.node_weight.assign(count, 0);
    next.links.resize(count);
    std::vector<std::unordered_map<std::size_t, std::int64_t>> acc(count);
    for (std::size_t i = 0; i < ln; ++i) {
      const std::size_t ci = renum[comm[i]];
      next.node_weight[ci] += level.node_weight[i];
      for (auto [j, w] : level.links[i]) {
        const std::size_t cj = renum[comm[j]];
        if (cj != ci) acc[ci][cj] += w;
      }
    }
    for (std::size_t c = 0; c < count; ++c) {
      next.links[c].assign(acc[c].begin(), acc[c].end());
      std::sort(next.links[c].begin(), next.links[c].end());
    }
    for (auto& m : membership) m = renum[comm[m]];
    level = std::move(next);
    if (count == ln) break;
  }

  for (std::size_t v = 0; v < n; ++v)
    labels[v] = g.degree(static_cast<Vertex>(v)) == 0 ? -1 : static_cast<std::int64_t>(membership[v]);
  return labels;
}

// Optimal partition of one small connected component by dynamic programming
// over vertex subsets. Scores are modularity terms scaled by 4m^2, so the
// comparison is exact. Returns a block index per component vertex.
std::vector<std::int64_t> exact_labels(const Graph& g, std::span<const Vertex> comp, std::int64_t two_m) {
  const std::size_t k = comp.size();
  const std::uint32_t full = (1u << k) - 1;
  std::vector<std::uint32_t> adj(k, 0);
  std::vector<std::int64_t> deg(k);
  {
    std::unordered_map<Vertex, std::size_t> local;
    for (std::size_t i = 0; i < k; ++i) local.emplace(comp[i], i);
    for (std::size_t i = 0; i < k; ++i) {
      deg[i] = static_cast<std::int64_t>(g.degree(comp[i]));
      for (Vertex w : g.neighbours(comp[i])) adj[i] |= 1u << local.at(w);
    }
  }
  // score[s] = 2 * 2m * e(s) - d(s)^2, built incrementally from s minus its lowest vertex.
  std::vector<std::int64_t> edges_in(full + 1, 0), degree_sum(full + 1, 0), score(full + 1, 0);
  for (std::uint32_t s = 1; s <= full; ++s) {
    const auto low = static_cast<std::size_t>(std::countr_zero(s));
    const std::uint32_t rest = s & (s - 1);
    edges_in[s] = edges_in[rest] + std::popcount(adj[low] & rest);
    degree_sum[s] = degree_sum[rest] + deg[low];
    score[s] = 2 * two_m * edges_in[s] - degree_sum[s] * degree_sum[s];
  }
  std::vector<std::int64_t> best(full + 1, 0);
  std::vector<std::uint32_t> choice(full + 1, 0);
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    const std::uint32_t low = mask & (~mask + 1);
    const std::uint32_t others = mask ^ low;
    // Blocks containing the lowest vertex, largest first; ties keep the earlier (larger) block.
    bool first = true;
    for (std::uint32_t sub = others;; sub = (sub - 1) & others) {
      const std::uint32_t block = sub | low;
      const std::int64_t value = score[block] + best[mask ^ block];
      if (first || value > best[mask]) {
        best[mask] = value;
        choice[mask] = block;
        first = false;
      }
      if (sub == 0) break;
    }
  }
  std::vector<std::int64_t> out(k, -1);
  std::int64_t next = 0;
  for (std::uint32_t mask = full; mask; mask ^= choice[mask], ++next)
    for (std::uint32_t b = choice[mask]; b; b &= b - 1) out[static_cast<std::size_t>(std::countr_zero(b))] = next;
  return out;
}

}  // namespace

std::vector<std::int64_t> louvain_labels(const Graph& g, std::uint64_t total_edges, std::uint64_t seed) {
  const std::size_t n = g.vertex_count();
  std::vector<std::int64_t> labels(n, -1);
  if (total_edges == 0) return labels;
  const std::int64_t two_m = 2 * static_cast<std::int64_t>(total_edges);

  // Modularity is additive over components and no optimum joins two of
  // them, so small components are solved exactly and the rest go through
  // level aggregation together.
  std::vector<std::int64_t> comp_of(n, -1);
  std::vector<Vertex> large;
  std::int64_t next_label = 0;
  std::vector<Vertex> comp;
  for (Vertex s = 0; s < n; ++s) {
    if (comp_of[s] != -1 || g.degree(s) == 0) continue;
    comp.assign(1, s);
    comp_of[s] = s;
    for (std::size_t head = 0; head < comp.size(); ++head)
      for (Vertex w : g.neighbours(comp[head]))
        if (comp_of[w] == -1) {
          comp_of[w] = s;
          comp.push_back(w);
        }
    if (comp.size() > kExactComponentLimit) {
      large.insert(large.end(), comp.begin(), comp.end());
      continue;
    }
    std::sort(comp.begin(), comp.end());
    // A clique component is always best left whole.
    std::size_t degree_sum = 0;
    for (Vertex v : comp) degree_sum += g.degree(v);
    if (degree_sum == comp.size() * (comp.size() - 1)) {
      for (Vertex v : comp) labels[v] = next_label;
      ++next_label;
      continue;
    }
    const auto local = exact_labels(g, comp, two_m);
    std::int64_t blocks = 0;
    for (std::size_t i = 0; i < comp.size(); ++i) {
      labels[comp[i]] = next_label + local[i];
      blocks = std::max(blocks, local[i] + 1);
    }
    next_label += blocks;
  }
  if (!large.empty()) {
    std::sort(large.begin(), large.end());
    const auto sub = aggregate_labels(induced_subgraph(g, large), two_m, seed);
    for (std::size_t i = 0; i < large.size(); ++i) labels[large[i]] = next_label + sub[i];
  }
  return labels;
}

Partition detect_communities(const Layer& layer, const DetectParams& params) {
  const Graph g = to_graph(layer);
  const auto labels = louvain_labels(g, g.edge_count(), params.seed);
  return Partition::from_labels(labels, std::max<std::size_t>(params.min_size, 1));
}

double modularity(const Layer& layer, const Partition& partition) {
  if (partition.vertex_count() != layer.vertex_count())
    throw DataError("partition and layer have different vertex counts");
  const auto m = static_cast<double>(layer.edge_count());
  if (m == 0) throw DataError("modularity is undefined on an edgeless layer");
  const std::size_t k = partition.community_count();
  std::vector<double> internal(k, 0.0);
  std::vector<double> tot(k, 0.0);
  double singleton_term = 0.0;
  const auto deg = layer.degrees();
  for (Vertex v = 0; v < layer.vertex_count(); ++v) {
    const auto c = partition.community_of(v);
    if (c == kUnassigned) {
      const double d = static_cast<double>(deg[v]) / (2 * m);
      singleton_term += d * d;
    } else {
      tot[c] += static_cast<double>(deg[v]);
    }
  }
  layer.for_each_edge([&](Vertex u, Vertex v) {
    const auto cu = partition.community_of(u);
    if (cu != kUnassigned && cu == partition.community_of(v)) internal[cu] += 1;
  });
  double q = -singleton_term;
  for (std::size_t c = 0; c < k; ++c) {
    const double d = tot[c] / (2 * m);
    q += internal[c] / m - d * d;
  }
  return q;
}

// ---------------------------------------------------------------------------
// Partition IO

std::string write_partition(const Partition& p, std::string_view layer_name) {
  std::string out = "# partition " + std::string(layer_name) + " vertices " + std::to_string(p.vertex_count()) + "\n";
  for (Vertex v = 0; v < p.vertex_count(); ++v) {
    out += std::to_string(v);
    out += ' ';
    const auto c = p.community_of(v);
    out += c == kUnassigned ? std::string("-") : std::to_string(c);
    out += '\n';
  }
  return out;
}

NamedPartition read_partition(std::string_view text_in) {
  auto lines = text::split_lines(text_in);
  if (lines.empty()) throw DataError("partition file is empty");
  std::string_view header = text::trim(lines.front());
  constexpr std::string_view prefix = "# partition ";
  const auto vpos = header.rfind(" vertices ");
  if (header.substr(0, prefix.size()) != prefix || vpos == std::string_view::npos || vpos < prefix.size())
    throw DataError("partition header must read '# partition <layer> vertices <N>'");
  const auto n = text::parse_int(header.substr(vpos + 10));
  if (!n || *n < 0) throw DataError("partition header has a bad vertex count");

  std::vector<std::int64_t> labels(static_cast<std::size_t>(*n), -1);
  std::vector<bool> seen(labels.size(), false);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto line = text::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    auto [a, b] = text::split_first_word(line);
    auto v = text::parse_int(a);
    if (!v || *v < 0 || *v >= *n || seen[*v])
      throw DataError("partition line " + std::to_string(i + 1) + ": bad vertex '" + std::string(a) + "'");
    seen[*v] = true;
    if (b == "-") continue;
    auto c = text::parse_int(b);
    if (!c || *c < 0) throw DataError("partition line " + std::to_string(i + 1) + ": bad community '" + std::string(b) + "'");
    labels[*v] = *c;
  }
  return {std::string(header.substr(prefix.size(), vpos - prefix.size())), Partition::from_labels(labels, 1)};
}

bool induces_connected(const Graph& g, std::span<const Vertex> community) {
  if (community.empty()) return true;
  std::vector<bool> in(g.vertex_count(), false), seen(g.vertex_count(), false);
  for (Vertex v : community) in[v] = true;
  std::vector<Vertex> stack{community.front()};
  seen[community.front()] = true;
  std::size_t reached = 0;
  while (!stack.empty()) {
    const Vertex v = stack.back();
    stack.pop_back();
    ++reached;
    for (Vertex w : g.neighbours(v))
      if (in[w] && !seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
  }
  return reached == community.size();
}

}  // namespace mlnet
