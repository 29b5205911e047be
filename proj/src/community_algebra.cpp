#include "mlnet/community_algebra.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "csv.hpp"
#include "mlnet/compose.hpp"
#include "mlnet/error.hpp"
#include "mlnet/rng.hpp"
#include "text.hpp"

namespace mlnet {

// ---------------------------------------------------------------------------
// Self-preservation

bool subset_reforms(const Layer& layer, const Graph& graph, std::span<const Vertex> community,
                    std::span<const Vertex> subset, const DetectParams& detect) {
  const std::size_t n = layer.vertex_count();
  if (subset.size() < std::max<std::size_t>(detect.min_size, 1)) return false;

  // 0: outside C, 1: removed (C \ S), 2: in S
  std::vector<std::uint8_t> state(n, 0);
  for (Vertex v : community) state[v] = 1;
  for (Vertex v : subset) state[v] = 2;

  std::uint64_t removed_edges = 0;
  for (Vertex v : community) {
    if (state[v] != 1) continue;
    for (Vertex w : graph.neighbours(v))
      if (state[w] != 1 || w > v) ++removed_edges;  // count edges inside C \ S once
  }
  const std::uint64_t total_edges = graph.edge_count() - removed_edges;

  std::vector<Vertex> kept;
  if (detect.seed == 0) {
    // Louvain never joins separate components and only the global edge count
    // couples them, so the components touching S suffice.
    std::vector<bool> visited(n, false);
    std::vector<Vertex> stack(subset.begin(), subset.end());
    for (Vertex v : subset) visited[v] = true;
    while (!stack.empty()) {
      const Vertex v = stack.back();
      stack.pop_back();
      kept.push_back(v);
      for (Vertex w : graph.neighbours(v))
        if (!visited[w] && state[w] != 1) {
          visited[w] = true;
          stack.push_back(w);
        }
    }
    std::sort(kept.begin(), kept.end());
  } else {
    for (Vertex v = 0; v < n; ++v)
      if (state[v] != 1) kept.push_back(v);
  }

  const Graph h = induced_subgraph(graph, kept);
  const auto labels = louvain_labels(h, total_edges, detect.seed);

  std::int64_t label = -2;
  std::size_t with_label = 0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (state[kept[i]] != 2) continue;
    if (labels[i] < 0) return false;
    if (label == -2) label = labels[i];
    if (labels[i] != label) return false;
  }
  for (std::size_t i = 0; i < kept.size(); ++i)
    if (labels[i] == label) ++with_label;
  return with_label == subset.size();
}

namespace {

bool connected_mask(const std::vector<std::uint32_t>& local_adj, std::uint32_t mask) {
  const std::uint32_t start = mask & (~mask + 1);
  std::uint32_t seen = start;
  std::uint32_t frontier = start;
  while (frontier) {
    const int i = std::countr_zero(frontier);
    frontier &= frontier - 1;
    const std::uint32_t fresh = local_adj[i] & mask & ~seen;
    seen |= fresh;
    frontier |= fresh;
  }
  return seen == mask;
}

// Grows a random connected subset of `members` of the requested size (or as
// large as the start vertex's component inside the community allows).
std::vector<Vertex> random_connected_subset(const std::vector<std::vector<std::size_t>>& local_adj,
                                            const std::vector<Vertex>& members, std::size_t size, Rng& rng) {
  const std::size_t c = members.size();
  std::vector<bool> in(c, false);
  std::vector<std::size_t> chosen{static_cast<std::size_t>(rng.below(c))};
  in[chosen[0]] = true;
  std::vector<std::size_t> frontier;
  auto extend = [&](std::size_t i) {
    for (std::size_t j : local_adj[i])
      if (!in[j] && std::find(frontier.begin(), frontier.end(), j) == frontier.end()) frontier.push_back(j);
  };
  extend(chosen[0]);
  while (chosen.size() < size && !frontier.empty()) {
    const std::size_t pick = rng.below(frontier.size());
    const std::size_t j = frontier[pick];
    frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(pick));
    in[j] = true;
    chosen.push_back(j);
    extend(j);
  }
  std::vector<Vertex> out;
  for (std::size_t i : chosen) out.push_back(members[i]);
  std::sort(out.begin(), out.end());
  return out;
}

CommunityVerdict check_one(const Layer& layer, const Graph& graph, const Partition& partition, std::size_t cid,
                           const PreservationParams& params) {
  const auto& members = partition.community(cid);
  const std::size_t c = members.size();
  CommunityVerdict verdict;
  verdict.community = cid;
  verdict.size = c;

  std::unordered_map<Vertex, std::size_t> local;
  for (std::size_t i = 0; i < c; ++i) local.emplace(members[i], i);
  std::vector<std::vector<std::size_t>> adj(c);
  for (std::size_t i = 0; i < c; ++i)
    for (Vertex w : graph.neighbours(members[i]))
      if (auto it = local.find(w); it != local.end()) adj[i].push_back(it->second);

  auto test = [&](std::vector<Vertex> subset) {
    ++verdict.subsets_tested;
    if (subset_reforms(layer, graph, members, subset, params.detect)) return true;
    verdict.preserving = false;
    verdict.witness = std::move(subset);
    return false;
  };

  constexpr std::size_t kMaskLimit = 24;
  const bool enumerate = params.mode == PreservationMode::exhaustive &&
                         c <= std::min(params.exhaustive_limit, kMaskLimit);
  verdict.exhaustive = enumerate;
  if (c < 3) return verdict;

  if (enumerate) {
    std::vector<std::uint32_t> mask_adj(c, 0);
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t j : adj[i]) mask_adj[i] |= std::uint32_t{1} << j;
    const std::uint32_t full = c == 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << c) - 1;
    for (std::uint32_t mask = 1; mask <= full && mask != 0; ++mask) {
      if (std::popcount(mask) < 3 || !connected_mask(mask_adj, mask)) continue;
      std::vector<Vertex> subset;
      for (std::uint32_t bits = mask; bits; bits &= bits - 1) subset.push_back(members[std::countr_zero(bits)]);
      if (!test(std::move(subset))) return verdict;
    }
    return verdict;
  }

  Rng rng(params.sample_seed ^ (0x9E3779B97F4A7C15ull * (cid + 1)));
  for (std::size_t s = 0; s < params.sample_count; ++s) {
    const std::size_t size = 3 + rng.below(c - 2);
    auto subset = random_connected_subset(adj, members, size, rng);
    if (subset.size() < 3) continue;
    if (!test(std::move(subset))) return verdict;
  }
  return verdict;
}

}  // namespace

SelfPreservationReport check_self_preserving(const Layer& layer, const Partition& partition,
                                             const PreservationParams& params) {
  if (layer.vertex_count() != partition.vertex_count())
    throw DataError("partition and layer have different vertex counts");
  SelfPreservationReport report;
  report.layer = layer.name();

  std::vector<std::size_t> ids = params.communities;
  if (ids.empty())
    for (std::size_t c = 0; c < partition.community_count(); ++c) ids.push_back(c);
  for (auto id : ids)
    if (id >= partition.community_count()) throw ConfigError("no community " + std::to_string(id));

  const Graph graph = to_graph(layer);
  report.communities.resize(ids.size());
  const unsigned threads = std::max(1u, std::min<unsigned>(params.threads, static_cast<unsigned>(ids.size())));
  if (threads <= 1) {
    for (std::size_t i = 0; i < ids.size(); ++i) report.communities[i] = check_one(layer, graph, partition, ids[i], params);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < ids.size(); i += threads)
          report.communities[i] = check_one(layer, graph, partition, ids[i], params);
      });
  }
  for (const auto& v : report.communities) {
    report.overall = report.overall && v.preserving;
    report.proven = report.proven && v.exhaustive;
  }
  return report;
}

std::string SelfPreservationReport::to_text() const {
  std::ostringstream out;
  out << "self-preservation " << layer << ": " << (overall ? "preserving" : "violated")
      << (proven ? " (exhaustive)" : " (sampled: evidence, not proof)") << "\n";
  for (const auto& v : communities) {
    out << "  community " << v.community << " size " << v.size << " " << (v.exhaustive ? "exhaustive" : "sampled")
        << " tested " << v.subsets_tested << ": " << (v.preserving ? "preserving" : "violated");
    if (!v.preserving) {
      out << " witness {";
      for (std::size_t i = 0; i < v.witness.size(); ++i) out << (i ? "," : "") << v.witness[i];
      out << "}";
    }
    out << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Recreation

Partition intersect_partitions(std::span<const Partition* const> parts, std::size_t min_size) {
  if (parts.size() < 2) throw ConfigError("intersection needs at least two partitions");
  const std::size_t n = parts.front()->vertex_count();
  for (const auto* p : parts)
    if (p->vertex_count() != n) throw DataError("partitions have different vertex counts");

  // key[v]: cell of v in the running intersection, -1 if unassigned anywhere.
  std::vector<std::int64_t> key(n);
  for (Vertex v = 0; v < n; ++v) key[v] = parts.front()->community_of(v);
  std::size_t cells = parts.front()->community_count();
  std::vector<std::size_t> start, order(n);
  std::vector<std::int64_t> slot;
  std::vector<std::size_t> touched;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const Partition& p = *parts[i];
    // Bucket vertices by their current cell, then split each bucket by p.
    start.assign(cells + 1, 0);
    for (Vertex v = 0; v < n; ++v)
      if (key[v] >= 0) ++start[static_cast<std::size_t>(key[v]) + 1];
    for (std::size_t c = 0; c < cells; ++c) start[c + 1] += start[c];
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (Vertex v = 0; v < n; ++v)
      if (key[v] >= 0) order[fill[static_cast<std::size_t>(key[v])]++] = v;

    slot.assign(p.community_count(), -1);
    std::int64_t next = 0;
    for (std::size_t c = 0; c < cells; ++c) {
      for (std::size_t j = start[c]; j < start[c + 1]; ++j) {
        const auto v = static_cast<Vertex>(order[j]);
        const std::int32_t pc = p.community_of(v);
        if (pc < 0) {
          key[v] = -1;
          continue;
        }
        auto& s = slot[static_cast<std::size_t>(pc)];
        if (s < 0) {
          s = next++;
          touched.push_back(static_cast<std::size_t>(pc));
        }
        key[v] = s;
      }
      for (auto t : touched) slot[t] = -1;
      touched.clear();
    }
    cells = static_cast<std::size_t>(next);
  }
  return Partition::from_labels(key, std::max<std::size_t>(min_size, 1));
}

Partition intersect_partitions(std::span<const Partition> parts, std::size_t min_size) {
  std::vector<const Partition*> ptrs;
  for (const auto& p : parts) ptrs.push_back(&p);
  return intersect_partitions(ptrs, min_size);
}

Partition intersect_partitions(const Partition& a, const Partition& b, std::size_t min_size) {
  const Partition* parts[] = {&a, &b};
  return intersect_partitions(parts, min_size);
}

double jaccard(std::span<const Vertex> a, std::span<const Vertex> b) {
  std::vector<Vertex> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  x.erase(std::unique(x.begin(), x.end()), x.end());
  std::sort(y.begin(), y.end());
  y.erase(std::unique(y.begin(), y.end()), y.end());
  if (x.empty() && y.empty()) throw DataError("jaccard of two empty sets is undefined");
  std::size_t common = 0;
  for (std::size_t i = 0, j = 0; i < x.size() && j < y.size();) {
    if (x[i] == y[j]) {
      ++common;
      ++i;
      ++j;
    } else if (x[i] < y[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return static_cast<double>(common) / static_cast<double>(x.size() + y.size() - common);
}

JaccardSeries jaccard_rank_compare(const Partition& actual, const Partition& recreated, std::size_t k) {
  if (actual.vertex_count() != recreated.vertex_count()) throw DataError("partitions have different vertex counts");
  if (k == 0) throw ConfigError("k must be at least 1");
  if (actual.community_count() == 0 || recreated.community_count() == 0)
    throw DataError("cannot rank-compare a partition with no communities");
  const std::size_t ranks = std::min({k, actual.community_count(), recreated.community_count()});
  JaccardSeries out;
  for (std::size_t i = 0; i < ranks; ++i)
    out.push_back({i + 1, jaccard(actual.community(i), recreated.community(i)), actual.community(i).size(),
                   recreated.community(i).size()});
  return out;
}

std::string jaccard_to_csv(const JaccardSeries& series) {
  std::string out = "rank,jaccard,actual_size,recreated_size\n";
  for (const auto& p : series)
    out += std::to_string(p.rank) + "," + text::format_double(p.jaccard) + "," + std::to_string(p.actual_size) + "," +
           std::to_string(p.recreated_size) + "\n";
  return out;
}

CoverageTable coverage_breakdown(std::span<const std::pair<std::string, Partition>> partitions) {
  CoverageTable table;
  if (partitions.empty()) return table;
  const std::size_t n = partitions.front().second.vertex_count();
  for (const auto& [expr, p] : partitions)
    if (p.vertex_count() != n) throw DataError("partitions have different vertex counts");
  table.total = n;

  std::vector<std::size_t> order(partitions.size());
  for (std::size_t i = 0; i < partitions.size(); ++i) {
    order[i] = i;
    table.rows.push_back({partitions[i].first, parse_expr(partitions[i].first).references().size(), 0, 0.0});
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return table.rows[a].features > table.rows[b].features; });

  std::size_t none = 0;
  for (Vertex v = 0; v < n; ++v) {
    bool covered = false;
    for (std::size_t i : order) {
      if (partitions[i].second.assigned(v)) {
        ++table.rows[i].count;
        covered = true;
        break;
      }
    }
    if (!covered) ++none;
  }
  table.rows.push_back({"no community", 0, none, 0.0});
  for (auto& r : table.rows) r.percent = n ? 100.0 * static_cast<double>(r.count) / static_cast<double>(n) : 0.0;
  return table;
}

std::string CoverageTable::to_csv() const {
  std::string out = "expression,features,count,percent\n";
  for (const auto& r : rows) {
    out += csv::quote(r.expression) + "," + std::to_string(r.features) + "," + std::to_string(r.count) + "," +
           text::format_double(r.percent) + "\n";
  }
  return out;
}

}  // namespace mlnet
