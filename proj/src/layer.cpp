#include "mlnet/layer.hpp"

#include <algorithm>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "mlnet/distance.hpp"
#include "mlnet/error.hpp"
#include "text.hpp"

namespace mlnet {

Layer::Layer(std::string name, std::size_t n_vertices)
    : name_(std::move(name)), n_(n_vertices), words_((pair_count() + 63) / 64, 0) {}

Layer Layer::complete(std::string name, std::size_t n_vertices) {
  Layer l(std::move(name), n_vertices);
  std::fill(l.words_.begin(), l.words_.end(), ~std::uint64_t{0});
  l.mask_tail();
  return l;
}

void Layer::mask_tail() {
  const std::size_t rem = pair_count() & 63;
  if (rem && !words_.empty()) words_.back() &= (std::uint64_t{1} << rem) - 1;
}

bool Layer::has_edge(Vertex u, Vertex v) const {
  if (u == v || u >= n_ || v >= n_) return false;
  const std::size_t p = pair_index(u, v);
  return (words_[p >> 6] >> (p & 63)) & 1;
}

void Layer::add_edge(Vertex u, Vertex v) {
  if (u == v) throw DataError("self-loop (" + std::to_string(u) + ", " + std::to_string(u) + ") not allowed");
  if (u >= n_ || v >= n_) throw DataError("edge endpoint out of range");
  set_pair(pair_index(u, v));
}

void Layer::remove_edge(Vertex u, Vertex v) {
  if (u == v || u >= n_ || v >= n_) return;
  const std::size_t p = pair_index(u, v);
  words_[p >> 6] &= ~(std::uint64_t{1} << (p & 63));
}

std::size_t Layer::edge_count() const {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::vector<Edge> Layer::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for_each_edge([&](Vertex u, Vertex v) { out.push_back({u, v}); });
  return out;
}

std::vector<std::vector<Vertex>> Layer::adjacency() const {
  std::vector<std::vector<Vertex>> adj(n_);
  for_each_edge([&](Vertex u, Vertex v) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  });
  // Lexicographic edge order already leaves every list ascending.
  return adj;
}

std::vector<std::size_t> Layer::degrees() const {
  std::vector<std::size_t> d(n_, 0);
  for_each_edge([&](Vertex u, Vertex v) {
    ++d[u];
    ++d[v];
  });
  return d;
}

double layer_density(const Layer& layer) {
  if (layer.vertex_count() < 2) throw DataError("density needs at least two vertices");
  return static_cast<double>(layer.edge_count()) / static_cast<double>(layer.pair_count());
}

// ---------------------------------------------------------------------------
// Construction

namespace {

Layer build_nominal(const InstanceTable& table, std::size_t k, const std::string& name) {
  Layer layer(name, table.size());
  std::unordered_map<std::string_view, std::vector<Vertex>> buckets;
  for (const auto& inst : table.instances())
    if (const auto* s = std::get_if<std::string>(&inst.values[k]))
      buckets[*s].push_back(static_cast<Vertex>(inst.id));
  for (const auto& [value, members] : buckets)
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = i + 1; j < members.size(); ++j) layer.add_edge(members[i], members[j]);
  return layer;
}

// Rows are dealt round-robin so the shrinking row lengths balance across workers.
template <class RowFn>
void for_rows_parallel(std::size_t n, unsigned threads, RowFn&& row_fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    row_fn(0, std::size_t{0}, n, std::size_t{1});
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back([&, t] { row_fn(t, std::size_t{t}, n, std::size_t{threads}); });
}

}  // namespace

Layer build_layer(const InstanceTable& table, const FeatureSpec& spec, unsigned threads) {
  const auto k = table.schema().index_of(spec.name);
  if (!k) throw ConfigError("feature '" + spec.name + "' is not in the table's schema");
  if (spec.type == FeatureType::nominal) return build_nominal(table, *k, spec.name);

  const std::size_t n = table.size();
  Layer layer(spec.name, n);
  const double tau = spec.threshold_or_zero();
  const auto column = table.column(*k);

  threads = std::max(1u, threads);
  std::vector<std::vector<std::size_t>> found(threads);
  for_rows_parallel(n, threads, [&](unsigned t, std::size_t first, std::size_t rows, std::size_t stride) {
    auto& out = found[t];
    for (std::size_t i = first; i < rows; i += stride) {
      if (is_missing(column[i])) continue;
      for (std::size_t j = i + 1; j < n; ++j)
        if (feature_distance(spec, column[i], column[j]).within(tau))
          out.push_back(layer.pair_index(static_cast<Vertex>(i), static_cast<Vertex>(j)));
    }
  });
  for (const auto& part : found)
    for (auto p : part) layer.set_pair(p);
  return layer;
}

Layer build_layer(const InstanceTable& table, std::string_view feature, unsigned threads) {
  return build_layer(table, table.schema().feature(feature), threads);
}

// ---------------------------------------------------------------------------
// Threshold selection

std::vector<DensityPoint> threshold_sweep(const InstanceTable& table, const FeatureSpec& spec,
                                          std::span<const double> grid) {
  if (spec.type == FeatureType::nominal) throw ConfigError("feature '" + spec.name + "' is nominal; nothing to sweep");
  if (grid.empty()) throw ConfigError("threshold grid is empty");
  if (!std::is_sorted(grid.begin(), grid.end())) throw ConfigError("threshold grid must be ascending");
  const std::size_t n = table.size();
  if (n < 2) throw DataError("density needs at least two vertices");
  const auto k = table.schema().index_of(spec.name);
  if (!k) throw ConfigError("feature '" + spec.name + "' is not in the table's schema");

  const auto column = table.column(*k);
  std::vector<double> dists;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (auto d = feature_distance(spec, column[i], column[j]); d.defined()) dists.push_back(d.value());
  std::sort(dists.begin(), dists.end());

  const double pairs = static_cast<double>(n * (n - 1) / 2);
  std::vector<DensityPoint> out;
  out.reserve(grid.size());
  for (double tau : grid) {
    const auto count = std::upper_bound(dists.begin(), dists.end(), tau) - dists.begin();
    const double density = static_cast<double>(count) / pairs;
    const double delta = out.empty() ? 0.0 : density - out.back().density;
    out.push_back({tau, density, delta});
  }
  return out;
}

ThresholdSuggestion suggest_threshold(std::span<const DensityPoint> sweep) {
  if (sweep.size() < 2) throw ConfigError("threshold suggestion needs at least two sweep points");
  std::size_t best = 0;
  for (std::size_t i = 1; i < sweep.size(); ++i)
    if (sweep[i].delta > sweep[best].delta) best = i;
  const bool flat = std::all_of(sweep.begin(), sweep.end(), [](const DensityPoint& p) { return p.delta == 0.0; });
  if (flat) return {sweep.front().threshold, true};
  return {sweep[best].threshold, false};
}

std::string sweep_to_csv(std::span<const DensityPoint> sweep) {
  std::string out = "threshold,density,delta\n";
  for (const auto& p : sweep)
    out += text::format_double(p.threshold) + "," + text::format_double(p.density) + "," +
           text::format_double(p.delta) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Edge-list IO

std::string write_edge_list(const Layer& layer) {
  std::string out = "# layer " + layer.name() + " vertices " + std::to_string(layer.vertex_count()) + "\n";
  layer.for_each_edge([&](Vertex u, Vertex v) {
    out += std::to_string(u);
    out += ' ';
    out += std::to_string(v);
    out += '\n';
  });
  return out;
}

Layer read_edge_list(std::string_view text) {
  auto lines = text::split_lines(text);
  if (lines.empty()) throw DataError("edge list is empty");
  std::string_view header = text::trim(lines.front());
  constexpr std::string_view prefix = "# layer ";
  const auto vpos = header.rfind(" vertices ");
  if (header.substr(0, prefix.size()) != prefix || vpos == std::string_view::npos || vpos < prefix.size())
    throw DataError("edge list header must read '# layer <name> vertices <N>'");
  const auto n = text::parse_int(header.substr(vpos + 10));
  if (!n || *n < 0) throw DataError("edge list header has a bad vertex count");
  Layer layer(std::string(header.substr(prefix.size(), vpos - prefix.size())), static_cast<std::size_t>(*n));

  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto line = text::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    auto [a, b] = text::split_first_word(line);
    auto u = text::parse_int(a);
    auto v = text::parse_int(b);
    if (!u || !v || *u < 0 || *v < 0 || *u >= *n || *v >= *n || *u == *v)
      throw DataError("edge list line " + std::to_string(i + 1) + ": bad edge '" + std::string(line) + "'");
    layer.add_edge(static_cast<Vertex>(*u), static_cast<Vertex>(*v));
  }
  return layer;
}

}  // namespace mlnet
