#pragma once

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "mlnet/community.hpp"
#include "mlnet/layer.hpp"
#include "mlnet/rng.hpp"
#include "mlnet/schema.hpp"

namespace testing {

inline mlnet::Layer make_layer(std::string name, std::size_t n,
                               std::initializer_list<std::pair<mlnet::Vertex, mlnet::Vertex>> edges) {
  mlnet::Layer l(std::move(name), n);
  for (auto [u, v] : edges) l.add_edge(u, v);
  return l;
}

inline std::vector<std::pair<mlnet::Vertex, mlnet::Vertex>> edge_pairs(const mlnet::Layer& l) {
  std::vector<std::pair<mlnet::Vertex, mlnet::Vertex>> out;
  for (const auto& e : l.edges()) out.emplace_back(e.u, e.v);
  return out;
}

inline mlnet::Layer random_layer(std::string name, std::size_t n, double density, mlnet::Rng& rng) {
  mlnet::Layer l(std::move(name), n);
  for (mlnet::Vertex u = 0; u < n; ++u)
    for (mlnet::Vertex v = u + 1; v < n; ++v)
      if (rng.chance(density)) l.add_edge(u, v);
  return l;
}

// The 4-instance light/weather fixture.
inline const char* kFixtureSchema =
    "feature light\n"
    "type nominal\n"
    "\n"
    "feature weather\n"
    "type nominal\n";

inline const char* kFixtureCsv =
    "light,weather\n"
    "daylight,rain\n"
    "dark-lit,rain\n"
    "dark-lit,fine\n"
    "daylight,rain\n";

inline mlnet::InstanceTable fixture_table() {
  return mlnet::load_dataset(kFixtureCsv, mlnet::parse_schema(kFixtureSchema));
}

}  // namespace testing
