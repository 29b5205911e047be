#include <cmath>

#include "doctest.h"
#include "mlnet/community.hpp"
#include "mlnet/compose.hpp"
#include "mlnet/error.hpp"
#include "mlnet/layer.hpp"
#include "support.hpp"

using namespace mlnet;
using testing::edge_pairs;
using Pairs = std::vector<std::pair<Vertex, Vertex>>;

TEST_CASE("pair index layout is row-major over u < v") {
  Layer l("x", 5);
  std::size_t expect = 0;
  for (Vertex u = 0; u < 5; ++u)
    for (Vertex v = u + 1; v < 5; ++v) {
      CHECK(l.pair_index(u, v) == expect);
      CHECK(l.pair_index(v, u) == expect);
      ++expect;
    }
  CHECK(l.pair_count() == 10);
}

TEST_CASE("edges iterate ascending across word boundaries") {
  Rng rng(3);
  const Layer l = testing::random_layer("r", 40, 0.3, rng);
  std::vector<Edge> seen;
  l.for_each_edge([&](Vertex u, Vertex v) { seen.push_back({u, v}); });
  CHECK(std::is_sorted(seen.begin(), seen.end()));
  CHECK(seen.size() == l.edge_count());
  for (const auto& e : seen) CHECK(l.has_edge(e.u, e.v));
  std::size_t brute = 0;
  for (Vertex u = 0; u < 40; ++u)
    for (Vertex v = u + 1; v < 40; ++v) brute += l.has_edge(u, v);
  CHECK(brute == l.edge_count());
}

TEST_CASE("build_layer on the fixture") {
  const auto t = testing::fixture_table();
  CHECK(edge_pairs(build_layer(t, "light")) == Pairs{{0, 3}, {1, 2}});
  CHECK(edge_pairs(build_layer(t, "weather")) == Pairs{{0, 1}, {0, 3}, {1, 3}});
  CHECK(layer_density(build_layer(t, "light")) == doctest::Approx(2.0 / 6.0));
}

TEST_CASE("all-missing column builds an empty layer") {
  const auto t = load_dataset("x,y\n,a\n,a\n,a\n", parse_schema("feature x\ntype numeric\nthreshold 100\nfeature y\ntype nominal\n"));
  REQUIRE(t.size() == 3);
  CHECK(build_layer(t, "x").edge_count() == 0);
  CHECK(build_layer(t, "y").edge_count() == 3);
}

TEST_CASE("layer density") {
  CHECK(layer_density(Layer("e", 4)) == 0);
  CHECK(layer_density(Layer::complete("k", 4)) == 1);
  CHECK_THROWS_AS(layer_density(Layer("one", 1)), DataError);
}

TEST_CASE("threaded pairwise build matches single-threaded") {
  Rng rng(11);
  std::string csv = "t,x\n";
  for (int i = 0; i < 300; ++i)
    csv += format_time({static_cast<int>(rng.below(24)), static_cast<int>(rng.below(60))}) + "," +
           std::to_string(rng.uniform(0, 100)) + "\n";
  const auto t = load_dataset(csv, parse_schema("feature t\ntype time\nthreshold 2\nfeature x\ntype numeric\nthreshold 3\n"));
  for (const char* f : {"t", "x"}) {
    const Layer a = build_layer(t, f, 1), b = build_layer(t, f, 4);
    CHECK(a.same_edges(b));
    CHECK(a.edge_count() > 0);
  }
}

TEST_CASE("edge-list round trip is canonical") {
  Rng rng(5);
  const Layer l = testing::random_layer("(a AND b)", 30, 0.2, rng);
  const std::string text = write_edge_list(l);
  CHECK(text.rfind("# layer (a AND b) vertices 30\n", 0) == 0);
  const Layer back = read_edge_list(text);
  CHECK(back.name() == l.name());
  CHECK(back.same_edges(l));
  CHECK(write_edge_list(back) == text);
  CHECK_THROWS_AS(read_edge_list("# layer x vertices 3\n0 3\n"), DataError);
  CHECK_THROWS_AS(read_edge_list("0 1\n"), DataError);
}

TEST_CASE("sweep: grid endpoints") {
  const auto t = load_dataset("x\n0\n1\n1\n5\n", parse_schema("feature x\ntype numeric\nthreshold 1\n"));
  const double grid[] = {0, 5};
  const auto s = threshold_sweep(t, t.schema().feature("x"), grid);
  REQUIRE(s.size() == 2);
  CHECK(s[0].density == doctest::Approx(1.0 / 6.0));
  CHECK(s[0].delta == 0);
  CHECK(s[1].density == 1.0);
  CHECK(s[1].delta == doctest::Approx(5.0 / 6.0));
  CHECK(sweep_to_csv(s).rfind("threshold,density,delta\n", 0) == 0);
  const double bad[] = {2, 1};
  CHECK_THROWS_AS(threshold_sweep(t, t.schema().feature("x"), bad), ConfigError);
  const auto nom = testing::fixture_table();
  CHECK_THROWS_AS(threshold_sweep(nom, nom.schema().feature("light"), grid), ConfigError);
}

TEST_CASE("sweep densities match building at each threshold") {
  Rng rng(9);
  std::string csv = "latitude,longitude\n";
  for (int i = 0; i < 60; ++i) csv += std::to_string(rng.uniform(51, 51.3)) + "," + std::to_string(rng.uniform(-0.3, 0)) + "\n";
  Schema schema = parse_schema("feature loc\ntype location\nthreshold 1 miles\n");
  const auto t = load_dataset(csv, schema);
  const std::vector<double> grid{0.5, 1, 2, 4, 8};
  const auto s = threshold_sweep(t, t.schema().feature("loc"), grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    FeatureSpec spec = t.schema().feature("loc");
    spec.threshold = grid[i];
    CHECK(s[i].density == doctest::Approx(layer_density(build_layer(t, spec))).epsilon(1e-12));
  }
}

TEST_CASE("suggest_threshold") {
  const std::vector<DensityPoint> s{{1, 0.1, 0.0}, {2, 0.6, 0.5}, {3, 0.7, 0.1}};
  CHECK(suggest_threshold(s).threshold == 2);
  CHECK_FALSE(suggest_threshold(s).warning);
  const std::vector<DensityPoint> flat{{1, 0.2, 0}, {2, 0.2, 0}, {3, 0.2, 0}};
  CHECK(suggest_threshold(flat).threshold == 1);
  CHECK(suggest_threshold(flat).warning);
  const std::vector<DensityPoint> tie{{1, 0.1, 0}, {2, 0.3, 0.2}, {3, 0.5, 0.2}};
  CHECK(suggest_threshold(tie).threshold == 2);
  const std::vector<DensityPoint> one{{1, 0.1, 0}};
  CHECK_THROWS_AS(suggest_threshold(one), ConfigError);
}

TEST_CASE("adjacency and CSR neighbour lists are ascending") {
  Rng rng(21);
  const Layer l = testing::random_layer("r", 70, 0.2, rng);
  const auto adj = l.adjacency();
  const Graph g = to_graph(l);
  const auto deg = l.degrees();
  for (Vertex v = 0; v < 70; ++v) {
    CHECK(std::is_sorted(adj[v].begin(), adj[v].end()));
    CHECK(adj[v].size() == deg[v]);
    const auto nb = g.neighbours(v);
    CHECK(std::vector<Vertex>(nb.begin(), nb.end()) == adj[v]);
  }
  CHECK(g.edge_count() == l.edge_count());
}
