#include <functional>
#include <limits>

#include "doctest.h"
#include "mlnet/community.hpp"
#include "mlnet/error.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mlnet;

TEST_CASE("connected components") {
  const Layer tri = testing::make_layer("t", 6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
  const Partition p = connected_components(tri);
  CHECK(p.community_count() == 2);
  CHECK(p.community(0) == std::vector<Vertex>{0, 1, 2});
  CHECK(p.community(1) == std::vector<Vertex>{3, 4, 5});

  const Partition e = connected_components(Layer("e", 4));
  CHECK(e.community_count() == 0);
  CHECK(e.assigned_count() == 0);

  const Partition path = connected_components(testing::make_layer("p", 5, {{0, 1}, {1, 2}, {2, 3}}));
  CHECK(path.community_count() == 1);
  CHECK(path.community(0) == std::vector<Vertex>{0, 1, 2, 3});
  CHECK_FALSE(path.assigned(4));
}

TEST_CASE("partition ids: size descending then smallest member") {
  const std::vector<std::int64_t> labels{5, 5, 9, 9, 9, 2, 2, -1, 7};
  const Partition p = Partition::from_labels(labels);
  REQUIRE(p.community_count() == 4);
  CHECK(p.community(0) == std::vector<Vertex>{2, 3, 4});
  CHECK(p.community(1) == std::vector<Vertex>{0, 1});
  CHECK(p.community(2) == std::vector<Vertex>{5, 6});
  CHECK(p.community(3) == std::vector<Vertex>{8});
  CHECK_FALSE(p.assigned(7));
  const Partition q = Partition::from_labels(labels, 2);
  CHECK(q.community_count() == 3);
  CHECK_FALSE(q.assigned(8));
}

TEST_CASE("modularity by hand") {
  const Layer tri = testing::make_layer("t", 6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
  CHECK(modularity(tri, connected_components(tri)) == doctest::Approx(0.5));
  const std::vector<std::int64_t> one(6, 0);
  CHECK(modularity(tri, Partition::from_labels(one)) == doctest::Approx(0.0));
  CHECK(modularity(tri, Partition(6)) <= 0.0);
  CHECK_THROWS_AS(modularity(Layer("e", 3), Partition(3)), DataError);
  CHECK_THROWS_AS(modularity(tri, Partition(5)), DataError);
}

TEST_CASE("detector finds the two cliques across a bridge") {
  Layer l("bridge", 8);
  for (Vertex u = 0; u < 4; ++u)
    for (Vertex v = u + 1; v < 4; ++v) {
      l.add_edge(u, v);
      l.add_edge(u + 4, v + 4);
    }
  l.add_edge(3, 4);
  const Partition p = detect_communities(l);
  REQUIRE(p.community_count() == 2);
  CHECK(p.community(0) == std::vector<Vertex>{0, 1, 2, 3});
  CHECK(p.community(1) == std::vector<Vertex>{4, 5, 6, 7});
  CHECK(modularity(l, p) == doctest::Approx(testing::best_modularity(l)));
}

TEST_CASE("detector on K5 and on an empty layer") {
  const Partition k = detect_communities(Layer::complete("k5", 5));
  CHECK(k.community_count() == 1);
  CHECK(k.community(0).size() == 5);
  const Partition e = detect_communities(Layer("e", 6));
  CHECK(e.assigned_count() == 0);
}

TEST_CASE("detector matches the exhaustive optimum on the small-graph fixture set") {
  const auto graphs = testing::small_graph_fixtures();
  CHECK(graphs.size() >= 20);
  for (const auto& g : graphs) {
    INFO(g.name());
    const Partition p = detect_communities(g, {0, 1});
    CHECK(modularity(g, p) == doctest::Approx(testing::best_modularity(g)).epsilon(1e-12));
  }
}

TEST_CASE("detector output refines components and is deterministic") {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const Layer l = testing::random_layer("r", 60, 0.03 + 0.01 * (trial % 5), rng);
    for (std::uint64_t seed : {0ull, 12345ull}) {
      const Partition a = detect_communities(l, {seed, 3});
      const Partition b = detect_communities(l, {seed, 3});
      CHECK(a == b);
      const Partition cc = connected_components(l);
      for (const auto& c : a.communities()) {
        CHECK(c.size() >= 3);
        for (Vertex v : c) CHECK(cc.community_of(v) == cc.community_of(c.front()));
      }
      for (std::size_t i = 1; i < a.community_count(); ++i) {
        const auto& x = a.community(i - 1);
        const auto& y = a.community(i);
        CHECK((x.size() > y.size() || (x.size() == y.size() && x.front() < y.front())));
      }
    }
  }
}

TEST_CASE("component-restricted labels match the full run") {
  Rng rng(23);
  const Layer l = testing::random_layer("r", 80, 0.04, rng);
  const Graph g = to_graph(l);
  const auto full = louvain_labels(g, g.edge_count());
  const Partition cc = connected_components(l);
  for (const auto& comp : cc.communities()) {
    const Graph sub = induced_subgraph(g, comp);
    const auto part = louvain_labels(sub, g.edge_count());
    for (std::size_t i = 0; i < comp.size(); ++i)
      for (std::size_t j = 0; j < comp.size(); ++j)
        CHECK((part[i] == part[j]) == (full[comp[i]] == full[comp[j]]));
  }
}

TEST_CASE("partition file round trip") {
  const std::vector<std::int64_t> labels{0, 0, 0, -1, 1, 1, 1};
  const Partition p = Partition::from_labels(labels);
  const std::string text = write_partition(p, "(a AND b)");
  CHECK(text == "# partition (a AND b) vertices 7\n0 0\n1 0\n2 0\n3 -\n4 1\n5 1\n6 1\n");
  const auto back = read_partition(text);
  CHECK(back.layer == "(a AND b)");
  CHECK(back.partition == p);
  CHECK_THROWS_AS(read_partition("# partition x vertices 2\n0 0\n5 0\n"), DataError);
}
