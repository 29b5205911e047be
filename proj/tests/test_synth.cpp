#include "doctest.h"
#include "mlnet/community_algebra.hpp"
#include "mlnet/error.hpp"
#include "mlnet/synth.hpp"
#include "support.hpp"

using namespace mlnet;

namespace {

SynthSpec all_types_spec(std::vector<std::size_t> blocks, double noise = 0.0) {
  SynthSpec s;
  for (auto b : blocks) s.n_instances += b;
  s.block_sizes = std::move(blocks);
  s.seed = 99;
  s.noise = noise;
  const char* text =
      "feature kind\ntype nominal\n"
      "feature speed\ntype numeric\nthreshold 2\n"
      "feature day\ntype date\nthreshold 3 days\n"
      "feature hour\ntype time\nthreshold 30 minutes\n"
      "feature where\ntype location\nthreshold 10 miles\ncolumns where_lat,where_lon\n";
  for (auto& f : parse_schema(text).features) s.features.push_back({f, 0.0, false});
  return s;
}

bool is_clique_union(const Layer& l, const Partition& groups) {
  for (Vertex u = 0; u < l.vertex_count(); ++u)
    for (Vertex v = u + 1; v < l.vertex_count(); ++v)
      if (l.has_edge(u, v) != (groups.community_of(u) == groups.community_of(v))) return false;
  return true;
}

}  // namespace

TEST_CASE("two blocks of three give two triangles in every layer") {
  const auto r = generate(all_types_spec({3, 3}));
  REQUIRE(r.table.size() == 6);
  for (const auto& f : r.table.schema().features) {
    INFO(f.name);
    const Layer l = build_layer(r.table, f);
    CHECK(l.edge_count() == 6);
    CHECK(is_clique_union(l, r.blocks));
  }
}

TEST_CASE("noise-free layers are unions of cliques and the detector recovers the blocks") {
  const auto spec = all_types_spec({5, 7, 4, 9, 6, 3, 8, 5, 6, 7});
  const auto r = generate(spec);
  for (std::size_t f = 0; f < spec.features.size(); ++f) {
    INFO(spec.features[f].spec.name);
    const Layer l = build_layer(r.table, r.table.schema().features[f]);
    CHECK(is_clique_union(l, r.truth[f]));
    CHECK(r.truth[f] == r.blocks);
    const Partition p = detect_communities(l);
    CHECK(p == r.blocks);
    CHECK(check_self_preserving(l, p).overall);
  }
}

TEST_CASE("generation is deterministic") {
  const auto spec = all_types_spec({4, 4, 6}, 0.2);
  CHECK(write_dataset(generate(spec).table) == write_dataset(generate(spec).table));
  auto other = spec;
  other.seed = 100;
  CHECK(write_dataset(generate(other).table) != write_dataset(generate(spec).table));
}

TEST_CASE("merged and permuted features") {
  SynthSpec s;
  s.n_instances = 40;
  s.block_sizes.assign(10, 4);
  s.seed = 5;
  FeatureSpec a{.name = "a", .type = FeatureType::nominal, .columns = {"a"}};
  FeatureSpec b{.name = "b", .type = FeatureType::nominal, .columns = {"b"}};
  s.features = {{a, 1.0, false}, {b, 0.0, true}};
  const auto r = generate(s);
  CHECK(r.truth[0].community_count() == 5);
  for (const auto& c : r.truth[0].communities()) CHECK(c.size() == 8);
  CHECK(r.truth[1].community_count() == 10);
  CHECK_FALSE(r.truth[1] == r.blocks);
  // merged groups are unions of blocks
  for (const auto& block : r.blocks.communities())
    for (Vertex v : block) CHECK(r.truth[0].community_of(v) == r.truth[0].community_of(block.front()));
}

TEST_CASE("spec validation") {
  auto s = all_types_spec({3, 3});
  s.n_instances = 7;
  CHECK_THROWS_AS(generate(s), ConfigError);
  s = all_types_spec({3, 3}, 1.5);
  CHECK_THROWS_AS(generate(s), ConfigError);
}

TEST_CASE("JSON spec") {
  const auto s = parse_synth_spec(R"({
    "n_instances": 12, "seed": 3, "noise": 0.1,
    "blocks": {"size": 4},
    "features": [
      {"name": "light", "type": "nominal", "merge_fraction": 0.5},
      {"name": "pos", "type": "location", "threshold": 10, "unit": "miles"},
      {"name": "t", "type": "time", "threshold": 3}
    ]})");
  CHECK(s.block_sizes == std::vector<std::size_t>{4, 4, 4});
  CHECK(s.features[0].merge_fraction == 0.5);
  CHECK(s.features[1].spec.radius == kEarthRadiusMiles);
  CHECK(s.features[1].spec.columns == std::vector<std::string>{"pos_lat", "pos_lon"});
  const Schema schema = parse_schema(write_schema(s.schema()));
  const auto r = generate(s);
  CHECK(load_dataset(write_dataset(r.table), schema).size() == 12);

  const auto ranged = parse_synth_spec(R"({"n_instances": 100, "blocks": {"min_size": 4, "max_size": 8},
    "features": [{"name": "a", "type": "nominal"}]})");
  std::size_t total = 0;
  for (auto b : ranged.block_sizes) {
    CHECK(b >= 4);
    CHECK(b <= 8);
    total += b;
  }
  CHECK(total == 100);

  CHECK_THROWS_AS(parse_synth_spec("{"), ConfigError);
  CHECK_THROWS_AS(parse_synth_spec(R"({"n_instances": 10, "blocks": {"size": 3}, "features": []})"), ConfigError);
  CHECK_THROWS_AS(parse_synth_spec(R"({"n_instances": 6, "blocks": [3, 3], "features": [{"name": "a", "type": "video"}]})"),
                  ConfigError);
}
