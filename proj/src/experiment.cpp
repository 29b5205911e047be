#include "mlnet/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <optional>

#include "mlnet/compose.hpp"
#include "mlnet/error.hpp"
#include "mlnet/layer.hpp"
#include "mlnet/rng.hpp"

namespace mlnet {

using nlohmann::json;

namespace {

std::string_view mode_name(PreservationMode m) { return m == PreservationMode::exhaustive ? "exhaustive" : "sampled"; }

// Runs `fn` `reps` times, recording wall-clock samples and the median.
StageTiming timed(std::string stage, std::size_t reps, const std::function<void()>& fn) {
  StageTiming t;
  t.stage = std::move(stage);
  try {
    for (std::size_t r = 0; r < std::max<std::size_t>(reps, 1); ++r) {
      const auto start = std::chrono::steady_clock::now();
      fn();
      const auto stop = std::chrono::steady_clock::now();
      t.samples_s.push_back(std::chrono::duration<double>(stop - start).count());
    }
  } catch (const ConfigError& e) {
    throw ConfigError("stage " + t.stage + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError("stage " + t.stage + ": " + e.what());
  } catch (const InvariantError& e) {
    throw InvariantError("stage " + t.stage + ": " + e.what());
  }
  auto sorted = t.samples_s;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  t.median_s = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return t;
}

}  // namespace

std::vector<std::vector<std::size_t>> and_lattice(std::size_t n_features) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t size = 2; size <= n_features; ++size) {
    std::vector<std::size_t> idx(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    for (;;) {
      out.push_back(idx);
      std::size_t i = size;
      while (i > 0 && idx[i - 1] == n_features - size + (i - 1)) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return out;
}

json ExperimentConfig::to_json() const {
  return json{{"features", features},
              {"baseline", baseline},
              {"seed", detect.seed},
              {"min_size", detect.min_size},
              {"k", k},
              {"repetitions", repetitions},
              {"self_preservation",
               {{"enabled", check_preservation},
                {"mode", mode_name(preservation_mode)},
                {"exhaustive_limit", exhaustive_limit},
                {"sample_count", sample_count},
                {"communities_per_layer", preservation_communities}}},
              {"verify", verify},
              {"threads", threads}};
}

ExperimentConfig parse_experiment_config(const json& j) {
  ExperimentConfig c;
  try {
    c.features = j.value("features", c.features);
    c.baseline = j.value("baseline", c.baseline);
    c.detect.seed = j.value("seed", c.detect.seed);
    c.detect.min_size = j.value("min_size", c.detect.min_size);
    c.k = j.value("k", c.k);
    c.repetitions = j.value("repetitions", c.repetitions);
    c.verify = j.value("verify", c.verify);
    c.threads = j.value("threads", c.threads);
    if (j.contains("self_preservation")) {
      const auto& sp = j.at("self_preservation");
      c.check_preservation = sp.value("enabled", c.check_preservation);
      const auto mode = sp.value("mode", std::string(mode_name(c.preservation_mode)));
      if (mode == "exhaustive")
        c.preservation_mode = PreservationMode::exhaustive;
      else if (mode == "sampled")
        c.preservation_mode = PreservationMode::sampled;
      else
        throw ConfigError("experiment config: self_preservation.mode must be exhaustive or sampled");
      c.exhaustive_limit = sp.value("exhaustive_limit", c.exhaustive_limit);
      c.sample_count = sp.value("sample_count", c.sample_count);
      c.preservation_communities = sp.value("communities_per_layer", c.preservation_communities);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  if (c.k == 0) throw ConfigError("experiment config: k must be at least 1");
  if (c.repetitions == 0) throw ConfigError("experiment config: repetitions must be at least 1");
  return c;
}

const StageTiming& RunReport::stage(std::string_view name) const {
  for (const auto& s : stages)
    if (s.stage == name) return s;
  throw InvariantError("no stage '" + std::string(name) + "' in report");
}

RunReport run_experiment(const InstanceTable& table, const ExperimentConfig& config) {
  RunReport report;
  report.config = config;
  report.instances = table.size();
  report.load = validate_instances(table);
  if (table.size() < 2) throw DataError("experiment needs at least two instances");

  const Schema& schema = table.schema();
  std::vector<std::string> baseline_refs;
  std::optional<LayerExpr> baseline;
  if (!config.baseline.empty()) {
    baseline = parse_expr(config.baseline);
    baseline_refs = baseline->references();
  }
  std::vector<std::string> features = config.features;
  if (features.empty())
    for (const auto& f : schema.features)
      if (std::find(baseline_refs.begin(), baseline_refs.end(), f.name) == baseline_refs.end())
        features.push_back(f.name);
  if (features.size() < 2) throw ConfigError("experiment needs at least two lattice features");
  for (const auto& f : features) (void)schema.feature(f);
  for (const auto& f : baseline_refs) (void)schema.feature(f);

  const auto lattice = and_lattice(features.size());
  const std::size_t reps = config.repetitions;

  // --- build
  LayerStore store;
  report.stages.push_back(timed("build", reps, [&] {
    LayerStore raw;
    for (const auto& f : features) raw.emplace(f, build_layer(table, f, config.threads));
    for (const auto& f : baseline_refs)
      if (!raw.count(f)) raw.emplace(f, build_layer(table, f, config.threads));
    store.clear();
    for (const auto& f : features) {
      if (baseline) {
        Layer l = eval_expr(LayerExpr::and_(LayerExpr::ref(f), *baseline), raw);
        store.emplace(f, std::move(l));
      } else {
        store.emplace(f, raw.at(f));
      }
    }
  }));

  auto expr_for = [&](const std::vector<std::size_t>& subset) {
    std::vector<LayerExpr> refs;
    for (auto i : subset) refs.push_back(LayerExpr::ref(features[i]));
    return LayerExpr::and_all(refs);
  };

  // --- recreation path
  std::map<std::string, Partition> layer_parts;
  report.stages.push_back(timed("detect_layers", reps, [&] {
    layer_parts.clear();
    for (const auto& f : features) layer_parts.emplace(f, detect_communities(store.at(f), config.detect));
  }));

  std::vector<Partition> recreated(lattice.size());
  report.stages.push_back(timed("recreate", reps, [&] {
    for (std::size_t c = 0; c < lattice.size(); ++c) {
      std::vector<const Partition*> parts;
      for (auto i : lattice[c]) parts.push_back(&layer_parts.at(features[i]));
      recreated[c] = intersect_partitions(parts, config.detect.min_size);
    }
  }));

  // --- recompute path
  std::vector<Layer> composed(lattice.size());
  report.stages.push_back(timed("compose", reps, [&] {
    for (std::size_t c = 0; c < lattice.size(); ++c) composed[c] = eval_expr(expr_for(lattice[c]), store);
  }));

  std::vector<Partition> actual(lattice.size());
  report.stages.push_back(timed("detect_composed", reps, [&] {
    for (std::size_t c = 0; c < lattice.size(); ++c) actual[c] = detect_communities(composed[c], config.detect);
  }));

  // --- compare
  std::vector<JaccardSeries> series(lattice.size());
  std::vector<bool> comparable(lattice.size(), true);
  report.stages.push_back(timed("compare", reps, [&] {
    for (std::size_t c = 0; c < lattice.size(); ++c) {
      comparable[c] = actual[c].community_count() > 0 && recreated[c].community_count() > 0;
      series[c] = comparable[c] ? jaccard_rank_compare(actual[c], recreated[c], config.k) : JaccardSeries{};
    }
  }));

  report.recreation_path_s = report.stage("detect_layers").median_s + report.stage("recreate").median_s;
  report.recompute_path_s = report.stage("compose").median_s + report.stage("detect_composed").median_s;

  // --- summaries (untimed)
  for (const auto& f : features) {
    const Layer& l = store.at(f);
    report.layers.push_back({f, l.name(), l.edge_count(), layer_density(l), layer_parts.at(f).community_count()});
  }
  {
    const Layer& a = store.at(features[0]);
    const Layer& b = store.at(features[1]);
    const Layer lor = eval_expr(LayerExpr::or_(LayerExpr::ref(features[0]), LayerExpr::ref(features[1])), store);
    const Layer lnot = eval_expr(LayerExpr::not_(LayerExpr::ref(features[0])), store);
    report.extra.push_back({{lor.name(), lor.name(), lor.edge_count(), layer_density(lor), 0},
                            check_bounds(lor, ComposeOp::or_, {&a, &b})});
    report.extra.push_back({{lnot.name(), lnot.name(), lnot.edge_count(), layer_density(lnot), 0},
                            check_bounds(lnot, ComposeOp::not_, {&a})});
  }

  for (std::size_t c = 0; c < lattice.size(); ++c) {
    CompositionResult r;
    r.expression = composed[c].name();
    for (auto i : lattice[c]) r.features.push_back(features[i]);
    r.edges = composed[c].edge_count();
    r.density = layer_density(composed[c]);
    std::vector<const Layer*> operands;
    for (auto i : lattice[c]) operands.push_back(&store.at(features[i]));
    r.bounds = check_bounds(composed[c], ComposeOp::and_, operands);
    r.actual = actual[c];
    r.recreated = recreated[c];
    r.jaccard = series[c];
    r.comparable = comparable[c];
    r.exact = comparable[c] && std::all_of(r.jaccard.begin(), r.jaccard.end(),
                                           [](const JaccardPoint& p) { return p.jaccard == 1.0; });
    r.heuristic = lattice[c].size() > 2;
    if (config.verify) {
      const Graph g = to_graph(composed[c]);
      for (const auto& comm : recreated[c].communities())
        if (!induces_connected(g, comm)) ++r.disconnected_recreated;
    }
    report.compositions.push_back(std::move(r));
  }

  std::vector<std::pair<std::string, Partition>> cover;
  for (const auto& f : features) cover.emplace_back(f, layer_parts.at(f));
  for (const auto& r : report.compositions) cover.emplace_back(r.expression, r.actual);
  report.coverage = coverage_breakdown(cover);

  if (config.check_preservation) {
    Rng rng(config.detect.seed + 0x5E1F);
    for (const auto& f : features) {
      const Partition& p = layer_parts.at(f);
      PreservationParams params;
      params.mode = config.preservation_mode;
      params.exhaustive_limit = config.exhaustive_limit;
      params.sample_count = config.sample_count;
      params.detect = config.detect;
      params.threads = config.threads;
      std::vector<std::size_t> ids(p.community_count());
      for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
      if (config.preservation_communities > 0 && ids.size() > config.preservation_communities) {
        rng.shuffle(ids);
        ids.resize(config.preservation_communities);
        std::sort(ids.begin(), ids.end());
      }
      if (ids.empty()) continue;
      params.communities = ids;
      report.preservation.push_back(check_self_preserving(store.at(f), p, params));
    }
  }
  return report;
}

nlohmann::json RunReport::to_json() const {
  json j;
  j["config"] = config.to_json();
  j["instances"] = instances;
  json missing = json::object();
  for (const auto& [k, v] : load.missing) missing[k] = v;
  j["load"] = {{"rows", load.input_rows}, {"accepted", load.accepted}, {"rejected", load.rejected}, {"missing", missing}};

  auto bounds_json = [](const BoundReport& b) {
    return json{{"op", to_string(b.op)},      {"result_edges", b.result_edges}, {"operand_edges", b.operand_edges},
                {"lower", b.lower},           {"upper", b.upper},               {"total_pairs", b.total_pairs},
                {"pass", b.pass}};
  };

  j["layers"] = json::array();
  for (const auto& l : layers)
    j["layers"].push_back({{"name", l.name},
                           {"expression", l.expression},
                           {"edges", l.edges},
                           {"density", l.density},
                           {"communities", l.communities}});
  j["extra_compositions"] = json::array();
  for (const auto& [l, b] : extra)
    j["extra_compositions"].push_back(
        {{"expression", l.expression}, {"edges", l.edges}, {"density", l.density}, {"bounds", bounds_json(b)}});

  j["compositions"] = json::array();
  for (const auto& c : compositions) {
    json series = json::array();
    for (const auto& p : c.jaccard)
      series.push_back({{"rank", p.rank},
                        {"jaccard", p.jaccard},
                        {"actual_size", p.actual_size},
                        {"recreated_size", p.recreated_size}});
    json cj{{"expression", c.expression},
            {"features", c.features},
            {"edges", c.edges},
            {"density", c.density},
            {"bounds", bounds_json(c.bounds)},
            {"actual_communities", c.actual.community_count()},
            {"recreated_communities", c.recreated.community_count()},
            {"comparable", c.comparable},
            {"exact", c.exact},
            {"heuristic", c.heuristic},
            {"jaccard", series}};
    if (config.verify) cj["disconnected_recreated"] = c.disconnected_recreated;
    j["compositions"].push_back(std::move(cj));
  }

  j["coverage"] = json::array();
  for (const auto& r : coverage.rows)
    j["coverage"].push_back(
        {{"expression", r.expression}, {"features", r.features}, {"count", r.count}, {"percent", r.percent}});

  j["self_preservation"] = json::array();
  for (const auto& s : preservation) {
    json comms = json::array();
    for (const auto& v : s.communities)
      comms.push_back({{"community", v.community},
                       {"size", v.size},
                       {"preserving", v.preserving},
                       {"exhaustive", v.exhaustive},
                       {"subsets_tested", v.subsets_tested},
                       {"witness", v.witness}});
    j["self_preservation"].push_back(
        {{"layer", s.layer}, {"overall", s.overall}, {"proven", s.proven}, {"communities", comms}});
  }

  json stage_list = json::array();
  for (const auto& s : stages)
    stage_list.push_back({{"stage", s.stage}, {"median_s", s.median_s}, {"samples_s", s.samples_s}});
  j["timings"] = {{"repetitions", config.repetitions},
                  {"stages", stage_list},
                  {"recreation_path", {{"stages", {"detect_layers", "recreate"}}, {"total_s", recreation_path_s}}},
                  {"recompute_path", {{"stages", {"compose", "detect_composed"}}, {"total_s", recompute_path_s}}},
                  {"ratio", ratio()}};
  return j;
}

}  // namespace mlnet
