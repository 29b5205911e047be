#include "mlnet/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mlnet/community.hpp"
#include "mlnet/community_algebra.hpp"
#include "mlnet/compose.hpp"
#include "mlnet/error.hpp"
#include "mlnet/experiment.hpp"
#include "mlnet/layer.hpp"
#include "mlnet/schema.hpp"
#include "mlnet/synth.hpp"
#include "csv.hpp"
#include "text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mlnet {

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 1;
  std::string format = "csv";
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create directory '" + dir + "': " + ec.message());
}

std::string require_out(const Globals& g, const char* what) {
  if (g.out.empty()) throw ConfigError(std::string("--out is required: ") + what);
  return g.out;
}

InstanceTable load_table(const std::string& dataset, const std::string& schema_path, std::ostream& err) {
  const Schema schema = parse_schema(read_file(schema_path));
  InstanceTable table = load_dataset(read_file(dataset), schema);
  const auto report = validate_instances(table);
  if (report.rejected > 0) {
    err << "warning: rejected " << report.rejected << " of " << report.input_rows << " rows (lines";
    for (auto l : report.rejected_lines) err << " " << l;
    err << ")\n";
  }
  return table;
}

// ---------------------------------------------------------------------------

void cmd_build(const Globals& g, const std::string& dataset, const std::string& schema_path,
               const std::string& baseline_text, std::ostream& out, std::ostream& err) {
  const std::string dir = require_out(g, "output directory for layer files");
  const InstanceTable table = load_table(dataset, schema_path, err);

  LayerStore raw;
  for (const auto& f : table.schema().features) raw.emplace(f.name, build_layer(table, f, g.threads));

  std::vector<std::string> baseline_refs;
  std::optional<LayerExpr> baseline;
  if (!baseline_text.empty()) {
    baseline = parse_expr(baseline_text);
    baseline_refs = baseline->references();
    for (const auto& r : baseline_refs) (void)table.schema().feature(r);
  }

  ensure_dir(dir);
  json rows = json::array();
  std::string csv_report = "layer,expression,vertices,edges,density\n";
  for (const auto& f : table.schema().features) {
    const bool in_baseline = std::find(baseline_refs.begin(), baseline_refs.end(), f.name) != baseline_refs.end();
    Layer layer = baseline && !in_baseline ? eval_expr(LayerExpr::and_(LayerExpr::ref(f.name), *baseline), raw)
                                           : raw.at(f.name);
    write_file((fs::path(dir) / (f.name + ".edges")).string(), write_edge_list(layer));
    const double density = layer.vertex_count() >= 2 ? layer_density(layer) : 0.0;
    csv_report += csv::quote(f.name) + "," + csv::quote(layer.name()) + "," + std::to_string(layer.vertex_count()) +
                  "," + std::to_string(layer.edge_count()) + "," + text::format_double(density) + "\n";
    rows.push_back({{"layer", f.name},
                    {"expression", layer.name()},
                    {"vertices", layer.vertex_count()},
                    {"edges", layer.edge_count()},
                    {"density", density}});
  }
  write_file((fs::path(dir) / "densities.csv").string(), csv_report);
  if (g.format == "json")
    out << rows.dump(2) << "\n";
  else
    out << csv_report;
}

void cmd_compose(const Globals& g, const std::string& expr_text, const std::string& layer_dir, std::ostream& out) {
  const std::string file = require_out(g, "output edge-list file");
  const LayerExpr expr = parse_expr(expr_text);
  LayerStore store;
  for (const auto& name : expr.references()) {
    const fs::path p = fs::path(layer_dir) / (name + ".edges");
    if (!fs::exists(p)) throw ConfigError("unresolved layer '" + name + "' (no " + p.string() + ")");
    store.emplace(name, read_edge_list(read_file(p.string())));
  }
  const Layer result = eval_expr(expr, store);
  write_file(file, write_edge_list(result));

  std::optional<BoundReport> bounds;
  switch (expr.kind()) {
    case LayerExpr::Kind::and_:
    case LayerExpr::Kind::or_: {
      const Layer a = eval_expr(expr.lhs(), store);
      const Layer b = eval_expr(expr.rhs(), store);
      bounds = check_bounds(result, expr.kind() == LayerExpr::Kind::and_ ? ComposeOp::and_ : ComposeOp::or_, {&a, &b});
      break;
    }
    case LayerExpr::Kind::not_: {
      const Layer a = eval_expr(expr.child(), store);
      bounds = check_bounds(result, ComposeOp::not_, {&a});
      break;
    }
    case LayerExpr::Kind::ref: break;
  }
  if (g.format == "json") {
    json j{{"layer", result.name()}, {"vertices", result.vertex_count()}, {"edges", result.edge_count()}};
    if (bounds) j["bounds"] = {{"op", to_string(bounds->op)}, {"lower", bounds->lower}, {"upper", bounds->upper},
                               {"result_edges", bounds->result_edges}, {"pass", bounds->pass}};
    out << j.dump(2) << "\n";
  } else {
    out << result.name() << ": " << result.edge_count() << " edges over " << result.vertex_count() << " vertices\n";
    if (bounds) out << "bounds " << bounds->describe() << "\n";
  }
  if (bounds && !bounds->pass) throw InvariantError("edge-count bound violated: " + bounds->describe());
}

void cmd_communities(const Globals& g, const std::string& layer_file, std::size_t min_size, std::ostream& out) {
  const std::string file = require_out(g, "output partition file");
  const Layer layer = read_edge_list(read_file(layer_file));
  const Partition p = detect_communities(layer, {g.seed.value_or(0), min_size});
  write_file(file, write_partition(p, layer.name()));
  out << layer.name() << ": " << p.community_count() << " communities, " << p.assigned_count() << " of "
      << p.vertex_count() << " vertices assigned\n";
}

void cmd_recreate(const Globals& g, const std::vector<std::string>& files, std::size_t min_size, bool verify,
                  const std::string& layer_dir, std::ostream& out) {
  const std::string file = require_out(g, "output partition file");
  if (files.size() < 2) throw ConfigError("recreate needs at least two partition files");
  std::vector<Partition> parts;
  std::vector<LayerExpr> refs;
  for (const auto& f : files) {
    auto np = read_partition(read_file(f));
    refs.push_back(LayerExpr::ref(np.layer));
    parts.push_back(std::move(np.partition));
  }
  const LayerExpr expr = LayerExpr::and_all(refs);
  const Partition p = intersect_partitions(parts, min_size);
  write_file(file, write_partition(p, expr.to_string()));
  out << expr.to_string() << ": " << p.community_count() << " recreated communities"
      << (parts.size() > 2 ? " (k-way intersection: heuristic)" : "") << "\n";

  if (verify) {
    if (layer_dir.empty()) throw ConfigError("--verify needs --layers");
    LayerStore store;
    for (const auto& name : expr.references()) {
      const fs::path path = fs::path(layer_dir) / (name + ".edges");
      if (!fs::exists(path)) throw ConfigError("unresolved layer '" + name + "' (no " + path.string() + ")");
      store.emplace(name, read_edge_list(read_file(path.string())));
    }
    const Layer composed = eval_expr(expr, store);
    const Graph g = to_graph(composed);
    std::size_t bad = 0;
    for (std::size_t c = 0; c < p.community_count(); ++c) {
      if (!induces_connected(g, p.community(c))) {
        ++bad;
        out << "verify: recreated community " << c << " is not connected in " << composed.name() << "\n";
      }
    }
    out << "verify: " << (p.community_count() - bad) << " of " << p.community_count()
        << " recreated communities are connected in the composed layer\n";
  }
}

void cmd_validate(const Globals& g, const std::string& actual_file, const std::string& recreated_file, std::size_t k,
                  std::ostream& out) {
  const auto actual = read_partition(read_file(actual_file));
  const auto recreated = read_partition(read_file(recreated_file));
  const auto series = jaccard_rank_compare(actual.partition, recreated.partition, k);
  std::string body;
  if (g.format == "json") {
    json j = json::array();
    for (const auto& p : series)
      j.push_back({{"rank", p.rank}, {"jaccard", p.jaccard}, {"actual_size", p.actual_size},
                   {"recreated_size", p.recreated_size}});
    body = j.dump(2) + "\n";
  } else {
    body = jaccard_to_csv(series);
  }
  if (!g.out.empty())
    write_file(g.out, body);
  else
    out << body;
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> grid;
  auto parts = text::split(spec, ':');
  if (parts.size() == 3) {
    auto lo = text::parse_double(parts[0]);
    auto hi = text::parse_double(parts[1]);
    auto step = text::parse_double(parts[2]);
    if (!lo || !hi || !step || *step <= 0 || *hi < *lo) throw ConfigError("bad grid '" + spec + "' (lo:hi:step)");
    const auto count = static_cast<std::size_t>(std::floor((*hi - *lo) / *step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) grid.push_back(*lo + static_cast<double>(i) * *step);
    return grid;
  }
  for (auto p : text::split(spec, ',')) {
    auto v = text::parse_double(p);
    if (!v) throw ConfigError("bad grid value '" + std::string(p) + "'");
    grid.push_back(*v);
  }
  return grid;
}

void cmd_sweep(const Globals& g, const std::string& dataset, const std::string& schema_path,
               const std::string& feature, const std::string& grid_spec, std::ostream& out, std::ostream& err) {
  const InstanceTable table = load_table(dataset, schema_path, err);
  const auto grid = parse_grid(grid_spec);
  const auto sweep = threshold_sweep(table, table.schema().feature(feature), grid);
  std::string body;
  if (g.format == "json") {
    json j = json::array();
    for (const auto& p : sweep) j.push_back({{"threshold", p.threshold}, {"density", p.density}, {"delta", p.delta}});
    body = j.dump(2) + "\n";
  } else {
    body = sweep_to_csv(sweep);
  }
  if (!g.out.empty())
    write_file(g.out, body);
  else
    out << body;
  if (sweep.size() >= 2) {
    const auto s = suggest_threshold(sweep);
    err << "suggested threshold: " << text::format_double(s.threshold)
        << (s.warning ? " (warning: density never changes over the grid)" : "") << "\n";
  }
}

void write_synth(const SynthSpec& spec, const std::string& dir, std::ostream& out) {
  const SynthResult r = generate(spec);
  ensure_dir(dir);
  write_file((fs::path(dir) / "dataset.csv").string(), write_dataset(r.table));
  write_file((fs::path(dir) / "schema.cfg").string(), write_schema(r.table.schema()));
  write_file((fs::path(dir) / "blocks.part").string(), write_partition(r.blocks, "blocks"));
  for (std::size_t f = 0; f < spec.features.size(); ++f) {
    const auto& name = spec.features[f].spec.name;
    write_file((fs::path(dir) / ("truth_" + name + ".part")).string(), write_partition(r.truth[f], name));
  }
  out << "synth: " << r.table.size() << " instances, " << spec.block_sizes.size() << " blocks, "
      << spec.features.size() << " features -> " << dir << "\n";
}

void cmd_synth(const Globals& g, const std::string& spec_file, std::ostream& out) {
  SynthSpec spec = parse_synth_spec(read_file(spec_file));
  if (g.seed) spec.seed = *g.seed;
  write_synth(spec, require_out(g, "output directory"), out);
}

void cmd_experiment(const Globals& g, const std::string& synth_file, const std::string& dataset,
                    const std::string& schema_path, const std::string& config_file, bool verify, std::ostream& out,
                    std::ostream& err) {
  const std::string dir = require_out(g, "output directory for the run report");
  json config_json = json::object();
  InstanceTable table;
  if (!synth_file.empty()) {
    const std::string text = read_file(synth_file);
    SynthSpec spec = parse_synth_spec(text);
    const json sj = json::parse(text);
    if (sj.contains("experiment")) config_json = sj.at("experiment");
    table = generate(spec).table;
  } else {
    if (dataset.empty() || schema_path.empty()) throw ConfigError("experiment needs --synth or --dataset and --schema");
    table = load_table(dataset, schema_path, err);
  }
  if (!config_file.empty()) {
    json cj;
    try {
      cj = json::parse(read_file(config_file));
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("experiment config: ") + e.what());
    }
    config_json = cj.contains("experiment") ? cj.at("experiment") : cj;
  }
  ExperimentConfig config = parse_experiment_config(config_json);
  if (g.seed) config.detect.seed = *g.seed;
  if (g.threads > 1) config.threads = g.threads;
  if (verify) config.verify = true;

  const RunReport report = run_experiment(table, config);
  ensure_dir(dir);
  const json j = report.to_json();
  write_file((fs::path(dir) / "report.json").string(), j.dump(2) + "\n");
  write_file((fs::path(dir) / "coverage.csv").string(), report.coverage.to_csv());
  std::string densities = "layer,edges,density\n";
  for (const auto& l : report.layers)
    densities += csv::quote(l.expression) + "," + std::to_string(l.edges) + "," + text::format_double(l.density) + "\n";
  for (const auto& [l, b] : report.extra)
    densities += csv::quote(l.expression) + "," + std::to_string(l.edges) + "," + text::format_double(l.density) + "\n";
  for (const auto& c : report.compositions)
    densities += csv::quote(c.expression) + "," + std::to_string(c.edges) + "," + text::format_double(c.density) + "\n";
  write_file((fs::path(dir) / "densities.csv").string(), densities);
  std::string timings = "stage,median_s,samples_s\n";
  for (const auto& s : report.stages) {
    std::string samples;
    for (std::size_t i = 0; i < s.samples_s.size(); ++i) samples += (i ? ";" : "") + text::format_double(s.samples_s[i]);
    timings += s.stage + "," + text::format_double(s.median_s) + "," + samples + "\n";
  }
  write_file((fs::path(dir) / "timings.csv").string(), timings);
  std::string sp;
  for (const auto& s : report.preservation) sp += s.to_text();
  write_file((fs::path(dir) / "self_preservation.txt").string(), sp);
  for (std::size_t c = 0; c < report.compositions.size(); ++c)
    write_file((fs::path(dir) / ("jaccard_" + std::to_string(c + 1) + ".csv")).string(),
               "# " + report.compositions[c].expression + "\n" + jaccard_to_csv(report.compositions[c].jaccard));

  if (g.format == "json") {
    out << j.dump(2) << "\n";
    return;
  }
  out << "instances: " << report.instances << "\n";
  for (const auto& c : report.compositions) {
    out << c.expression << ": " << c.actual.community_count() << " actual / " << c.recreated.community_count()
        << " recreated communities, J =";
    for (const auto& p : c.jaccard) out << " " << text::format_double(p.jaccard);
    out << (c.heuristic ? " (k-way)" : "") << ", bounds " << (c.bounds.pass ? "pass" : "FAIL") << "\n";
  }
  out << "recreation path " << text::format_double(report.recreation_path_s) << " s, recompute path "
      << text::format_double(report.recompute_path_s) << " s, ratio " << text::format_double(report.ratio()) << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multilayer network composition and community recreation", "mlnet"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Detector / generator seed");
  app.add_option("--out", g.out, "Output file or directory");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"csv", "json"}));

  std::string dataset, schema_path, baseline, expr, layer_dir, layer_file, actual, recreated, feature, grid,
      spec_file, config_file;
  std::size_t min_size = 3, k = 5;
  bool verify = false;
  std::vector<std::string> part_files;

  auto* build = app.add_subcommand("build", "Build one layer per feature");
  build->add_option("--dataset", dataset, "CSV dataset")->required();
  build->add_option("--schema", schema_path, "Schema config")->required();
  build->add_option("--baseline", baseline, "Expression AND-ed into every other feature's layer");

  auto* compose = app.add_subcommand("compose", "Evaluate a layer expression");
  compose->add_option("expr", expr, "Expression, e.g. \"light AND weather\"")->required();
  compose->add_option("--layers", layer_dir, "Directory of <name>.edges files")->required();

  auto* comm = app.add_subcommand("communities", "Detect communities in a layer");
  comm->add_option("layer", layer_file, "Edge-list file")->required();
  comm->add_option("--min-size", min_size, "Smallest community kept");

  auto* rec = app.add_subcommand("recreate", "Intersect per-layer partitions");
  rec->add_option("partitions", part_files, "Partition files")->required();
  rec->add_option("--min-size", min_size, "Smallest community kept");
  rec->add_flag("--verify", verify, "Check recreated communities against the composed layer");
  rec->add_option("--layers", layer_dir, "Directory of <name>.edges files (for --verify)");

  auto* val = app.add_subcommand("validate", "Rank-wise Jaccard of two partitions");
  val->add_option("actual", actual, "Partition from the composed layer")->required();
  val->add_option("recreated", recreated, "Recreated partition")->required();
  val->add_option("-k,--k", k, "Ranks to compare");

  auto* sweep = app.add_subcommand("sweep", "Layer density over a threshold grid");
  sweep->add_option("--dataset", dataset, "CSV dataset")->required();
  sweep->add_option("--schema", schema_path, "Schema config")->required();
  sweep->add_option("--feature", feature, "Feature to sweep")->required();
  sweep->add_option("--grid", grid, "lo:hi:step or comma list")->required();

  auto* synth = app.add_subcommand("synth", "Generate a planted-block dataset");
  synth->add_option("--spec", spec_file, "Synth spec (JSON)")->required();

  auto* exp = app.add_subcommand("experiment", "Recreate-vs-recompute run");
  exp->add_option("--synth", spec_file, "Synth spec (JSON)");
  exp->add_option("--dataset", dataset, "CSV dataset");
  exp->add_option("--schema", schema_path, "Schema config");
  exp->add_option("--config", config_file, "Experiment config (JSON)");
  exp->add_flag("--verify", verify, "Check recreated communities against the composed layers");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build) cmd_build(g, dataset, schema_path, baseline, out, err);
    else if (*compose) cmd_compose(g, expr, layer_dir, out);
    else if (*comm) cmd_communities(g, layer_file, min_size, out);
    else if (*rec) cmd_recreate(g, part_files, min_size, verify, layer_dir, out);
    else if (*val) cmd_validate(g, actual, recreated, k, out);
    else if (*sweep) cmd_sweep(g, dataset, schema_path, feature, grid, out, err);
    else if (*synth) cmd_synth(g, spec_file, out);
    else if (*exp) cmd_experiment(g, spec_file, dataset, schema_path, config_file, verify, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace mlnet
