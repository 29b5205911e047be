#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mlnet/community.hpp"
#include "mlnet/community_algebra.hpp"
#include "mlnet/compose.hpp"
#include "mlnet/schema.hpp"

namespace mlnet {

struct ExperimentConfig {
  /// Features whose AND-composition lattice is studied; empty means every
  /// feature not referenced by the baseline.
  std::vector<std::string> features;
  /// Optional expression AND-ed into every lattice feature's layer.
  std::string baseline;
  DetectParams detect;
  std::size_t k = 5;
  std::size_t repetitions = 3;

  bool check_preservation = true;
  PreservationMode preservation_mode = PreservationMode::exhaustive;
  std::size_t exhaustive_limit = 8;
  std::size_t sample_count = 200;
  /// Communities sampled per layer for the self-preservation check (0 = all).
  std::size_t preservation_communities = 5;

  /// Also build each composed layer and check every recreated community is
  /// connected in it.
  bool verify = false;
  unsigned threads = 1;

  nlohmann::json to_json() const;
};

/// Reads the "experiment" object of a config; absent keys keep defaults.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);

struct StageTiming {
  std::string stage;
  std::vector<double> samples_s;
  double median_s = 0;
};

struct CompositionResult {
  std::string expression;
  std::vector<std::string> features;
  std::size_t edges = 0;
  double density = 0;
  BoundReport bounds;
  Partition actual;
  Partition recreated;
  JaccardSeries jaccard;
  bool comparable = true;
  bool exact = true;      // every compared rank has J == 1
  bool heuristic = false; // more than two layers intersected
  std::size_t disconnected_recreated = 0;  // only with verify
};

struct LayerSummary {
  std::string name;
  std::string expression;
  std::size_t edges = 0;
  double density = 0;
  std::size_t communities = 0;
};

struct RunReport {
  ExperimentConfig config;
  std::size_t instances = 0;
  LoadReport load;
  std::vector<LayerSummary> layers;
  /// Extra compositions of the first two lattice features (OR, NOT) with their bound checks.
  std::vector<std::pair<LayerSummary, BoundReport>> extra;
  std::vector<CompositionResult> compositions;
  CoverageTable coverage;
  std::vector<SelfPreservationReport> preservation;
  std::vector<StageTiming> stages;
  double recreation_path_s = 0;
  double recompute_path_s = 0;

  double ratio() const { return recompute_path_s > 0 ? recreation_path_s / recompute_path_s : 0; }
  const StageTiming& stage(std::string_view name) const;
  nlohmann::json to_json() const;
};

/// Runs both paths over the AND-composition lattice:
///   recompute:  compose each lattice expression, then detect on it;
///   recreation: detect on each feature layer, then intersect partitions.
/// Each stage is timed `repetitions` times and reported by its median.
RunReport run_experiment(const InstanceTable& table, const ExperimentConfig& config);

/// All subsets of size >= 2, by size then lexicographic index order.
std::vector<std::vector<std::size_t>> and_lattice(std::size_t n_features);

}  // namespace mlnet
