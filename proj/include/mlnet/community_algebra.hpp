#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mlnet/community.hpp"
#include "mlnet/layer.hpp"

namespace mlnet {

// ---------------------------------------------------------------------------
// Self-preservation
//
// A community C is self-preserving if, for every connected S subset of C with
// |S| >= 3, detection on the graph induced by S and all vertices outside C
// returns S as a community of its own. Edges among the outside vertices are
// kept.

enum class PreservationMode { exhaustive, sampled };

struct PreservationParams {
  PreservationMode mode = PreservationMode::exhaustive;
  /// Exhaustive mode enumerates every connected subset of communities up to
  /// this size and falls back to sampling above it.
  std::size_t exhaustive_limit = 8;
  std::size_t sample_count = 200;
  std::uint64_t sample_seed = 1;
  /// Detector settings; must match the ones the partition was produced with.
  DetectParams detect;
  /// Community ids to check; empty checks all.
  std::vector<std::size_t> communities;
  unsigned threads = 1;
};

struct CommunityVerdict {
  std::size_t community = 0;
  std::size_t size = 0;
  bool preserving = true;
  bool exhaustive = true;  // false: sampled, so "preserving" is evidence only
  std::size_t subsets_tested = 0;
  std::vector<Vertex> witness;  // first failing subset
};

struct SelfPreservationReport {
  std::string layer;
  std::vector<CommunityVerdict> communities;
  bool overall = true;
  /// True when every verdict came from exhaustive enumeration.
  bool proven = true;

  std::string to_text() const;
};

SelfPreservationReport check_self_preserving(const Layer& layer, const Partition& partition,
                                             const PreservationParams& params = {});

/// True if detection on layer[S + (V \ C)] yields S as one community.
bool subset_reforms(const Layer& layer, const Graph& graph, std::span<const Vertex> community,
                    std::span<const Vertex> subset, const DetectParams& detect);

// ---------------------------------------------------------------------------
// Recreation

/// Candidate communities are the non-empty intersections of one community
/// from each input. Vertices unassigned anywhere stay unassigned. Candidates
/// below min_size are dissolved once, after the whole fold.
Partition intersect_partitions(std::span<const Partition> parts, std::size_t min_size = 3);
Partition intersect_partitions(std::span<const Partition* const> parts, std::size_t min_size = 3);
Partition intersect_partitions(const Partition& a, const Partition& b, std::size_t min_size = 3);

/// |A n B| / |A u B|. Throws DataError if both sets are empty.
double jaccard(std::span<const Vertex> a, std::span<const Vertex> b);

struct JaccardPoint {
  std::size_t rank = 0;  // 1-based
  double jaccard = 0;
  std::size_t actual_size = 0;
  std::size_t recreated_size = 0;
};
using JaccardSeries = std::vector<JaccardPoint>;

/// Pairs the i-th largest community of each partition for i = 1..min(k, counts).
JaccardSeries jaccard_rank_compare(const Partition& actual, const Partition& recreated, std::size_t k);
std::string jaccard_to_csv(const JaccardSeries& series);

struct CoverageRow {
  std::string expression;  // "no community" for the uncovered bucket
  std::size_t features = 0;
  std::size_t count = 0;
  double percent = 0;
};

struct CoverageTable {
  std::vector<CoverageRow> rows;  // inputs in given order, then "no community"
  std::size_t total = 0;

  std::string to_csv() const;
};

/// Assigns every vertex to the most specific expression (most distinct
/// layers referenced) whose partition covers it; earlier entries win ties.
CoverageTable coverage_breakdown(std::span<const std::pair<std::string, Partition>> partitions);

}  // namespace mlnet
