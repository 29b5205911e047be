#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mlnet/community.hpp"
#include "mlnet/schema.hpp"

namespace mlnet {

struct SynthFeature {
  FeatureSpec spec;
  /// Fraction of blocks paired up to share this feature's value, so the
  /// feature's groups are unions of blocks.
  double merge_fraction = 0.0;
  /// Re-deal instances to blocks independently for this feature.
  bool permute = false;
};

/// Planted-block dataset description. Within a group every pair of values is
/// within the feature's threshold and across groups every pair is beyond it
/// (before noise), so each noise-free layer is a disjoint union of cliques.
struct SynthSpec {
  std::size_t n_instances = 0;
  std::uint64_t seed = 1;
  /// Probability that a value is re-drawn from a uniformly chosen group.
  double noise = 0.0;
  std::vector<std::size_t> block_sizes;
  std::vector<SynthFeature> features;

  Schema schema() const;
  void validate() const;
};

struct SynthResult {
  InstanceTable table;
  /// Block of each instance (before any per-feature permutation).
  Partition blocks;
  /// Value groups per feature, in schema order.
  std::vector<Partition> truth;
};

SynthResult generate(const SynthSpec& spec);

/// JSON form; see docs/formats.md. Block sizes may be listed explicitly
/// ("blocks": [..]), fixed ("blocks": {"size": s}) or drawn from a range
/// ("blocks": {"min_size": a, "max_size": b}).
SynthSpec parse_synth_spec(std::string_view json_text);

}  // namespace mlnet
