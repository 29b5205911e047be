#include "mlnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "json.hpp"

#include "mlnet/error.hpp"
#include "mlnet/rng.hpp"

namespace mlnet {

Schema SynthSpec::schema() const {
  Schema s;
  for (const auto& f : features) s.features.push_back(f.spec);
  return s;
}

void SynthSpec::validate() const {
  if (n_instances == 0) throw ConfigError("synth: n_instances must be positive");
  if (!(noise >= 0.0 && noise <= 1.0)) throw ConfigError("synth: noise must be in [0, 1]");
  const auto total = std::accumulate(block_sizes.begin(), block_sizes.end(), std::size_t{0});
  if (total != n_instances)
    throw ConfigError("synth: block sizes sum to " + std::to_string(total) + " but n_instances is " +
                      std::to_string(n_instances));
  if (std::find(block_sizes.begin(), block_sizes.end(), std::size_t{0}) != block_sizes.end())
    throw ConfigError("synth: empty block");
  if (features.empty()) throw ConfigError("synth: no features");
  for (const auto& f : features) {
    if (!(f.merge_fraction >= 0.0 && f.merge_fraction <= 1.0))
      throw ConfigError("synth: feature '" + f.spec.name + "' merge_fraction must be in [0, 1]");
    if (f.spec.threshold && *f.spec.threshold < 0) throw ConfigError("synth: negative threshold");
  }
}

namespace {

// Generates values for one feature's groups.
class ValueMaker {
 public:
  ValueMaker(const FeatureSpec& spec, std::size_t groups) : spec_(spec), groups_(groups) {
    const double tau = spec.threshold_or_zero();
    switch (spec.type) {
      case FeatureType::time: {
        const int width = static_cast<int>(std::floor(tau));
        slot_stride_ = 2 * width + 2;
        slot_width_ = width;
        const int capacity = (48 - 1 - width) / slot_stride_ + 1;
        if (capacity < 0 || groups > static_cast<std::size_t>(capacity))
          throw ConfigError("synth: time feature '" + spec.name + "' cannot separate " + std::to_string(groups) +
                            " groups at threshold " + std::to_string(tau) + " (at most " +
                            std::to_string(std::max(capacity, 0)) + ")");
        break;
      }
      case FeatureType::location: {
        // Centres at least 3*tau apart; each group lies in a cap of radius 0.45*tau.
        const double spacing = tau > 0 ? 3.0 * tau : 1.0;
        step_deg_ = spacing / spec.radius * 180.0 / std::numbers::pi;
        rows_ = static_cast<std::size_t>(120.0 / step_deg_);
        cols_ = static_cast<std::size_t>(360.0 / (2.0 * step_deg_));
        if (rows_ * cols_ < groups)
          throw ConfigError("synth: location feature '" + spec.name + "' cannot place " + std::to_string(groups) +
                            " separated groups at threshold " + std::to_string(tau));
        break;
      }
      default:
        break;
    }
  }

  Value make(std::size_t g, Rng& rng) const {
    const double tau = spec_.threshold_or_zero();
    switch (spec_.type) {
      case FeatureType::nominal: return spec_.name + "-" + std::to_string(g);
      case FeatureType::numeric: {
        const double centre = static_cast<double>(g) * (3.0 * tau + 1.0);
        return centre + rng.unit() * tau;
      }
      case FeatureType::date: {
        const auto width = static_cast<std::int64_t>(std::floor(tau));
        const std::int64_t base = make_date(2014, 1, 1).days + static_cast<std::int64_t>(g) * (2 * width + 2);
        return Date{base + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(width) + 1))};
      }
      case FeatureType::time: {
        const int slot = 1 + static_cast<int>(g) * slot_stride_ + static_cast<int>(rng.below(slot_width_ + 1));
        const int hour = (slot - 1) / 2;
        const int minute = ((slot - 1) % 2) * 30 + static_cast<int>(rng.below(30));
        return TimeOfDay{hour, minute};
      }
      case FeatureType::location: {
        const double lat0 = -60.0 + step_deg_ * (0.5 + static_cast<double>(g / cols_));
        const double lon0 = -180.0 + 2.0 * step_deg_ * (0.5 + static_cast<double>(g % cols_));
        const double r = 0.45 * tau * std::sqrt(rng.unit()) / spec_.radius;  // radians
        const double bearing = 2.0 * std::numbers::pi * rng.unit();
        constexpr double deg = 180.0 / std::numbers::pi;
        const double lat = lat0 + r * std::cos(bearing) * deg;
        const double lon = lon0 + r * std::sin(bearing) * deg / std::cos(lat0 / deg);
        // Six decimals (~0.1 m) keep the CSV short; the cap margin absorbs it.
        return GeoPoint{std::round(lat * 1e6) / 1e6, std::round(lon * 1e6) / 1e6};
      }
    }
    return Missing{};
  }

 private:
  const FeatureSpec& spec_;
  std::size_t groups_;
  int slot_stride_ = 1;
  int slot_width_ = 0;
  double step_deg_ = 1;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

}  // namespace

SynthResult generate(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_instances;
  const std::size_t n_blocks = spec.block_sizes.size();
  Rng rng(spec.seed);

  std::vector<std::size_t> base(n);
  for (std::size_t b = 0, i = 0; b < n_blocks; ++b)
    for (std::size_t k = 0; k < spec.block_sizes[b]; ++k) base[i++] = b;
  rng.shuffle(base);

  SynthResult result;
  result.table = InstanceTable(spec.schema());
  {
    std::vector<std::int64_t> labels(base.begin(), base.end());
    result.blocks = Partition::from_labels(labels, 1);
  }

  std::vector<std::vector<Value>> columns;
  for (std::size_t f = 0; f < spec.features.size(); ++f) {
    const auto& feat = spec.features[f];
    Rng frng(spec.seed * 0x9E3779B97F4A7C15ull + f + 1);

    std::vector<std::size_t> block_of = base;
    if (feat.permute) frng.shuffle(block_of);

    // Pair up a fraction of blocks; each pair shares one group.
    std::vector<std::size_t> group_of_block(n_blocks);
    std::iota(group_of_block.begin(), group_of_block.end(), std::size_t{0});
    std::size_t merged = static_cast<std::size_t>(std::llround(feat.merge_fraction * static_cast<double>(n_blocks)));
    merged -= merged % 2;
    if (merged > 0) {
      std::vector<std::size_t> pick(n_blocks);
      std::iota(pick.begin(), pick.end(), std::size_t{0});
      frng.shuffle(pick);
      for (std::size_t i = 0; i + 1 < merged; i += 2) {
        const auto lo = std::min(pick[i], pick[i + 1]);
        const auto hi = std::max(pick[i], pick[i + 1]);
        group_of_block[hi] = lo;
      }
    }
    // Dense group ids in block order.
    std::vector<std::size_t> dense(n_blocks, SIZE_MAX);
    std::size_t groups = 0;
    for (std::size_t b = 0; b < n_blocks; ++b) {
      const auto root = group_of_block[b];
      if (dense[root] == SIZE_MAX) dense[root] = groups++;
      group_of_block[b] = dense[root];
    }

    ValueMaker maker(feat.spec, groups);
    std::vector<Value> column(n);
    std::vector<std::int64_t> truth(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t g = group_of_block[block_of[i]];
      truth[i] = static_cast<std::int64_t>(g);
      if (spec.noise > 0 && frng.chance(spec.noise)) g = frng.below(groups);
      column[i] = maker.make(g, frng);
    }
    result.truth.push_back(Partition::from_labels(truth, 1));
    columns.push_back(std::move(column));
  }

  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Value> row;
    row.reserve(columns.size());
    for (auto& c : columns) row.push_back(std::move(c[i]));
    result.table.append(std::move(row));
  }
  return result;
}

SynthSpec parse_synth_spec(std::string_view json_text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("synth spec: ") + e.what());
  }
  try {
    SynthSpec spec;
    spec.n_instances = j.at("n_instances").get<std::size_t>();
    spec.seed = j.value("seed", std::uint64_t{1});
    spec.noise = j.value("noise", 0.0);

    const auto& blocks = j.at("blocks");
    if (blocks.is_array()) {
      spec.block_sizes = blocks.get<std::vector<std::size_t>>();
    } else if (blocks.contains("size")) {
      const auto size = blocks.at("size").get<std::size_t>();
      if (size == 0 || spec.n_instances % size != 0)
        throw ConfigError("synth spec: block size " + std::to_string(size) + " does not divide n_instances");
      spec.block_sizes.assign(spec.n_instances / size, size);
    } else {
      const auto lo = blocks.at("min_size").get<std::size_t>();
      const auto hi = blocks.at("max_size").get<std::size_t>();
      if (lo == 0 || hi < lo) throw ConfigError("synth spec: bad block size range");
      Rng rng(spec.seed ^ 0xB10C5ull);
      std::size_t left = spec.n_instances;
      while (left > 0) {
        std::size_t s = lo + rng.below(hi - lo + 1);
        if (left - std::min(s, left) < lo) s = left;
        s = std::min(s, left);
        spec.block_sizes.push_back(s);
        left -= s;
      }
    }

    for (const auto& jf : j.at("features")) {
      SynthFeature f;
      f.spec.name = jf.at("name").get<std::string>();
      const auto type = parse_feature_type(jf.at("type").get<std::string>());
      if (!type) throw ConfigError("synth spec: feature '" + f.spec.name + "' has an unknown type");
      f.spec.type = *type;
      f.merge_fraction = jf.value("merge_fraction", 0.0);
      f.permute = jf.value("permute", false);
      if (f.spec.type != FeatureType::nominal) {
        f.spec.threshold = jf.value("threshold", 0.0);
        f.spec.unit = jf.value("unit", std::string{});
      }
      switch (f.spec.type) {
        case FeatureType::location:
          if (f.spec.unit.empty()) f.spec.unit = "km";
          if (f.spec.unit != "km" && f.spec.unit != "miles")
            throw ConfigError("synth spec: location unit must be km or miles");
          f.spec.radius = jf.value("radius", f.spec.unit == "miles" ? kEarthRadiusMiles : kEarthRadiusKm);
          f.spec.columns = {f.spec.name + "_lat", f.spec.name + "_lon"};
          break;
        case FeatureType::time: f.spec.unit = "slots"; f.spec.columns = {f.spec.name}; break;
        case FeatureType::date: f.spec.unit = "days"; f.spec.columns = {f.spec.name}; break;
        default: f.spec.columns = {f.spec.name};
      }
      spec.features.push_back(std::move(f));
    }
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synth spec: ") + e.what());
  }
}

}  // namespace mlnet
