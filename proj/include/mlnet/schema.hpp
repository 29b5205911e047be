#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mlnet {

enum class FeatureType { numeric, nominal, date, time, location };

std::string_view to_string(FeatureType t);
std::optional<FeatureType> parse_feature_type(std::string_view s);

/// Earth radius defaults used by the location metric.
inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kEarthRadiusMiles = 3958.8;

struct FeatureSpec {
  std::string name;
  FeatureType type = FeatureType::nominal;
  /// Similarity threshold in the metric's unit. Empty for nominal features.
  std::optional<double> threshold;
  /// Unit label the threshold was given in (after normalisation: "slots", "days", "km", "miles", "").
  std::string unit;
  /// Earth radius for location features, in the same unit as the threshold.
  double radius = kEarthRadiusKm;
  /// Source CSV columns. Location uses two (lat, long) or one "lat,long" column.
  std::vector<std::string> columns;

  double threshold_or_zero() const { return threshold.value_or(0.0); }
};

struct Schema {
  std::vector<FeatureSpec> features;
  /// Optional external id column carried through for reporting only.
  std::optional<std::string> id_column;

  const FeatureSpec& feature(std::string_view name) const;
  std::optional<std::size_t> index_of(std::string_view name) const;
};

/// Parses the line-oriented schema config (grammar in docs/schema.md).
Schema parse_schema(std::string_view config_text);
std::string write_schema(const Schema& schema);

// ---------------------------------------------------------------------------
// Typed values

struct Missing {
  friend bool operator==(Missing, Missing) = default;
};

/// Calendar date as days since 1970-01-01.
struct Date {
  std::int64_t days = 0;
  friend auto operator<=>(const Date&, const Date&) = default;
};

/// Wall-clock time; seconds are discarded on parse.
struct TimeOfDay {
  int hour = 0;
  int minute = 0;
  friend auto operator<=>(const TimeOfDay&, const TimeOfDay&) = default;
};

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

using Value = std::variant<Missing, double, std::string, Date, TimeOfDay, GeoPoint>;

inline bool is_missing(const Value& v) { return std::holds_alternative<Missing>(v); }

std::optional<Date> parse_date(std::string_view s);
std::optional<TimeOfDay> parse_time(std::string_view s);
std::string format_date(Date d);
std::string format_time(TimeOfDay t);
Date make_date(int year, unsigned month, unsigned day);

// ---------------------------------------------------------------------------
// Instance table

struct Instance {
  std::size_t id = 0;
  std::string external_id;
  std::vector<Value> values;
};

struct LoadReport {
  std::size_t input_rows = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::vector<std::size_t> rejected_lines;
  std::map<std::string, std::size_t> missing;

  bool consistent() const { return accepted + rejected == input_rows; }
};

class InstanceTable {
 public:
  InstanceTable() = default;
  explicit InstanceTable(Schema schema) : schema_(std::move(schema)) {}

  const Schema& schema() const { return schema_; }
  std::size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }

  const Instance& operator[](std::size_t i) const { return instances_[i]; }
  const std::vector<Instance>& instances() const { return instances_; }

  /// Appends a row; its id is its position.
  void append(std::vector<Value> values, std::string external_id = {});

  /// Column view over one feature.
  std::vector<Value> column(std::size_t feature) const;

  std::size_t rejected_rows() const { return rejected_; }
  const std::vector<std::size_t>& rejected_lines() const { return rejected_lines_; }
  void note_rejected(std::size_t line) {
    ++rejected_;
    rejected_lines_.push_back(line);
  }

 private:
  Schema schema_;
  std::vector<Instance> instances_;
  std::size_t rejected_ = 0;
  std::vector<std::size_t> rejected_lines_;
};

/// Loads an RFC-4180 CSV with a header row. Rows with malformed date/time
/// cells or the wrong field count are rejected; other bad or empty cells
/// become Missing.
InstanceTable load_dataset(std::string_view csv_text, const Schema& schema);

LoadReport validate_instances(const InstanceTable& table);

/// Writes the table back as CSV using the schema's columns. Reloading the
/// output with the same schema reproduces ids and values exactly.
std::string write_dataset(const InstanceTable& table);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace mlnet
