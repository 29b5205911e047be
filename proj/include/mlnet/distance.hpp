#pragma once

#include <optional>
#include <string_view>

#include "mlnet/schema.hpp"

namespace mlnet {

/// A feature distance; empty means undefined (nominal mismatch or a missing
/// value), which is never similar under any threshold.
class DistanceValue {
 public:
  DistanceValue() = default;
  constexpr DistanceValue(double v) : value_(v) {}  // NOLINT(implicit)
  static constexpr DistanceValue undefined() { return DistanceValue{}; }

  bool defined() const { return value_.has_value(); }
  double value() const { return *value_; }
  std::optional<double> get() const { return value_; }

  bool within(double threshold) const { return value_ && *value_ <= threshold; }

  friend bool operator==(const DistanceValue&, const DistanceValue&) = default;

 private:
  std::optional<double> value_;
};

DistanceValue numeric_distance(double a, double b);
DistanceValue nominal_distance(std::string_view a, std::string_view b);
DistanceValue date_distance(Date a, Date b);

/// Index of the 30-minute interval containing hh:mm, in 1..48.
int time_slot(int hour, int minute);
inline int time_slot(TimeOfDay t) { return time_slot(t.hour, t.minute); }

/// Slot difference; does not wrap around midnight.
DistanceValue time_distance(TimeOfDay a, TimeOfDay b);

/// Great-circle distance in the unit of `radius` (degrees in).
DistanceValue haversine_distance(GeoPoint p, GeoPoint q, double radius);

/// Dispatches on the feature type. Missing on either side gives undefined.
/// Throws DataError if a value's type does not match the feature type.
DistanceValue feature_distance(const FeatureSpec& spec, const Value& a, const Value& b);

}  // namespace mlnet
