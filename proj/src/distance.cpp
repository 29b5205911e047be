#include "mlnet/distance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "mlnet/error.hpp"

namespace mlnet {

DistanceValue numeric_distance(double a, double b) { return std::abs(a - b); }

DistanceValue nominal_distance(std::string_view a, std::string_view b) {
  return a == b ? DistanceValue{0.0} : DistanceValue::undefined();
}

DistanceValue date_distance(Date a, Date b) { return static_cast<double>(std::llabs(a.days - b.days)); }

int time_slot(int hour, int minute) { return 2 * hour + 1 + minute / 30; }

DistanceValue time_distance(TimeOfDay a, TimeOfDay b) {
  return static_cast<double>(std::abs(time_slot(a) - time_slot(b)));
}

DistanceValue haversine_distance(GeoPoint p, GeoPoint q, double radius) {
  constexpr double to_rad = std::numbers::pi / 180.0;
  const double lat1 = p.lat * to_rad;
  const double lat2 = q.lat * to_rad;
  const double s_lat = std::sin((lat1 - lat2) / 2.0);
  const double s_lon = std::sin((p.lon - q.lon) * to_rad / 2.0);
  double h = s_lat * s_lat + std::cos(lat1) * std::cos(lat2) * s_lon * s_lon;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * radius * std::asin(std::sqrt(h));
}

namespace {

template <class T>
const T& as(const FeatureSpec& spec, const Value& v) {
  if (const T* p = std::get_if<T>(&v)) return *p;
  throw DataError("feature '" + spec.name + "' (" + std::string(to_string(spec.type)) +
                  ") received a value of a different type");
}

}  // namespace

DistanceValue feature_distance(const FeatureSpec& spec, const Value& a, const Value& b) {
  if (is_missing(a) || is_missing(b)) return DistanceValue::undefined();
  switch (spec.type) {
    case FeatureType::numeric: return numeric_distance(as<double>(spec, a), as<double>(spec, b));
    case FeatureType::nominal: return nominal_distance(as<std::string>(spec, a), as<std::string>(spec, b));
    case FeatureType::date: return date_distance(as<Date>(spec, a), as<Date>(spec, b));
    case FeatureType::time: return time_distance(as<TimeOfDay>(spec, a), as<TimeOfDay>(spec, b));
    case FeatureType::location: return haversine_distance(as<GeoPoint>(spec, a), as<GeoPoint>(spec, b), spec.radius);
  }
  throw InvariantError("unhandled feature type");
}

}  // namespace mlnet
