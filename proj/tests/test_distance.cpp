#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mlnet/distance.hpp"
#include "mlnet/error.hpp"
#include "mlnet/rng.hpp"

using namespace mlnet;

namespace {

// Independent great-circle reference: chord length between unit vectors,
// then central angle 2 asin(chord / 2).
double chord_great_circle(double lat1, double lon1, double lat2, double lon2, double r) {
  const double k = std::numbers::pi / 180.0;
  auto vec = [&](double la, double lo) {
    return std::array<double, 3>{std::cos(la * k) * std::cos(lo * k), std::cos(la * k) * std::sin(lo * k),
                                 std::sin(la * k)};
  };
  const auto a = vec(lat1, lon1);
  const auto b = vec(lat2, lon2);
  const double chord = std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                                 (a[2] - b[2]) * (a[2] - b[2]));
  return 2.0 * r * std::asin(std::min(1.0, chord / 2.0));
}

// Day counting by walking the calendar one day at a time.
long brute_days_between(int y1, int m1, int d1, int y2, int m2, int d2) {
  auto leap = [](int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; };
  auto dim = [&](int y, int m) {
    static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && leap(y) ? 29 : days[m - 1];
  };
  long n = 0;
  while (y1 != y2 || m1 != m2 || d1 != d2) {
    ++n;
    if (++d1 > dim(y1, m1)) {
      d1 = 1;
      if (++m1 > 12) {
        m1 = 1;
        ++y1;
      }
    }
  }
  return n;
}

}  // namespace

TEST_CASE("numeric distance") {
  CHECK(numeric_distance(30, 30).value() == 0);
  CHECK(numeric_distance(30, 45).value() == 15);
  CHECK(numeric_distance(-2.5, 1.5).value() == 4.0);
}

TEST_CASE("nominal distance") {
  CHECK(nominal_distance("daylight", "daylight").value() == 0);
  CHECK_FALSE(nominal_distance("dry", "wet or damp").defined());
  CHECK(nominal_distance("fog or mist", "fog or mist").value() == 0);
  CHECK_FALSE(DistanceValue::undefined().within(1e300));
}

TEST_CASE("date distance against a day-walking oracle") {
  CHECK(date_distance(make_date(2014, 1, 1), make_date(2014, 1, 1)).value() == 0);
  CHECK(date_distance(make_date(2014, 1, 1), make_date(2014, 1, 15)).value() == 14);
  CHECK(date_distance(make_date(2014, 2, 28), make_date(2014, 3, 1)).value() == 1);
  CHECK(date_distance(make_date(2016, 2, 28), make_date(2016, 3, 1)).value() == 2);
  CHECK(date_distance(make_date(2015, 6, 30), make_date(2013, 11, 2)).value() ==
        brute_days_between(2013, 11, 2, 2015, 6, 30));
  CHECK(date_distance(make_date(1999, 12, 31), make_date(2000, 3, 1)).value() ==
        brute_days_between(1999, 12, 31, 2000, 3, 1));
}

TEST_CASE("time slot") {
  CHECK(time_slot(0, 0) == 1);
  CHECK(time_slot(9, 15) == 19);
  CHECK(time_slot(23, 45) == 48);
  int counts[49] = {};
  for (int m = 0; m < 1440; ++m) {
    const int s = time_slot(m / 60, m % 60);
    REQUIRE(s >= 1);
    REQUIRE(s <= 48);
    ++counts[s];
  }
  for (int s = 1; s <= 48; ++s) CHECK(counts[s] == 30);
}

TEST_CASE("time distance does not wrap") {
  CHECK(time_distance({9, 15}, {9, 29}).value() == 0);
  CHECK(time_distance({9, 15}, {10, 40}).value() == 3);
  CHECK(time_distance({0, 10}, {23, 50}).value() == 47);
}

TEST_CASE("haversine") {
  const GeoPoint london{51.5074, -0.1278}, paris{48.8566, 2.3522};
  CHECK(haversine_distance(london, london, 6371).value() == 0);
  const double d = haversine_distance(london, paris, 6371).value();
  CHECK(std::abs(d - 343.6) / 343.6 < 1e-3);
  CHECK(haversine_distance({0, 0}, {0, 180}, 6371).value() == doctest::Approx(std::numbers::pi * 6371).epsilon(1e-9));
  CHECK(haversine_distance({90, 0}, {-90, 0}, 1).value() == doctest::Approx(std::numbers::pi).epsilon(1e-9));
}

TEST_CASE("haversine agrees with the chord reference") {
  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    const GeoPoint p{rng.uniform(-90, 90), rng.uniform(-180, 180)};
    const GeoPoint q{rng.uniform(-90, 90), rng.uniform(-180, 180)};
    const double ref = chord_great_circle(p.lat, p.lon, q.lat, q.lon, 3958.8);
    const double got = haversine_distance(p, q, 3958.8).value();
    CHECK(got == doctest::Approx(ref).epsilon(1e-9));
    CHECK(got >= 0);
    CHECK(got <= std::numbers::pi * 3958.8 * (1 + 1e-12));
  }
}

TEST_CASE("feature distance dispatch") {
  FeatureSpec nominal{.name = "w", .type = FeatureType::nominal};
  FeatureSpec loc{.name = "l", .type = FeatureType::location, .threshold = 1.0};
  FeatureSpec time{.name = "t", .type = FeatureType::time, .threshold = 1.0};
  CHECK(feature_distance(nominal, Value{std::string("snow")}, Value{std::string("snow")}).value() == 0);
  CHECK(feature_distance(loc, Value{GeoPoint{1, 2}}, Value{GeoPoint{1, 2}}).value() == 0);
  CHECK_FALSE(feature_distance(nominal, Value{Missing{}}, Value{std::string("x")}).defined());
  CHECK_FALSE(feature_distance(loc, Value{GeoPoint{1, 2}}, Value{Missing{}}).defined());
  CHECK(feature_distance(time, Value{TimeOfDay{9, 15}}, Value{TimeOfDay{10, 40}}).value() == 3);
  CHECK_THROWS_AS(feature_distance(nominal, Value{1.0}, Value{std::string("x")}), DataError);
}

TEST_CASE("symmetry and non-negativity on random inputs") {
  Rng rng(7);
  const FeatureSpec specs[] = {
      {.name = "n", .type = FeatureType::numeric, .threshold = 1.0},
      {.name = "c", .type = FeatureType::nominal},
      {.name = "d", .type = FeatureType::date, .threshold = 1.0},
      {.name = "t", .type = FeatureType::time, .threshold = 1.0},
      {.name = "l", .type = FeatureType::location, .threshold = 1.0},
  };
  auto draw = [&](FeatureType t) -> Value {
    if (rng.chance(0.05)) return Missing{};
    switch (t) {
      case FeatureType::numeric: return rng.uniform(-1e3, 1e3);
      case FeatureType::nominal: return std::string(1, static_cast<char>('a' + rng.below(4)));
      case FeatureType::date: return Date{static_cast<std::int64_t>(rng.below(40000))};
      case FeatureType::time:
        return TimeOfDay{static_cast<int>(rng.below(24)), static_cast<int>(rng.below(60))};
      case FeatureType::location: return GeoPoint{rng.uniform(-90, 90), rng.uniform(-180, 180)};
    }
    return Missing{};
  };
  for (const auto& spec : specs) {
    for (int i = 0; i < 1000; ++i) {
      const Value a = draw(spec.type), b = draw(spec.type);
      const auto ab = feature_distance(spec, a, b), ba = feature_distance(spec, b, a);
      REQUIRE(ab.defined() == ba.defined());
      if (ab.defined()) {
        CHECK(ab.value() == ba.value());
        CHECK(ab.value() >= 0);
      }
      if (!is_missing(a)) CHECK(feature_distance(spec, a, a).value() == 0);
    }
  }
}
