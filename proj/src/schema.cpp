#include "mlnet/schema.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "csv.hpp"
#include "mlnet/error.hpp"
#include "text.hpp"

namespace mlnet {

std::string_view to_string(FeatureType t) {
  switch (t) {
    case FeatureType::numeric: return "numeric";
    case FeatureType::nominal: return "nominal";
    case FeatureType::date: return "date";
    case FeatureType::time: return "time";
    case FeatureType::location: return "location";
  }
  return "?";
}

std::optional<FeatureType> parse_feature_type(std::string_view s) {
  if (s == "numeric") return FeatureType::numeric;
  if (s == "nominal") return FeatureType::nominal;
  if (s == "date") return FeatureType::date;
  if (s == "time") return FeatureType::time;
  if (s == "location") return FeatureType::location;
  return std::nullopt;
}

const FeatureSpec& Schema::feature(std::string_view name) const {
  auto idx = index_of(name);
  if (!idx) throw ConfigError("schema has no feature '" + std::string(name) + "'");
  return features[*idx];
}

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < features.size(); ++i)
    if (features[i].name == name) return i;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Schema config

namespace {

struct PendingFeature {
  FeatureSpec spec;
  std::size_t line = 0;
  bool has_type = false;
  std::optional<double> raw_threshold;
  std::string raw_unit;
  std::size_t threshold_line = 0;
  std::optional<double> radius;
};

[[noreturn]] void fail(std::size_t line, const std::string& feature, const std::string& what) {
  std::string msg = "schema line " + std::to_string(line);
  if (!feature.empty()) msg += ": feature '" + feature + "'";
  throw ConfigError(msg + ": " + what);
}

// Normalises the threshold unit and converts the value into the metric's native unit.
void finish(PendingFeature& p, std::vector<FeatureSpec>& out) {
  auto& s = p.spec;
  if (!p.has_type) fail(p.line, s.name, "missing 'type'");
  const std::size_t tl = p.threshold_line ? p.threshold_line : p.line;

  if (s.type == FeatureType::nominal) {
    if (p.raw_threshold) fail(tl, s.name, "nominal features take no threshold (exact match only)");
    if (s.columns.empty()) s.columns = {s.name};
    out.push_back(std::move(s));
    return;
  }

  double tau = p.raw_threshold.value_or(0.0);
  const std::string& u = p.raw_unit;
  switch (s.type) {
    case FeatureType::location:
      if (u.empty() || u == "km" || u == "kilometers" || u == "kilometres") {
        s.unit = "km";
        s.radius = p.radius.value_or(kEarthRadiusKm);
      } else if (u == "mi" || u == "mile" || u == "miles") {
        s.unit = "miles";
        s.radius = p.radius.value_or(kEarthRadiusMiles);
      } else {
        fail(tl, s.name, "unknown location unit '" + u + "' (km|miles)");
      }
      if (s.radius <= 0) fail(p.line, s.name, "radius must be positive");
      if (s.columns.empty()) s.columns = {"latitude", "longitude"};
      if (s.columns.size() > 2) fail(p.line, s.name, "location takes one or two columns");
      break;
    case FeatureType::time:
      if (u.empty() || u == "slot" || u == "slots") {
      } else if (u == "hour" || u == "hours" || u == "h") {
        tau *= 2.0;
      } else if (u == "minute" || u == "minutes" || u == "min") {
        tau /= 30.0;
      } else {
        fail(tl, s.name, "unknown time unit '" + u + "' (slots|hours|minutes)");
      }
      s.unit = "slots";
      break;
    case FeatureType::date:
      if (!u.empty() && u != "day" && u != "days") fail(tl, s.name, "unknown date unit '" + u + "' (days)");
      s.unit = "days";
      break;
    default:
      s.unit = u;
  }
  if (s.type != FeatureType::location && s.columns.empty()) s.columns = {s.name};
  if (s.type != FeatureType::location && s.columns.size() != 1) fail(p.line, s.name, "expects exactly one column");
  s.threshold = tau;
  out.push_back(std::move(s));
}

}  // namespace

Schema parse_schema(std::string_view config_text) {
  Schema schema;
  std::optional<PendingFeature> cur;
  std::set<std::string> seen;
  std::size_t line_no = 0;

  for (std::string_view line : text::split_lines(config_text)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;

    auto [key, rest] = text::split_first_word(line);
    const std::string feature_name = cur ? cur->spec.name : std::string{};

    if (key == "feature") {
      if (cur) finish(*cur, schema.features);
      if (rest.empty() || rest.find_first_of(" \t") != std::string_view::npos)
        fail(line_no, "", "'feature' takes a single identifier");
      std::string name(rest);
      if (!seen.insert(name).second) fail(line_no, name, "duplicate feature name");
      cur = PendingFeature{};
      cur->spec.name = name;
      cur->line = line_no;
      continue;
    }
    if (key == "id") {
      if (cur) fail(line_no, feature_name, "'id' must precede the first feature block");
      schema.id_column = std::string(rest);
      continue;
    }
    if (!cur) fail(line_no, "", "'" + std::string(key) + "' outside a feature block");

    if (key == "type") {
      auto t = parse_feature_type(rest);
      if (!t) fail(line_no, feature_name, "unknown type '" + std::string(rest) + "'");
      cur->spec.type = *t;
      cur->has_type = true;
    } else if (key == "threshold") {
      auto [num, unit] = text::split_first_word(rest);
      auto v = text::parse_double(num);
      if (!v) fail(line_no, feature_name, "threshold is not a number: '" + std::string(num) + "'");
      if (*v < 0 || !std::isfinite(*v)) fail(line_no, feature_name, "negative threshold");
      cur->raw_threshold = *v;
      cur->raw_unit = std::string(unit);
      cur->threshold_line = line_no;
    } else if (key == "columns") {
      cur->spec.columns.clear();
      for (auto c : text::split(rest, ',')) {
        c = text::trim(c);
        if (c.empty()) fail(line_no, feature_name, "empty column name");
        cur->spec.columns.emplace_back(c);
      }
    } else if (key == "radius") {
      auto v = text::parse_double(rest);
      if (!v || *v <= 0) fail(line_no, feature_name, "radius must be a positive number");
      cur->radius = *v;
    } else {
      fail(line_no, feature_name, "unknown key '" + std::string(key) + "'");
    }
  }
  if (cur) finish(*cur, schema.features);
  return schema;
}

std::string write_schema(const Schema& schema) {
  std::ostringstream out;
  if (schema.id_column) out << "id " << *schema.id_column << "\n\n";
  for (const auto& f : schema.features) {
    out << "feature " << f.name << "\n";
    out << "type " << to_string(f.type) << "\n";
    if (f.threshold) {
      out << "threshold " << text::format_double(*f.threshold);
      if (!f.unit.empty()) out << " " << f.unit;
      out << "\n";
    }
    if (f.type == FeatureType::location) out << "radius " << text::format_double(f.radius) << "\n";
    out << "columns ";
    for (std::size_t i = 0; i < f.columns.size(); ++i) out << (i ? "," : "") << f.columns[i];
    out << "\n\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Dates and times

Date make_date(int year, unsigned month, unsigned day) {
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
  return Date{sys_days{ymd}.time_since_epoch().count()};
}

std::optional<Date> parse_date(std::string_view s) {
  s = text::trim(s);
  // YYYY-MM-DD, optionally followed by a time part which is ignored.
  if (s.size() > 10 && (s[10] == 'T' || s[10] == ' ')) s = s.substr(0, 10);
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto y = text::parse_int(s.substr(0, 4));
  auto m = text::parse_int(s.substr(5, 2));
  auto d = text::parse_int(s.substr(8, 2));
  if (!y || !m || !d || *m < 1 || *m > 12 || *d < 1) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{static_cast<int>(*y)}, std::chrono::month{static_cast<unsigned>(*m)},
                           std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{sys_days{ymd}.time_since_epoch().count()};
}

std::optional<TimeOfDay> parse_time(std::string_view s) {
  s = text::trim(s);
  auto parts = text::split(s, ':');
  if (parts.size() < 2 || parts.size() > 3) return std::nullopt;
  auto h = text::parse_int(parts[0]);
  auto m = text::parse_int(parts[1]);
  if (!h || !m || *h < 0 || *h > 23 || *m < 0 || *m > 59) return std::nullopt;
  if (parts[0].size() > 2 || parts[1].size() != 2) return std::nullopt;
  if (parts.size() == 3) {
    auto sec = text::parse_double(parts[2]);
    if (!sec || *sec < 0 || *sec >= 61) return std::nullopt;
  }
  return TimeOfDay{static_cast<int>(*h), static_cast<int>(*m)};
}

std::string format_date(Date d) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{std::chrono::days{d.days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_time(TimeOfDay t) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d:%02d", t.hour, t.minute);
  return buf;
}

// ---------------------------------------------------------------------------
// Instance table

void InstanceTable::append(std::vector<Value> values, std::string external_id) {
  if (values.size() != schema_.features.size())
    throw InvariantError("row has " + std::to_string(values.size()) + " values, schema has " +
                         std::to_string(schema_.features.size()) + " features");
  instances_.push_back(Instance{instances_.size(), std::move(external_id), std::move(values)});
}

std::vector<Value> InstanceTable::column(std::size_t feature) const {
  std::vector<Value> out;
  out.reserve(instances_.size());
  for (const auto& inst : instances_) out.push_back(inst.values.at(feature));
  return out;
}

namespace {

enum class CellResult { ok, missing, reject };

CellResult parse_cell(const FeatureSpec& spec, const std::vector<std::string_view>& cells, Value& out) {
  out = Missing{};
  auto first = text::trim(cells[0]);
  switch (spec.type) {
    case FeatureType::nominal:
      if (first.empty()) return CellResult::missing;
      out = std::string(first);
      return CellResult::ok;
    case FeatureType::numeric: {
      auto v = text::parse_double(first);
      if (!v || !std::isfinite(*v)) return CellResult::missing;
      out = *v;
      return CellResult::ok;
    }
    case FeatureType::date: {
      if (first.empty()) return CellResult::missing;
      auto d = parse_date(first);
      if (!d) return CellResult::reject;
      out = *d;
      return CellResult::ok;
    }
    case FeatureType::time: {
      if (first.empty()) return CellResult::missing;
      auto t = parse_time(first);
      if (!t) return CellResult::reject;
      out = *t;
      return CellResult::ok;
    }
    case FeatureType::location: {
      std::string_view lat_s, lon_s;
      if (cells.size() == 2) {
        lat_s = text::trim(cells[0]);
        lon_s = text::trim(cells[1]);
      } else {
        auto parts = text::split(first, ',');
        if (parts.size() != 2) return CellResult::missing;
        lat_s = text::trim(parts[0]);
        lon_s = text::trim(parts[1]);
      }
      auto lat = text::parse_double(lat_s);
      auto lon = text::parse_double(lon_s);
      if (!lat || !lon || std::abs(*lat) > 90 || std::abs(*lon) > 180) return CellResult::missing;
      out = GeoPoint{*lat, *lon};
      return CellResult::ok;
    }
  }
  return CellResult::missing;
}

}  // namespace

InstanceTable load_dataset(std::string_view csv_text, const Schema& schema) {
  InstanceTable table(schema);
  auto records = csv::parse(csv_text);
  if (records.empty()) return table;

  const auto& header = records.front().fields;
  std::unordered_map<std::string, std::size_t> col_index;
  for (std::size_t i = 0; i < header.size(); ++i) col_index.emplace(std::string(text::trim(header[i])), i);
  auto lookup = [&](const std::string& col, const std::string& feature) {
    auto it = col_index.find(col);
    if (it == col_index.end())
      throw DataError("dataset is missing column '" + col + "' required by feature '" + feature + "'");
    return it->second;
  };

  std::vector<std::vector<std::size_t>> feature_cols;
  for (const auto& f : schema.features) {
    std::vector<std::size_t> cols;
    for (const auto& c : f.columns) cols.push_back(lookup(c, f.name));
    feature_cols.push_back(std::move(cols));
  }
  std::optional<std::size_t> id_col;
  if (schema.id_column) id_col = lookup(*schema.id_column, "id");

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      table.note_rejected(rec.line);
      continue;
    }
    std::vector<Value> values(schema.features.size());
    bool reject = false;
    for (std::size_t k = 0; k < schema.features.size() && !reject; ++k) {
      std::vector<std::string_view> cells;
      for (auto c : feature_cols[k]) cells.emplace_back(rec.fields[c]);
      reject = parse_cell(schema.features[k], cells, values[k]) == CellResult::reject;
    }
    if (reject) {
      table.note_rejected(rec.line);
      continue;
    }
    table.append(std::move(values), id_col ? rec.fields[*id_col] : std::string{});
  }
  return table;
}

LoadReport validate_instances(const InstanceTable& table) {
  LoadReport report;
  report.accepted = table.size();
  report.rejected = table.rejected_rows();
  report.rejected_lines = table.rejected_lines();
  report.input_rows = report.accepted + report.rejected;
  const auto& features = table.schema().features;
  for (const auto& f : features) report.missing[f.name] = 0;
  for (const auto& inst : table.instances())
    for (std::size_t k = 0; k < features.size(); ++k)
      if (is_missing(inst.values[k])) ++report.missing[features[k].name];
  return report;
}

std::string write_dataset(const InstanceTable& table) {
  const auto& schema = table.schema();
  std::vector<std::string> header;
  if (schema.id_column) header.push_back(*schema.id_column);
  for (const auto& f : schema.features)
    for (const auto& c : f.columns) header.push_back(c);

  std::string out = csv::join(header) + "\n";
  for (const auto& inst : table.instances()) {
    std::vector<std::string> row;
    if (schema.id_column) row.push_back(inst.external_id);
    for (std::size_t k = 0; k < schema.features.size(); ++k) {
      const auto& f = schema.features[k];
      const auto& v = inst.values[k];
      const std::size_t width = f.columns.size();
      if (is_missing(v)) {
        for (std::size_t i = 0; i < width; ++i) row.emplace_back();
        continue;
      }
      switch (f.type) {
        case FeatureType::nominal: row.push_back(std::get<std::string>(v)); break;
        case FeatureType::numeric: row.push_back(text::format_double(std::get<double>(v))); break;
        case FeatureType::date: row.push_back(format_date(std::get<Date>(v))); break;
        case FeatureType::time: row.push_back(format_time(std::get<TimeOfDay>(v))); break;
        case FeatureType::location: {
          const auto& p = std::get<GeoPoint>(v);
          if (width == 2) {
            row.push_back(text::format_double(p.lat));
            row.push_back(text::format_double(p.lon));
          } else {
            row.push_back(text::format_double(p.lat) + "," + text::format_double(p.lon));
          }
          break;
        }
      }
    }
    out += csv::join(row) + "\n";
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

}  // namespace mlnet
