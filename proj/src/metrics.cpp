#include "bimdrift/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bimdrift/errors.hpp"

namespace bimdrift {

using nlohmann::json;

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_number(const std::string& field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw ParseError("trailing characters in '" + field + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ParseError("invalid number '" + field + "'");
  }
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> read_optional(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::initial_manual: return "initial_manual";
    case Variant::global: return "global";
    case Variant::local: return "local";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  if (name == "initial_manual") return Variant::initial_manual;
  if (name == "global") return Variant::global;
  if (name == "local") return Variant::local;
  throw ValidationError("unknown variant '" + std::string(name) + "'");
}

MetricsSample evaluate_keyframe(const MatchSet& matches,
                                const RigidTransform& b_t_s, Variant variant) {
  MetricsSample sample;
  sample.keyframe_id = matches.keyframe_id;
  sample.variant = variant;
  sample.matched_count = static_cast<int>(matches.size());
  if (matches.empty()) return sample;
  double angular = 0.0;
  double distance = 0.0;
  for (const auto& pair : matches.pairs) {
    const Plane in_b = transform_plane(b_t_s, pair.observed.plane);
    angular += angular_deviation(in_b, pair.wall.plane);
    distance += distance_error(in_b, pair.wall.plane);
  }
  const double n = static_cast<double>(matches.size());
  sample.mean_angular_deviation = angular / n;
  sample.mean_distance_error = distance / n;
  return sample;
}

PooledMeans pool(const std::vector<MetricsSample>& series) {
  PooledMeans out;
  double angular = 0.0;
  double distance = 0.0;
  for (const auto& s : series) {
    if (!s.mean_angular_deviation || !s.mean_distance_error) continue;
    angular += *s.mean_angular_deviation;
    distance += *s.mean_distance_error;
    ++out.keyframes;
  }
  if (out.keyframes > 0) {
    out.angular = angular / out.keyframes;
    out.distance = distance / out.keyframes;
  }
  return out;
}

double reduction_pct(double baseline, double value) {
  if (baseline == 0.0) return 0.0;
  return 100.0 * (baseline - value) / baseline;
}

void finalize_report(ComparisonReport& report) {
  report.pooled.clear();
  report.reductions.clear();
  for (const auto& [variant, samples] : report.series) {
    report.pooled[variant] = pool(samples);
  }
  const auto base = report.pooled.find(ComparisonReport::kBaseline);
  if (base == report.pooled.end()) return;
  for (const auto& [variant, means] : report.pooled) {
    if (variant == ComparisonReport::kBaseline) continue;
    report.reductions[variant] = Reduction{
        reduction_pct(base->second.angular.value_or(0.0), means.angular.value_or(0.0)),
        reduction_pct(base->second.distance.value_or(0.0), means.distance.value_or(0.0)),
    };
  }
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsSample>& samples) {
  out << "keyframe_id,variant,matched_count,mean_angular_deg,mean_distance_m\n";
  for (const auto& s : samples) {
    out << s.keyframe_id << ',' << to_string(s.variant) << ',' << s.matched_count << ',';
    if (s.mean_angular_deviation) out << format_double(*s.mean_angular_deviation * kRadToDeg);
    out << ',';
    if (s.mean_distance_error) out << format_double(*s.mean_distance_error);
    out << '\n';
  }
}

std::vector<MetricsSample> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("metrics CSV is empty");
  if (line != "keyframe_id,variant,matched_count,mean_angular_deg,mean_distance_m") {
    throw ParseError("unexpected metrics CSV header");
  }
  std::vector<MetricsSample> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw ParseError("metrics CSV row needs 5 fields");
    MetricsSample s;
    s.keyframe_id = static_cast<std::int64_t>(parse_number(f[0]));
    s.variant = parse_variant(f[1]);
    s.matched_count = static_cast<int>(parse_number(f[2]));
    if (!f[3].empty()) s.mean_angular_deviation = parse_number(f[3]) / kRadToDeg;
    if (!f[4].empty()) s.mean_distance_error = parse_number(f[4]);
    out.push_back(s);
  }
  return out;
}

std::string report_to_json(const ComparisonReport& report) {
  json doc;
  doc["baseline"] = to_string(ComparisonReport::kBaseline);
  json variants = json::array();
  for (auto v : report.variants) variants.push_back(to_string(v));
  doc["variants"] = variants;

  json pooled = json::object();
  for (const auto& [v, p] : report.pooled) {
    pooled[std::string(to_string(v))] = {
        {"mean_angular_rad", optional_number(p.angular)},
        {"mean_distance_m", optional_number(p.distance)},
        {"keyframes", p.keyframes},
    };
  }
  doc["pooled"] = pooled;

  json reductions = json::object();
  for (const auto& [v, r] : report.reductions) {
    reductions[std::string(to_string(v))] = {
        {"reduction_angular_pct", r.angular_pct},
        {"reduction_distance_pct", r.distance_pct},
    };
  }
  doc["reductions"] = reductions;

  json series = json::object();
  for (const auto& [v, samples] : report.series) {
    json rows = json::array();
    for (const auto& s : samples) {
      rows.push_back({
          {"keyframe_id", s.keyframe_id},
          {"matched_count", s.matched_count},
          {"mean_angular_rad", optional_number(s.mean_angular_deviation)},
          {"mean_distance_m", optional_number(s.mean_distance_error)},
      });
    }
    series[std::string(to_string(v))] = rows;
  }
  doc["series"] = series;
  return doc.dump(2) + "\n";
}

ComparisonReport report_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  ComparisonReport report;
  try {
    for (const auto& v : doc.at("variants")) report.variants.push_back(parse_variant(v.get<std::string>()));
    for (const auto& [name, rows] : doc.at("series").items()) {
      const Variant v = parse_variant(name);
      auto& out = report.series[v];
      for (const auto& row : rows) {
        MetricsSample s;
        s.keyframe_id = row.at("keyframe_id").get<std::int64_t>();
        s.variant = v;
        s.matched_count = row.at("matched_count").get<int>();
        s.mean_angular_deviation = read_optional(row.at("mean_angular_rad"));
        s.mean_distance_error = read_optional(row.at("mean_distance_m"));
        out.push_back(s);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
  finalize_report(report);
  return report;
}

}  // namespace bimdrift
