#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bimdrift/geometry.hpp"
#include "bimdrift/matching.hpp"

namespace bimdrift {

enum class Variant { initial_manual, global, local };

std::string_view to_string(Variant variant);
/// Throws ValidationError for unknown names.
Variant parse_variant(std::string_view name);

struct MetricsSample {
  std::int64_t keyframe_id = 0;
  Variant variant = Variant::initial_manual;
  std::optional<double> mean_angular_deviation;  // rad
  std::optional<double> mean_distance_error;     // m
  int matched_count = 0;
};

/// Lifts every observed plane (frame S) of `matches` into B with b_t_s and
/// averages angular deviation and distance error against its wall.
MetricsSample evaluate_keyframe(const MatchSet& matches,
                                const RigidTransform& b_t_s,
                                Variant variant = Variant::initial_manual);

struct PooledMeans {
  std::optional<double> angular;   // rad
  std::optional<double> distance;  // m
  int keyframes = 0;
};

/// Mean of the per-keyframe means over keyframes that have samples.
PooledMeans pool(const std::vector<MetricsSample>& series);

/// 100 * (baseline - value) / baseline, 0 when the baseline is 0.
double reduction_pct(double baseline, double value);

struct Reduction {
  double angular_pct = 0.0;
  double distance_pct = 0.0;
};

struct ComparisonReport {
  static constexpr Variant kBaseline = Variant::initial_manual;

  std::vector<Variant> variants;
  std::map<Variant, std::vector<MetricsSample>> series;
  std::map<Variant, PooledMeans> pooled;
  /// Every non-baseline variant against initial_manual.
  std::map<Variant, Reduction> reductions;
};

/// Fills `pooled` and `reductions` from `series`.
void finalize_report(ComparisonReport& report);

/// Columns: keyframe_id, variant, matched_count, mean_angular_deg,
/// mean_distance_m. Missing means are written as empty fields.
void write_metrics_csv(std::ostream& out, const std::vector<MetricsSample>& samples);
std::vector<MetricsSample> read_metrics_csv(std::istream& in);

std::string report_to_json(const ComparisonReport& report);
ComparisonReport report_from_json(std::string_view text);

}  // namespace bimdrift
