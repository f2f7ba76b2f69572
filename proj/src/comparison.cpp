#include "bimdrift/comparison.hpp"

#include <algorithm>

#include "bimdrift/errors.hpp"

namespace bimdrift {

ComparisonReport compare_variants(std::span<const KeyframeObservation> stream,
                                  const BimModel& model,
                                  const PipelineConfig& config,
                                  std::span<const Variant> variants) {
  if (variants.size() < 2) throw ValidationError("compare needs at least two variants");
  if (std::find(variants.begin(), variants.end(), ComparisonReport::kBaseline) == variants.end()) {
    throw ValidationError("compare needs the initial_manual baseline");
  }
  ComparisonReport report;
  for (const Variant v : variants) {
    if (report.series.contains(v)) throw ValidationError("variant listed twice");
    report.variants.push_back(v);
    report.series[v] = run_session(stream, model, config, v).samples;
  }
  finalize_report(report);
  return report;
}

}  // namespace bimdrift
