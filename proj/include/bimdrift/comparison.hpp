#pragma once

#include <span>

#include "bimdrift/bim.hpp"
#include "bimdrift/metrics.hpp"
#include "bimdrift/session.hpp"

namespace bimdrift {

/// Replays the same stream once per variant and reports every variant's
/// pooled reductions against initial_manual. Throws ValidationError when
/// initial_manual is missing or fewer than two variants are given.
ComparisonReport compare_variants(std::span<const KeyframeObservation> stream,
                                  const BimModel& model,
                                  const PipelineConfig& config,
                                  std::span<const Variant> variants);

}  // namespace bimdrift
