#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "bimdrift/metrics.hpp"
#include "bimdrift/session.hpp"

namespace bimdrift {

/// Everything needed to reproduce a replay. Serialized as flat JSON with
/// one explicit key per setting.
struct RunConfig {
  PipelineConfig pipeline;
  Variant variant = Variant::local;
  std::string floorplan;
  std::string log;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
};

std::string run_config_to_json(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys raise ValidationError so
/// typos do not silently fall back to defaults.
RunConfig run_config_from_json(std::string_view text);

}  // namespace bimdrift
