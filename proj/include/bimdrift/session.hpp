#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bimdrift/bim.hpp"
#include "bimdrift/estimation.hpp"
#include "bimdrift/geometry.hpp"
#include "bimdrift/matching.hpp"
#include "bimdrift/metrics.hpp"

namespace bimdrift {

struct KeyframePlane {
  std::string plane_id;
  Plane plane;  // frame C
};

/// Camera frame convention: x forward, y left, z up.
struct KeyframeObservation {
  std::int64_t keyframe_id = 0;
  double timestamp = 0.0;
  RigidTransform camera_pose;  // S_T_C
  std::vector<KeyframePlane> planes;
  /// plane_id -> wall_id, normally present on the first keyframe only.
  std::map<std::string, std::string> known_wall_ids;

  /// Throws ValidationError on duplicate plane ids.
  void validate() const;
};

struct LocalSelectionConfig {
  double radius = 5.0;  // m, camera to plane centroid
  int min_planes = 3;
  int max_planes = 10;
  double radius_growth = 1.5;

  void validate() const;
};

struct PipelineConfig {
  MatchConfig match;
  EstimationConfig estimation;
  LocalSelectionConfig local;

  void validate() const;
};

struct KeyframeSummary {
  std::int64_t keyframe_id = 0;
  bool processed = false;  // passed the new-or-updated gate
  bool aligned = false;    // ran the manual alignment
  bool estimated = false;  // B_T_S re-estimated
  int selected_planes = 0;
  int matched_planes = 0;
  int rank = 0;
  int iterations = 0;
  double final_cost = 0.0;
  RigidTransform camera_pose;  // S_T_C as reported
  RigidTransform transform;    // B_T_S after this keyframe
};

struct SessionState {
  explicit SessionState(Variant v = Variant::local) : variant(v) {}

  RigidTransform current_transform;  // B_T_S
  /// Latest observation of every plane, frame S.
  std::map<std::string, Plane> plane_registry;
  Variant variant;
  std::vector<KeyframeSummary> history;
  std::optional<std::int64_t> last_keyframe_id;
  bool aligned = false;
};

/// True when the keyframe holds an unseen plane id or a registered plane
/// moved by more than 0.5 deg, 0.01 m in offset, or 5 % in area.
bool should_process(const KeyframeObservation& keyframe, const SessionState& state);

/// Registry planes used for re-estimation. global: all of them. local: the
/// planes in front of the camera within a radius grown until min_planes are
/// found (or every candidate is in), truncated to the max_planes nearest.
/// initial_manual: none.
std::vector<ObservedPlane> select_planes(const SessionState& state,
                                         const RigidTransform& camera_pose,
                                         const LocalSelectionConfig& config);

/// Advances the session by one keyframe and returns the metrics over the
/// keyframe's own matched planes under the updated B_T_S. B_T_S is only
/// re-estimated when the matched walls include two non-parallel normals.
/// Throws OutOfOrderKeyframe.
MetricsSample process_keyframe(const KeyframeObservation& keyframe,
                               SessionState& state, const BimModel& model,
                               const PipelineConfig& config);

struct SessionRun {
  SessionState state;
  std::vector<MetricsSample> samples;
};

SessionRun run_session(std::span<const KeyframeObservation> stream,
                       const BimModel& model, const PipelineConfig& config,
                       Variant variant);

}  // namespace bimdrift
