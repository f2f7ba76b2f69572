#include "bimdrift/session.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "bimdrift/errors.hpp"

namespace bimdrift {

namespace {

constexpr double kGateAngle = 0.5 * std::numbers::pi / 180.0;
constexpr double kGateOffset = 0.01;
constexpr double kGateAreaChange = 0.05;
// Sine of the smallest angle between two matched wall normals that allows a
// re-estimate.
constexpr double kMinNormalSpread = 0.25;

bool constrains_rotation(const MatchSet& matches) {
  for (std::size_t i = 0; i < matches.pairs.size(); ++i) {
    const Vec3& a = matches.pairs[i].wall.plane.normal();
    for (std::size_t j = i + 1; j < matches.pairs.size(); ++j) {
      if (a.cross(matches.pairs[j].wall.plane.normal()).norm() > kMinNormalSpread) return true;
    }
  }
  return false;
}

bool plane_changed(const Plane& now, const Plane& before) {
  if (angular_deviation(now, before) > kGateAngle) return true;
  // Compare offsets with matching normal signs.
  const double sign = now.normal().dot(before.normal()) >= 0.0 ? 1.0 : -1.0;
  if (std::abs(now.offset() - sign * before.offset()) > kGateOffset) return true;
  return std::abs(now.area() - before.area()) > kGateAreaChange * before.area();
}

// Swaps the B-frame planes of a match set back to their S-frame versions.
MatchSet to_frame_s(MatchSet matches, const std::map<std::string, Plane>& in_s) {
  for (auto& pair : matches.pairs) {
    pair.observed.plane = in_s.at(pair.observed.id);
  }
  return matches;
}

MatchSet match_in_b(const std::map<std::string, Plane>& in_s,
                    const RigidTransform& b_t_s, const BimModel& model,
                    const MatchConfig& config, std::int64_t keyframe_id) {
  std::vector<ObservedPlane> in_b;
  in_b.reserve(in_s.size());
  for (const auto& [id, plane] : in_s) in_b.push_back({id, transform_plane(b_t_s, plane)});
  return to_frame_s(match_planes(in_b, model, config, keyframe_id), in_s);
}

}  // namespace

void KeyframeObservation::validate() const {
  std::set<std::string> seen;
  for (const auto& p : planes) {
    if (!seen.insert(p.plane_id).second) {
      throw ValidationError("duplicate plane id '" + p.plane_id + "' in keyframe " +
                            std::to_string(keyframe_id));
    }
  }
}

void LocalSelectionConfig::validate() const {
  if (!(radius > 0.0)) throw ValidationError("local radius must be positive");
  if (min_planes < 0 || max_planes < 1 || min_planes > max_planes) {
    throw ValidationError("need 0 <= min_planes <= max_planes, max_planes >= 1");
  }
  if (!(radius_growth > 1.0)) throw ValidationError("radius_growth must exceed 1");
}

void PipelineConfig::validate() const {
  match.validate();
  estimation.validate();
  local.validate();
}

bool should_process(const KeyframeObservation& keyframe, const SessionState& state) {
  for (const auto& p : keyframe.planes) {
    const auto it = state.plane_registry.find(p.plane_id);
    if (it == state.plane_registry.end()) return true;
    if (plane_changed(transform_plane(keyframe.camera_pose, p.plane), it->second)) return true;
  }
  return false;
}

std::vector<ObservedPlane> select_planes(const SessionState& state,
                                         const RigidTransform& camera_pose,
                                         const LocalSelectionConfig& config) {
  std::vector<ObservedPlane> out;
  switch (state.variant) {
    case Variant::initial_manual:
      return out;
    case Variant::global:
      for (const auto& [id, plane] : state.plane_registry) out.push_back({id, plane});
      return out;
    case Variant::local:
      break;
  }

  const Vec3 position = camera_pose.translation();
  const Vec3 forward = camera_pose.rotate(Vec3::UnitX());
  struct Candidate {
    double distance;
    const std::string* id;
    const Plane* plane;
  };
  std::vector<Candidate> candidates;
  for (const auto& [id, plane] : state.plane_registry) {
    const Vec3 offset = plane.centroid() - position;
    if (offset.dot(forward) <= 0.0) continue;
    candidates.push_back({offset.norm(), &id, &plane});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.distance != b.distance ? a.distance < b.distance : *a.id < *b.id;
  });

  double radius = config.radius;
  std::size_t count = 0;
  while (true) {
    count = static_cast<std::size_t>(std::count_if(
        candidates.begin(), candidates.end(),
        [&](const Candidate& c) { return c.distance <= radius; }));
    if (count >= static_cast<std::size_t>(config.min_planes) || count == candidates.size()) break;
    radius *= config.radius_growth;
  }
  count = std::min(count, static_cast<std::size_t>(config.max_planes));
  for (std::size_t i = 0; i < count; ++i) out.push_back({*candidates[i].id, *candidates[i].plane});
  return out;
}

MetricsSample process_keyframe(const KeyframeObservation& keyframe,
                               SessionState& state, const BimModel& model,
                               const PipelineConfig& config) {
  if (state.last_keyframe_id && keyframe.keyframe_id <= *state.last_keyframe_id) {
    throw OutOfOrderKeyframe("keyframe " + std::to_string(keyframe.keyframe_id) +
                             " after " + std::to_string(*state.last_keyframe_id));
  }
  keyframe.validate();

  KeyframeSummary summary;
  summary.keyframe_id = keyframe.keyframe_id;
  summary.camera_pose = keyframe.camera_pose;
  summary.processed = should_process(keyframe, state);

  // C -> S through the reported camera pose.
  std::map<std::string, Plane> in_s;
  for (const auto& p : keyframe.planes) {
    in_s.emplace(p.plane_id, transform_plane(keyframe.camera_pose, p.plane));
  }
  for (const auto& [id, plane] : in_s) state.plane_registry.insert_or_assign(id, plane);

  if (!state.aligned && !keyframe.known_wall_ids.empty()) {
    std::vector<KnownCorrespondence> known;
    for (const auto& [plane_id, wall_id] : keyframe.known_wall_ids) {
      const auto it = in_s.find(plane_id);
      if (it == in_s.end()) {
        throw ValidationError("known_wall_ids names plane '" + plane_id +
                              "' absent from keyframe " + std::to_string(keyframe.keyframe_id));
      }
      known.push_back({it->second, wall_id});
    }
    state.current_transform = initial_alignment(known, model, config.estimation);
    state.aligned = true;
    summary.aligned = true;
  } else if (summary.processed && state.variant != Variant::initial_manual) {
    const auto selected = select_planes(state, keyframe.camera_pose, config.local);
    summary.selected_planes = static_cast<int>(selected.size());
    std::map<std::string, Plane> selected_s;
    for (const auto& s : selected) selected_s.emplace(s.id, s.plane);
    const MatchSet matches = match_in_b(selected_s, state.current_transform, model,
                                        config.match, keyframe.keyframe_id);
    summary.matched_planes = static_cast<int>(matches.size());
    if (constrains_rotation(matches)) {
      const EstimationResult result =
          estimate_transform(matches, state.current_transform, config.estimation);
      state.current_transform = result.transform;
      summary.estimated = true;
      summary.rank = result.rank;
      summary.iterations = result.iterations;
      summary.final_cost = result.final_cost;
    }
  }

  const MatchSet evaluated = match_in_b(in_s, state.current_transform, model,
                                        config.match, keyframe.keyframe_id);
  summary.transform = state.current_transform;
  state.history.push_back(summary);
  state.last_keyframe_id = keyframe.keyframe_id;
  return evaluate_keyframe(evaluated, state.current_transform, state.variant);
}

SessionRun run_session(std::span<const KeyframeObservation> stream,
                       const BimModel& model, const PipelineConfig& config,
                       Variant variant) {
  config.validate();
  SessionRun run{SessionState(variant), {}};
  run.samples.reserve(stream.size());
  for (const auto& kf : stream) {
    run.samples.push_back(process_keyframe(kf, run.state, model, config));
  }
  return run;
}

}  // namespace bimdrift
