#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "bimdrift/session.hpp"
#include "bimdrift/simulator.hpp"

// File formats shared by the CLI, the Python module and the tests. All
// writers are deterministic: object keys are sorted and doubles use
// round-trip precision.
namespace bimdrift::io {

/// One KeyframeObservation per line:
///   {"keyframe_id", "timestamp",
///    "camera_pose": {"translation": [x,y,z], "rotation": [qx,qy,qz,qw]},
///    "planes": [{"plane_id", "normal", "offset", "centroid", "corners",
///                "covariance" (optional, 16 values row-major)}],
///    "known_wall_ids": {plane_id: wall_id} (optional)}
std::string keyframe_to_json_line(const KeyframeObservation& keyframe);
KeyframeObservation keyframe_from_json_line(std::string_view line);

void write_observation_log(std::ostream& out, const std::vector<KeyframeObservation>& stream);
/// Throws ParseError (with the 1-based line number) or ValidationError.
std::vector<KeyframeObservation> read_observation_log(std::istream& in);
std::vector<KeyframeObservation> load_observation_log(const std::filesystem::path& path);

std::string ground_truth_to_json(const GroundTruth& truth);
GroundTruth ground_truth_from_json(std::string_view text);

/// {"units": "meters", "waypoints": [[x,y,z], ...]}
std::string waypoints_to_json(const std::vector<Vec3>& waypoints);
std::vector<Vec3> waypoints_from_json(std::string_view text);

/// {"rotation": [qx,qy,qz,qw], "translation": [x,y,z]}
std::string transform_to_json(const RigidTransform& transform);
RigidTransform transform_from_json(std::string_view text);

/// Final B_T_S of a session plus its per-keyframe history.
std::string session_to_json(const SessionState& state);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace bimdrift::io
