#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bimdrift/bim.hpp"
#include "bimdrift/geometry.hpp"
#include "bimdrift/session.hpp"

namespace bimdrift {

struct SceneSpec {
  int rooms_x = 1;
  int rooms_y = 1;
  double room_size = 4.0;    // m
  double wall_height = 3.0;  // m
  std::uint64_t seed = 0;    // only perturbs the waypoint loop

  /// Throws ValidationError for empty grids or non-positive sizes.
  void validate() const;
};

/// Axis-aligned grid of rooms. Every grid line is one wall spanning all the
/// rooms along it ("wx{i}" at constant x, "wy{j}" at constant y), so
/// split_walls has shared walls to cut. The B origin sits at the center of
/// room (0, 0), which keeps every wall off the origin.
BimModel generate_scene(const SceneSpec& spec);

/// Two laps around the floor, 1 m inside the outer walls at mid height,
/// with seeded jitter of up to 0.2 m per waypoint.
std::vector<Vec3> generate_waypoints(const SceneSpec& spec);

struct DriftModel {
  double rot_rate = 0.0;    // rad per keyframe, yaw random-walk std
  double trans_rate = 0.0;  // m per keyframe, random-walk std
  double bias_rot = 0.0;    // rad per keyframe about camera z
  Vec3 bias_trans = Vec3::Zero();  // m per keyframe, camera frame
  std::uint64_t seed = 0;

  bool is_zero() const;
  void validate() const;
};

struct NoiseModel {
  double sigma_normal = 0.0;    // per normal component
  double sigma_offset = 0.0;    // m, along the normal
  double sigma_centroid = 0.0;  // m, in-plane shift
  double detection_prob = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SimulationConfig {
  double keyframe_spacing = 0.2;  // m of travel between keyframes
  std::size_t max_keyframes = 0;  // 0: walk the full path
  double max_range = 6.0;         // m
  double half_angle_deg = 70.0;
  double near_clip = 0.1;        // m
  double min_patch_area = 0.1;   // m^2

  void validate() const;
};

struct GroundTruth {
  std::vector<RigidTransform> true_poses;  // B_T_C
  std::vector<RigidTransform> true_b_t_s;  // per keyframe
  std::map<std::pair<std::int64_t, std::string>, std::string> correspondences;
};

struct Simulation {
  std::vector<KeyframeObservation> keyframes;
  GroundTruth truth;
};

/// Walks the waypoint polyline, corrupts the reported S-frame poses with
/// drift (P_k = P_{k-1} * delta_k * N_k, P_{-1} * delta_0 = true pose 0) and
/// emits frustum-clipped, noisy wall patches in the camera frame.
/// Throws WaypointOutsideScene.
Simulation simulate(const BimModel& model, std::span<const Vec3> waypoints,
                    const DriftModel& drift, const NoiseModel& noise,
                    const SimulationConfig& config = {});

}  // namespace bimdrift
