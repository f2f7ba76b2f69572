#pragma once

#include <random>
#include <string>
#include <vector>

#include "bimdrift/bim.hpp"
#include "bimdrift/estimation.hpp"
#include "bimdrift/matching.hpp"
#include "bimdrift/simulator.hpp"

namespace bimdrift::testing {

inline WallSegment make_wall(const std::string& id, std::vector<Vec3> corners) {
  return WallSegment{.id = id, .plane = Plane::from_corners(std::move(corners))};
}

/// The four walls of a 4 x 4 x 3 m room centered on the origin in x and y.
inline BimModel four_wall_room() {
  return generate_scene(SceneSpec{.rooms_x = 1, .rooms_y = 1});
}

/// four_wall_room plus a floor, which gives three independent normals.
inline BimModel room_with_floor() {
  auto walls = four_wall_room().walls();
  walls.push_back(make_wall("floor", {{-2, -2, 0}, {2, -2, 0}, {2, 2, 0}, {-2, 2, 0}}));
  return BimModel(std::move(walls));
}

/// Pairs every wall with itself seen from frame S, where B_T_S = b_t_s.
inline MatchSet exact_matches(const BimModel& model, const RigidTransform& b_t_s) {
  MatchSet set;
  const RigidTransform s_t_b = b_t_s.inverse();
  for (const auto& w : model.walls()) {
    set.pairs.push_back({ObservedPlane{w.id, transform_plane(s_t_b, w.plane)}, w, {}});
  }
  return set;
}

/// Rigid tilt about the centroid followed by a shift along the new normal.
inline Plane perturb(const Plane& plane, double sigma_normal, double sigma_offset,
                     std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Vec3 eps(gauss(rng), gauss(rng), gauss(rng));
  const Vec3 n = (plane.normal() + sigma_normal * eps).normalized();
  const Quat tilt = Quat::FromTwoVectors(plane.normal(), n);
  const Vec3 shift = sigma_offset * gauss(rng) * n;
  std::vector<Vec3> corners;
  for (const auto& c : plane.corners()) {
    corners.push_back(plane.centroid() + tilt * (c - plane.centroid()) + shift);
  }
  return Plane::from_corners(std::move(corners));
}

struct DriftFixture {
  BimModel model;
  Simulation sim;
};

/// 2 x 2 rooms of 4 m, 150 keyframes, yaw random walk rot_rate, translation
/// random walk trans_rate, all noise sigmas 0.02, seed 7. The drift rates are
/// multiplied by `severity`.
inline DriftFixture standard_drift_fixture(double severity = 1.0, std::uint64_t seed = 7) {
  const SceneSpec spec{.rooms_x = 2, .rooms_y = 2, .room_size = 4.0, .seed = seed};
  BimModel model = split_walls(generate_scene(spec));
  const auto waypoints = generate_waypoints(spec);
  const DriftModel drift{.rot_rate = 0.002 * severity, .trans_rate = 0.005 * severity, .seed = seed};
  const NoiseModel noise{.sigma_normal = 0.02,
                         .sigma_offset = 0.02,
                         .sigma_centroid = 0.02,
                         .detection_prob = 1.0,
                         .seed = seed + 1};
  SimulationConfig config;
  config.max_keyframes = 150;
  Simulation sim = simulate(model, waypoints, drift, noise, config);
  return {std::move(model), std::move(sim)};
}

}  // namespace bimdrift::testing
