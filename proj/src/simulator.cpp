#include "bimdrift/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "bimdrift/errors.hpp"
#include "bimdrift/polygon.hpp"

namespace bimdrift {

namespace {

constexpr double kWaypointInset = 1.0;
constexpr double kWaypointJitter = 0.2;
constexpr int kLaps = 2;
constexpr double kTimePerKeyframe = 0.1;  // s

std::string room_id(int col, int row) {
  return "r" + std::to_string(col) + "_" + std::to_string(row);
}

struct Bounds {
  Vec3 lo;
  Vec3 hi;
};

Bounds scene_bounds(const BimModel& model) {
  Bounds b{Vec3::Constant(std::numeric_limits<double>::infinity()),
           Vec3::Constant(-std::numeric_limits<double>::infinity())};
  for (const auto& w : model.walls()) {
    for (const auto& c : w.plane.corners()) {
      b.lo = b.lo.cwiseMin(c);
      b.hi = b.hi.cwiseMax(c);
    }
  }
  return b;
}

bool same_plane(const Plane& a, const Plane& b) {
  return std::abs(a.normal().dot(b.normal())) > 1.0 - 1e-12 &&
         std::abs(std::abs(a.offset()) - std::abs(b.offset())) < 1e-9;
}

// Frustum half-spaces in the camera frame (x forward, y left, z up), as
// (n, d) with n . x >= d kept.
std::vector<std::pair<Vec3, double>> frustum(const SimulationConfig& config) {
  const double t = std::tan(config.half_angle_deg * std::numbers::pi / 180.0);
  return {
      {Vec3(1, 0, 0), config.near_clip},
      {Vec3(-1, 0, 0), -config.max_range},
      {Vec3(t, -1, 0), 0.0},
      {Vec3(t, 1, 0), 0.0},
      {Vec3(t, 0, -1), 0.0},
      {Vec3(t, 0, 1), 0.0},
  };
}

// Rigid perturbation of a patch about its centroid, in its own frame.
std::vector<Vec3> perturb_patch(const std::vector<Vec3>& corners, const Vec3& normal,
                                const NoiseModel& noise, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Vec3 g = polygon::mean(corners);
  const Vec3 eps(gauss(rng), gauss(rng), gauss(rng));
  const Vec3 noisy_normal = (normal + noise.sigma_normal * eps).normalized();
  const Quat tilt = Quat::FromTwoVectors(normal, noisy_normal);
  const double shift = noise.sigma_offset * gauss(rng);

  Vec3 u = noisy_normal.unitOrthogonal();
  Vec3 v = noisy_normal.cross(u);
  const double a = noise.sigma_centroid * gauss(rng);
  const double b = noise.sigma_centroid * gauss(rng);
  const Vec3 move = shift * noisy_normal + a * u + b * v;

  std::vector<Vec3> out;
  out.reserve(corners.size());
  for (const auto& c : corners) out.push_back(g + tilt * (c - g) + move);
  return out;
}

}  // namespace

void SceneSpec::validate() const {
  if (rooms_x < 1 || rooms_y < 1) throw ValidationError("room grid must be at least 1x1");
  if (!(room_size > 0.0) || !(wall_height > 0.0)) {
    throw ValidationError("room_size and wall_height must be positive");
  }
}

BimModel generate_scene(const SceneSpec& spec) {
  spec.validate();
  const double s = spec.room_size;
  const double h = spec.wall_height;
  const double x0 = -0.5 * s;
  const double y0 = -0.5 * s;
  const double x1 = x0 + spec.rooms_x * s;
  const double y1 = y0 + spec.rooms_y * s;

  std::vector<WallSegment> walls;
  for (int i = 0; i <= spec.rooms_x; ++i) {
    const double x = x0 + i * s;
    WallSegment w{.id = "wx" + std::to_string(i),
                  .plane = Plane::from_corners({{x, y0, 0}, {x, y1, 0}, {x, y1, h}, {x, y0, h}})};
    for (int col : {i - 1, i}) {
      if (col < 0 || col >= spec.rooms_x) continue;
      for (int row = 0; row < spec.rooms_y; ++row) w.room_ids.push_back(room_id(col, row));
    }
    walls.push_back(std::move(w));
  }
  for (int j = 0; j <= spec.rooms_y; ++j) {
    const double y = y0 + j * s;
    WallSegment w{.id = "wy" + std::to_string(j),
                  .plane = Plane::from_corners({{x0, y, 0}, {x1, y, 0}, {x1, y, h}, {x0, y, h}})};
    for (int row : {j - 1, j}) {
      if (row < 0 || row >= spec.rooms_y) continue;
      for (int col = 0; col < spec.rooms_x; ++col) w.room_ids.push_back(room_id(col, row));
    }
    walls.push_back(std::move(w));
  }
  return BimModel(std::move(walls));
}

std::vector<Vec3> generate_waypoints(const SceneSpec& spec) {
  spec.validate();
  const double s = spec.room_size;
  const double inset = std::min(kWaypointInset, 0.25 * s);
  const double jitter = std::min(kWaypointJitter, 0.5 * inset);
  const double x0 = -0.5 * s + inset;
  const double y0 = -0.5 * s + inset;
  const double x1 = -0.5 * s + spec.rooms_x * s - inset;
  const double y1 = -0.5 * s + spec.rooms_y * s - inset;
  const double z = 0.5 * spec.wall_height;

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> offset(-jitter, jitter);
  const std::vector<Vec3> loop{{x0, y0, z}, {x1, y0, z}, {x1, y1, z}, {x0, y1, z}};
  std::vector<Vec3> out;
  for (int lap = 0; lap < kLaps; ++lap) {
    for (const auto& p : loop) {
      const double dx = offset(rng);
      const double dy = offset(rng);
      out.push_back(p + Vec3(dx, dy, 0.0));
    }
  }
  out.push_back(out.front());
  return out;
}

bool DriftModel::is_zero() const {
  return rot_rate == 0.0 && trans_rate == 0.0 && bias_rot == 0.0 && bias_trans.isZero(0.0);
}

void DriftModel::validate() const {
  if (!(rot_rate >= 0.0) || !(trans_rate >= 0.0)) {
    throw ValidationError("drift rates must be non-negative");
  }
  if (!std::isfinite(bias_rot) || !bias_trans.allFinite()) {
    throw ValidationError("drift bias must be finite");
  }
}

void NoiseModel::validate() const {
  if (!(sigma_normal >= 0.0) || !(sigma_offset >= 0.0) || !(sigma_centroid >= 0.0)) {
    throw ValidationError("noise sigmas must be non-negative");
  }
  if (!(detection_prob >= 0.0 && detection_prob <= 1.0)) {
    throw ValidationError("detection_prob must lie in [0, 1]");
  }
}

void SimulationConfig::validate() const {
  if (!(keyframe_spacing > 0.0)) throw ValidationError("keyframe_spacing must be positive");
  if (!(max_range > near_clip) || !(near_clip > 0.0)) {
    throw ValidationError("need 0 < near_clip < max_range");
  }
  if (!(half_angle_deg > 0.0 && half_angle_deg < 90.0)) {
    throw ValidationError("half_angle_deg must lie in (0, 90)");
  }
}

Simulation simulate(const BimModel& model, std::span<const Vec3> waypoints,
                    const DriftModel& drift, const NoiseModel& noise,
                    const SimulationConfig& config) {
  drift.validate();
  noise.validate();
  config.validate();
  if (waypoints.size() < 2) throw ValidationError("need at least two waypoints");
  const Bounds bounds = scene_bounds(model);
  for (const auto& w : waypoints) {
    if (!w.allFinite() || (w.array() < bounds.lo.array()).any() ||
        (w.array() > bounds.hi.array()).any()) {
      throw WaypointOutsideScene("waypoint (" + std::to_string(w.x()) + ", " +
                                 std::to_string(w.y()) + ", " + std::to_string(w.z()) +
                                 ") lies outside the floorplan");
    }
  }

  // True poses at constant arc-length spacing, facing the travel direction.
  std::vector<RigidTransform> true_poses;
  double next = 0.0;  // arc position of the next keyframe within the segment
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    const Vec3 seg = waypoints[i + 1] - waypoints[i];
    const double len = seg.norm();
    if (len == 0.0) continue;
    const double yaw = std::atan2(seg.y(), seg.x());
    for (; next < len; next += config.keyframe_spacing) {
      true_poses.push_back(RigidTransform::rot_z(yaw, waypoints[i] + seg * (next / len)));
    }
    next -= len;
  }
  if (config.max_keyframes > 0 && true_poses.size() > config.max_keyframes) {
    true_poses.resize(config.max_keyframes);
  }

  std::mt19937_64 drift_rng(drift.seed);
  std::mt19937_64 noise_rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution detected(noise.detection_prob);
  const auto clip_planes = frustum(config);

  Simulation sim;
  RigidTransform reported;
  for (std::size_t k = 0; k < true_poses.size(); ++k) {
    const RigidTransform& truth = true_poses[k];
    if (drift.is_zero()) {
      reported = truth;
    } else {
      const Vec3 omega(0.0, 0.0, drift.rot_rate * gauss(drift_rng) + drift.bias_rot);
      const Vec3 v(drift.trans_rate * gauss(drift_rng) + drift.bias_trans.x(),
                   drift.trans_rate * gauss(drift_rng) + drift.bias_trans.y(),
                   drift.trans_rate * gauss(drift_rng) + drift.bias_trans.z());
      const RigidTransform step = k == 0 ? truth : reported * (true_poses[k - 1].inverse() * truth);
      reported = step * RigidTransform::from_rotation_vector(omega, v);
    }

    KeyframeObservation kf;
    kf.keyframe_id = static_cast<std::int64_t>(k);
    kf.timestamp = kTimePerKeyframe * static_cast<double>(k);
    kf.camera_pose = reported;

    const RigidTransform c_t_b = truth.inverse();
    for (std::size_t w = 0; w < model.walls().size(); ++w) {
      const WallSegment& wall = model.walls()[w];
      std::vector<Vec3> patch;
      for (const auto& c : wall.plane.corners()) patch.push_back(c_t_b.apply(c));
      for (const auto& [n, d] : clip_planes) patch = polygon::clip(patch, n, d);
      const Vec3 normal_c = c_t_b.rotate(wall.plane.normal());
      if (patch.size() < 3 || polygon::area(patch, normal_c) < config.min_patch_area) continue;

      const Vec3 target = truth.apply(polygon::mean(patch));
      const bool occluded = std::any_of(
          model.walls().begin(), model.walls().end(), [&](const WallSegment& other) {
            return other.id != wall.id && !same_plane(other.plane, wall.plane) &&
                   polygon::segment_crosses(truth.translation(), target, other.plane.corners(),
                                            other.plane.normal(), other.plane.offset());
          });
      if (occluded) continue;
      if (!detected(noise_rng)) continue;

      const std::string plane_id = "pl" + std::to_string(w);
      kf.planes.push_back({plane_id, Plane::from_corners(perturb_patch(patch, normal_c, noise, noise_rng))});
      if (k == 0) kf.known_wall_ids[plane_id] = wall.id;
      sim.truth.correspondences[{kf.keyframe_id, plane_id}] = wall.id;
    }

    sim.truth.true_poses.push_back(truth);
    sim.truth.true_b_t_s.push_back(truth * reported.inverse());
    sim.keyframes.push_back(std::move(kf));
  }
  return sim;
}

}  // namespace bimdrift
