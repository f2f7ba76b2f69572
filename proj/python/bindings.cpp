#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "bimdrift/bim.hpp"
#include "bimdrift/comparison.hpp"
#include "bimdrift/config.hpp"
#include "bimdrift/errors.hpp"
#include "bimdrift/estimation.hpp"
#include "bimdrift/io.hpp"
#include "bimdrift/matching.hpp"
#include "bimdrift/metrics.hpp"
#include "bimdrift/session.hpp"
#include "bimdrift/simulator.hpp"

namespace py = pybind11;
using namespace bimdrift;

namespace {

// Quaternions cross the boundary as [x, y, z, w].
Vec4 quat_xyzw(const RigidTransform& t) {
  const Quat& q = t.rotation();
  return {q.x(), q.y(), q.z(), q.w()};
}

RigidTransform from_xyzw(const Vec4& q, const Vec3& translation) {
  return {Quat(q[3], q[0], q[1], q[2]), translation};
}

PipelineConfig pipeline_from(const std::string& config_json) {
  return run_config_from_json(config_json).pipeline;
}

py::dict sample_dict(const MetricsSample& s) {
  py::dict d;
  d["keyframe_id"] = s.keyframe_id;
  d["variant"] = std::string(to_string(s.variant));
  d["matched_count"] = s.matched_count;
  d["mean_angular_rad"] = s.mean_angular_deviation;
  d["mean_distance_m"] = s.mean_distance_error;
  return d;
}

template <typename E>
void register_error(py::module_& m, const char* name, py::handle base) {
  py::register_exception<E>(m, name, base);
}

}  // namespace

PYBIND11_MODULE(_bimdrift, m) {
  m.doc() = "BIM-aware drift correction for plane-based SLAM";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  register_error<CollinearInput>(m, "CollinearInput", error);
  register_error<NonCoplanarInput>(m, "NonCoplanarInput", error);
  register_error<ParseError>(m, "ParseError", error);
  register_error<ValidationError>(m, "ValidationError", error);
  register_error<SingularCovariance>(m, "SingularCovariance", error);
  register_error<EmptyMatchSet>(m, "EmptyMatchSet", error);
  register_error<NonFiniteCost>(m, "NonFiniteCost", error);
  register_error<UnknownWallId>(m, "UnknownWallId", error);
  register_error<OutOfOrderKeyframe>(m, "OutOfOrderKeyframe", error);
  register_error<WaypointOutsideScene>(m, "WaypointOutsideScene", error);

  py::class_<RigidTransform>(m, "RigidTransform")
      .def(py::init<>())
      .def(py::init(&from_xyzw), py::arg("quaternion_xyzw"), py::arg("translation"))
      .def_static("identity", &RigidTransform::identity)
      .def_static("from_rotation_vector", &RigidTransform::from_rotation_vector, py::arg("omega"),
                  py::arg("translation") = Vec3(Vec3::Zero()))
      .def_static("from_matrix", &RigidTransform::from_matrix, py::arg("rotation"), py::arg("translation"))
      .def_static("rot_z", &RigidTransform::rot_z, py::arg("angle"), py::arg("translation") = Vec3(Vec3::Zero()))
      .def_property_readonly("translation", &RigidTransform::translation)
      .def_property_readonly("quaternion", &quat_xyzw)
      .def_property_readonly("rotation_matrix", &RigidTransform::rotation_matrix)
      .def("rotation_vector", &RigidTransform::rotation_vector)
      .def("apply", &RigidTransform::apply)
      .def("inverse", &RigidTransform::inverse)
      .def("__mul__", [](const RigidTransform& a, const RigidTransform& b) { return a * b; })
      .def("__repr__", [](const RigidTransform& t) {
        return "RigidTransform(t=[" + std::to_string(t.translation().x()) + ", " +
               std::to_string(t.translation().y()) + ", " + std::to_string(t.translation().z()) + "])";
      });
  m.def("rotation_distance", &rotation_distance);
  m.def("translation_distance", &translation_distance);

  py::class_<Plane>(m, "Plane")
      .def_static("from_corners", &Plane::from_corners, py::arg("corners"), py::arg("covariance") = py::none())
      .def_property_readonly("normal", &Plane::normal)
      .def_property_readonly("offset", &Plane::offset)
      .def_property_readonly("centroid", &Plane::centroid)
      .def_property_readonly("corners", &Plane::corners)
      .def_property_readonly("area", &Plane::area)
      .def_property_readonly("covariance", &Plane::covariance)
      .def("signed_distance", &Plane::signed_distance);
  m.def("transform_plane", &transform_plane, py::arg("transform"), py::arg("plane"));
  m.def("angular_deviation", &angular_deviation);
  m.def("distance_error", &distance_error);
  m.def("mahalanobis_distance", &mahalanobis_distance, py::arg("observed"), py::arg("wall"));

  py::class_<WallSegment>(m, "WallSegment")
      .def_readonly("id", &WallSegment::id)
      .def_readonly("plane", &WallSegment::plane)
      .def_readonly("parent_id", &WallSegment::parent_id)
      .def_readonly("room_ids", &WallSegment::room_ids);

  py::class_<BimModel>(m, "BimModel")
      .def_property_readonly("walls", &BimModel::walls)
      .def("find", [](const BimModel& b, const std::string& id) -> std::optional<WallSegment> {
        const WallSegment* w = b.find(id);
        if (w == nullptr) return std::nullopt;
        return *w;
      })
      .def("__len__", &BimModel::size)
      .def_property_readonly("total_area", &BimModel::total_area);
  m.def("parse_floorplan", &parse_floorplan);
  m.def("load_bim", &load_bim);
  m.def("dump_floorplan", &dump_floorplan);
  m.def("split_walls", &split_walls);
  m.def(
      "generate_scene",
      [](int rooms_x, int rooms_y, double room_size, double wall_height) {
        return generate_scene(SceneSpec{rooms_x, rooms_y, room_size, wall_height, 0});
      },
      py::arg("rooms_x") = 1, py::arg("rooms_y") = 1, py::arg("room_size") = 4.0, py::arg("wall_height") = 3.0);
  m.def(
      "generate_waypoints",
      [](int rooms_x, int rooms_y, double room_size, double wall_height, std::uint64_t seed) {
        return generate_waypoints(SceneSpec{rooms_x, rooms_y, room_size, wall_height, seed});
      },
      py::arg("rooms_x") = 1, py::arg("rooms_y") = 1, py::arg("room_size") = 4.0, py::arg("wall_height") = 3.0,
      py::arg("seed") = 0);

  m.def(
      "match_planes",
      [](const std::vector<std::pair<std::string, Plane>>& observed, const BimModel& model, double tau) {
        std::vector<ObservedPlane> obs;
        for (const auto& [id, plane] : observed) obs.push_back({id, plane});
        MatchConfig cfg;
        cfg.tau = tau;
        std::vector<std::tuple<std::string, std::string, double>> out;
        for (const auto& p : match_planes(obs, model, cfg).pairs) {
          out.emplace_back(p.observed.id, p.wall.id, p.candidate.mahalanobis);
        }
        return out;
      },
      py::arg("observed"), py::arg("model"), py::arg("tau") = MatchConfig{}.tau,
      "Greedy one-to-one matches as (observed_id, wall_id, mahalanobis).");

  m.def(
      "estimate_transform",
      [](const std::vector<std::pair<Plane, std::string>>& pairs, const BimModel& model,
         const RigidTransform& initial, const std::string& mode) {
        MatchSet set;
        for (const auto& [plane, wall_id] : pairs) {
          const WallSegment* w = model.find(wall_id);
          if (w == nullptr) throw UnknownWallId("no wall '" + wall_id + "'");
          set.pairs.push_back({ObservedPlane{wall_id, plane}, *w, {}});
        }
        EstimationConfig cfg;
        if (mode == "point_to_point") {
          cfg.point_residual_mode = PointResidualMode::point_to_point;
        } else if (mode != "point_to_plane") {
          throw ValidationError("unknown point residual mode '" + mode + "'");
        }
        const EstimationResult r = estimate_transform(set, initial, cfg);
        py::dict d;
        d["transform"] = r.transform;
        d["final_cost"] = r.final_cost;
        d["iterations"] = r.iterations;
        d["rank"] = r.rank;
        d["degenerate_directions"] = r.degenerate_directions;
        return d;
      },
      py::arg("pairs"), py::arg("model"), py::arg("initial") = RigidTransform::identity(),
      py::arg("mode") = "point_to_plane", "Fit B_T_S to (observed plane in S, wall id) pairs.");

  py::class_<KeyframeObservation>(m, "KeyframeObservation")
      .def_readonly("keyframe_id", &KeyframeObservation::keyframe_id)
      .def_readonly("timestamp", &KeyframeObservation::timestamp)
      .def_readonly("camera_pose", &KeyframeObservation::camera_pose)
      .def_property_readonly("planes",
                             [](const KeyframeObservation& k) {
                               std::vector<std::pair<std::string, Plane>> out;
                               for (const auto& p : k.planes) out.emplace_back(p.plane_id, p.plane);
                               return out;
                             })
      .def_readonly("known_wall_ids", &KeyframeObservation::known_wall_ids)
      .def("to_json", &io::keyframe_to_json_line);

  py::class_<Simulation>(m, "Simulation")
      .def_readonly("keyframes", &Simulation::keyframes)
      .def_property_readonly("true_poses", [](const Simulation& s) { return s.truth.true_poses; })
      .def_property_readonly("true_B_T_S", [](const Simulation& s) { return s.truth.true_b_t_s; })
      .def("ground_truth_json", [](const Simulation& s) { return io::ground_truth_to_json(s.truth); });

  m.def(
      "simulate",
      [](const BimModel& model, const std::vector<Vec3>& waypoints, double rot_rate, double trans_rate,
         double sigma_normal, double sigma_offset, double sigma_centroid, double detection_prob,
         double keyframe_spacing, std::size_t max_keyframes, std::uint64_t seed) {
        const DriftModel drift{.rot_rate = rot_rate, .trans_rate = trans_rate, .seed = seed};
        const NoiseModel noise{.sigma_normal = sigma_normal,
                               .sigma_offset = sigma_offset,
                               .sigma_centroid = sigma_centroid,
                               .detection_prob = detection_prob,
                               .seed = seed + 1};
        SimulationConfig cfg;
        cfg.keyframe_spacing = keyframe_spacing;
        cfg.max_keyframes = max_keyframes;
        return simulate(model, waypoints, drift, noise, cfg);
      },
      py::arg("model"), py::arg("waypoints"), py::arg("rot_rate") = 0.002, py::arg("trans_rate") = 0.005,
      py::arg("sigma_normal") = 0.02, py::arg("sigma_offset") = 0.02, py::arg("sigma_centroid") = 0.02,
      py::arg("detection_prob") = 1.0, py::arg("keyframe_spacing") = 0.2, py::arg("max_keyframes") = 0,
      py::arg("seed") = 7);

  m.def("read_observation_log", &io::load_observation_log);
  m.def("default_config_json", [] { return run_config_to_json(RunConfig{}); });

  m.def(
      "run_session",
      [](const std::vector<KeyframeObservation>& keyframes, const BimModel& model, const std::string& variant,
         const std::string& config_json) {
        const SessionRun run = run_session(keyframes, model, pipeline_from(config_json), parse_variant(variant));
        py::list samples;
        for (const auto& s : run.samples) samples.append(sample_dict(s));
        return py::make_tuple(run.state.current_transform, samples);
      },
      py::arg("keyframes"), py::arg("model"), py::arg("variant") = "local", py::arg("config_json") = "{}",
      "Replays the stream; returns (final B_T_S, per-keyframe metrics).");

  m.def(
      "compare_variants_json",
      [](const std::vector<KeyframeObservation>& keyframes, const BimModel& model,
         const std::vector<std::string>& variants, const std::string& config_json) {
        std::vector<Variant> vs;
        for (const auto& v : variants) vs.push_back(parse_variant(v));
        return report_to_json(compare_variants(keyframes, model, pipeline_from(config_json), vs));
      },
      py::arg("keyframes"), py::arg("model"),
      py::arg("variants") = std::vector<std::string>{"initial_manual", "global", "local"},
      py::arg("config_json") = "{}");
}
