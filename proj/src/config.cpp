#include "bimdrift/config.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "bimdrift/errors.hpp"

namespace bimdrift {

using nlohmann::json;

namespace {

std::string_view mode_name(PointResidualMode mode) {
  return mode == PointResidualMode::point_to_plane ? "point_to_plane" : "point_to_point";
}

PointResidualMode parse_mode(const std::string& name) {
  if (name == "point_to_plane") return PointResidualMode::point_to_plane;
  if (name == "point_to_point") return PointResidualMode::point_to_point;
  throw ValidationError("unknown point_residual_mode '" + name + "'");
}

}  // namespace

std::string run_config_to_json(const RunConfig& config) {
  const auto& m = config.pipeline.match;
  const auto& e = config.pipeline.estimation;
  const auto& l = config.pipeline.local;
  json doc = {
      {"tau", m.tau},
      {"max_corner_gap", m.max_corner_gap},
      {"max_center_gap", m.max_center_gap},
      {"min_area_ratio", m.min_area_ratio},
      {"max_iterations", e.max_iterations},
      {"convergence_tol", e.convergence_tol},
      {"normal_weight", e.normal_weight},
      {"svd_truncation", e.svd_truncation},
      {"point_residual_mode", mode_name(e.point_residual_mode)},
      {"local_radius", l.radius},
      {"local_min_planes", l.min_planes},
      {"local_max_planes", l.max_planes},
      {"local_radius_growth", l.radius_growth},
      {"variant", to_string(config.variant)},
      {"floorplan", config.floorplan},
      {"log", config.log},
      {"output_dir", config.output_dir},
      {"seed", config.seed},
  };
  return doc.dump(2) + "\n";
}

RunConfig run_config_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
  if (!doc.is_object()) throw ParseError("config must be a JSON object");

  static const std::set<std::string> known = {
      "tau", "max_corner_gap", "max_center_gap", "min_area_ratio", "max_iterations",
      "convergence_tol", "normal_weight", "svd_truncation", "point_residual_mode",
      "local_radius", "local_min_planes", "local_max_planes", "local_radius_growth",
      "variant", "floorplan", "log", "output_dir", "seed"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw ValidationError("unknown config key '" + key + "'");
  }

  RunConfig config;
  auto& m = config.pipeline.match;
  auto& e = config.pipeline.estimation;
  auto& l = config.pipeline.local;
  try {
    m.tau = doc.value("tau", m.tau);
    m.max_corner_gap = doc.value("max_corner_gap", m.max_corner_gap);
    m.max_center_gap = doc.value("max_center_gap", m.max_center_gap);
    m.min_area_ratio = doc.value("min_area_ratio", m.min_area_ratio);
    e.max_iterations = doc.value("max_iterations", e.max_iterations);
    e.convergence_tol = doc.value("convergence_tol", e.convergence_tol);
    e.normal_weight = doc.value("normal_weight", e.normal_weight);
    e.svd_truncation = doc.value("svd_truncation", e.svd_truncation);
    if (doc.contains("point_residual_mode")) {
      e.point_residual_mode = parse_mode(doc["point_residual_mode"].get<std::string>());
    }
    l.radius = doc.value("local_radius", l.radius);
    l.min_planes = doc.value("local_min_planes", l.min_planes);
    l.max_planes = doc.value("local_max_planes", l.max_planes);
    l.radius_growth = doc.value("local_radius_growth", l.radius_growth);
    if (doc.contains("variant")) config.variant = parse_variant(doc["variant"].get<std::string>());
    config.floorplan = doc.value("floorplan", config.floorplan);
    config.log = doc.value("log", config.log);
    config.output_dir = doc.value("output_dir", config.output_dir);
    config.seed = doc.value("seed", config.seed);
  } catch (const json::exception& ex) {
    throw ParseError(ex.what());
  }
  config.pipeline.validate();
  return config;
}

}  // namespace bimdrift
