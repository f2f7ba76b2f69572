#include "bimdrift/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bimdrift/errors.hpp"
#include "bimdrift/polygon.hpp"

namespace bimdrift::io {

using nlohmann::json;

namespace {

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 to_vec(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError("expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json pose(const RigidTransform& t) {
  const Quat& q = t.rotation();
  return {{"translation", vec(t.translation())},
          {"rotation", json::array({q.x(), q.y(), q.z(), q.w()})}};
}

RigidTransform to_pose(const json& j) {
  const auto& r = j.at("rotation");
  if (!r.is_array() || r.size() != 4) throw ParseError("rotation must be [qx, qy, qz, qw]");
  const Quat q(r[3].get<double>(), r[0].get<double>(), r[1].get<double>(), r[2].get<double>());
  if (!q.coeffs().allFinite() || std::abs(q.norm() - 1.0) > 1e-6) {
    throw ValidationError("rotation quaternion is not unit length");
  }
  return {q, to_vec(j.at("translation"))};
}

template <typename Fn>
auto parse_with(std::string_view text, Fn&& fn) {
  try {
    return fn(json::parse(text));
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

// what() without the leading "ErrorName: ".
std::string bare_message(const Error& e) {
  const std::string what = e.what();
  const auto colon = what.find(": ");
  return colon == std::string::npos ? what : what.substr(colon + 2);
}

}  // namespace

std::string keyframe_to_json_line(const KeyframeObservation& keyframe) {
  json planes = json::array();
  for (const auto& p : keyframe.planes) {
    json corners = json::array();
    for (const auto& c : p.plane.corners()) corners.push_back(vec(c));
    planes.push_back({
        {"plane_id", p.plane_id},
        {"normal", vec(p.plane.normal())},
        {"offset", p.plane.offset()},
        {"centroid", vec(p.plane.centroid())},
        {"corners", corners},
    });
    if (p.plane.covariance() != default_plane_covariance()) {
      json cov = json::array();
      for (int i = 0; i < 16; ++i) cov.push_back(p.plane.covariance()(i / 4, i % 4));
      planes.back()["covariance"] = cov;
    }
  }
  json doc = {
      {"keyframe_id", keyframe.keyframe_id},
      {"timestamp", keyframe.timestamp},
      {"camera_pose", pose(keyframe.camera_pose)},
      {"planes", planes},
  };
  if (!keyframe.known_wall_ids.empty()) doc["known_wall_ids"] = keyframe.known_wall_ids;
  return doc.dump();
}

KeyframeObservation keyframe_from_json_line(std::string_view line) {
  return parse_with(line, [](const json& doc) {
    KeyframeObservation kf;
    kf.keyframe_id = doc.at("keyframe_id").get<std::int64_t>();
    kf.timestamp = doc.value("timestamp", 0.0);
    kf.camera_pose = to_pose(doc.at("camera_pose"));
    for (const auto& p : doc.at("planes")) {
      std::vector<Vec3> corners;
      for (const auto& c : p.at("corners")) corners.push_back(to_vec(c));
      std::optional<Mat4> covariance;
      if (p.contains("covariance") && !p["covariance"].is_null()) {
        const auto& c = p["covariance"];
        if (!c.is_array() || c.size() != 16) throw ParseError("covariance needs 16 values");
        Mat4 m;
        for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = c[i].get<double>();
        covariance = m;
      }
      const Vec3 centroid = to_vec(p.at("centroid"));
      if ((centroid - polygon::mean(corners)).norm() > kCoplanarTolerance) {
        throw ValidationError("plane centroid is not the mean of its corners");
      }
      kf.planes.push_back({p.at("plane_id").get<std::string>(),
                           Plane::from_parts(to_vec(p.at("normal")), p.at("offset").get<double>(),
                                             std::move(corners), covariance)});
    }
    if (doc.contains("known_wall_ids")) {
      kf.known_wall_ids = doc["known_wall_ids"].get<std::map<std::string, std::string>>();
    }
    kf.validate();
    return kf;
  });
}

void write_observation_log(std::ostream& out, const std::vector<KeyframeObservation>& stream) {
  for (const auto& kf : stream) out << keyframe_to_json_line(kf) << '\n';
}

std::vector<KeyframeObservation> read_observation_log(std::istream& in) {
  std::vector<KeyframeObservation> out;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(keyframe_from_json_line(line));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(number) + ": " + bare_message(e));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(number) + ": " + bare_message(e));
    }
  }
  return out;
}

std::vector<KeyframeObservation> load_observation_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open observation log '" + path.string() + "'");
  return read_observation_log(in);
}

std::string ground_truth_to_json(const GroundTruth& truth) {
  json poses = json::array();
  for (const auto& p : truth.true_poses) poses.push_back(pose(p));
  json frames = json::array();
  for (const auto& t : truth.true_b_t_s) frames.push_back(pose(t));
  json corr = json::array();
  for (const auto& [key, wall] : truth.correspondences) {
    corr.push_back({{"keyframe_id", key.first}, {"plane_id", key.second}, {"wall_id", wall}});
  }
  return json{{"true_poses", poses}, {"true_B_T_S", frames}, {"correspondences", corr}}.dump(2) + "\n";
}

GroundTruth ground_truth_from_json(std::string_view text) {
  return parse_with(text, [](const json& doc) {
    GroundTruth truth;
    for (const auto& p : doc.at("true_poses")) truth.true_poses.push_back(to_pose(p));
    for (const auto& t : doc.at("true_B_T_S")) truth.true_b_t_s.push_back(to_pose(t));
    for (const auto& c : doc.at("correspondences")) {
      truth.correspondences[{c.at("keyframe_id").get<std::int64_t>(),
                             c.at("plane_id").get<std::string>()}] = c.at("wall_id").get<std::string>();
    }
    if (truth.true_poses.size() != truth.true_b_t_s.size()) {
      throw ValidationError("ground truth pose lists differ in length");
    }
    return truth;
  });
}

std::string waypoints_to_json(const std::vector<Vec3>& waypoints) {
  json list = json::array();
  for (const auto& w : waypoints) list.push_back(vec(w));
  return json{{"units", "meters"}, {"waypoints", list}}.dump(2) + "\n";
}

std::vector<Vec3> waypoints_from_json(std::string_view text) {
  return parse_with(text, [](const json& doc) {
    std::vector<Vec3> out;
    for (const auto& w : doc.at("waypoints")) out.push_back(to_vec(w));
    return out;
  });
}

std::string transform_to_json(const RigidTransform& transform) {
  return pose(transform).dump(2) + "\n";
}

RigidTransform transform_from_json(std::string_view text) {
  return parse_with(text, [](const json& doc) { return to_pose(doc); });
}

std::string session_to_json(const SessionState& state) {
  json history = json::array();
  for (const auto& h : state.history) {
    history.push_back({
        {"keyframe_id", h.keyframe_id},
        {"processed", h.processed},
        {"aligned", h.aligned},
        {"estimated", h.estimated},
        {"selected_planes", h.selected_planes},
        {"matched_planes", h.matched_planes},
        {"rank", h.rank},
        {"iterations", h.iterations},
        {"final_cost", h.final_cost},
        {"camera_pose", pose(h.camera_pose)},
        {"B_T_S", pose(h.transform)},
    });
  }
  return json{{"variant", to_string(state.variant)},
              {"B_T_S", pose(state.current_transform)},
              {"history", history}}
             .dump(2) +
         "\n";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace bimdrift::io
