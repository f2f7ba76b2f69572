#include "bimdrift/bim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bimdrift/errors.hpp"
#include "bimdrift/polygon.hpp"

namespace bimdrift {

using nlohmann::json;

namespace {

// Walls whose normals are closer than this (|cos|) never split each other.
constexpr double kMaxCutCosine = 0.5;
constexpr double kAreaTolerance = 1e-6;
constexpr double kContactTolerance = 1e-6;

Vec3 parse_point(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw ParseError("point must be an array of 3 numbers");
  }
  Vec3 p;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw ParseError("point coordinate is not a number");
    p[i] = j[i].get<double>();
  }
  return p;
}

// Length of the part of segment [a, b] inside the convex loop (both lying in
// the loop's plane), with a small tolerance on every edge.
double overlap_length(const Vec3& a, const Vec3& b,
                      const std::vector<Vec3>& loop, const Vec3& normal) {
  double lo = 0.0;
  double hi = 1.0;
  const Vec3 g = polygon::mean(loop);
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec3& p = loop[i];
    const Vec3 edge = loop[(i + 1) % loop.size()] - p;
    Vec3 inward = normal.cross(edge);
    if (inward.norm() == 0.0) continue;
    inward.normalize();
    if (inward.dot(g - p) < 0.0) inward = -inward;
    const double fa = inward.dot(a - p) + kContactTolerance;
    const double fb = inward.dot(b - p) + kContactTolerance;
    if (fa < 0.0 && fb < 0.0) return 0.0;
    if (fa < 0.0) lo = std::max(lo, fa / (fa - fb));
    if (fb < 0.0) hi = std::min(hi, fa / (fa - fb));
  }
  return hi > lo ? (hi - lo) * (b - a).norm() : 0.0;
}

// Chord cut from `loop` by the plane {x : n.x = d}, when it crosses the
// interior.
std::optional<std::pair<Vec3, Vec3>> interior_chord(
    const std::vector<Vec3>& loop, const Vec3& wall_normal, const Vec3& n,
    double d) {
  const auto pos = polygon::clip(loop, n, d);
  const auto neg = polygon::clip(loop, -n, -d);
  if (polygon::area(pos, wall_normal) <= kAreaTolerance ||
      polygon::area(neg, wall_normal) <= kAreaTolerance) {
    return std::nullopt;
  }
  std::vector<Vec3> hits;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec3& a = loop[i];
    const Vec3& b = loop[(i + 1) % loop.size()];
    const double da = n.dot(a) - d;
    const double db = n.dot(b) - d;
    if (da == 0.0) hits.push_back(a);
    if ((da > 0.0 && db < 0.0) || (da < 0.0 && db > 0.0)) {
      hits.push_back(a + da / (da - db) * (b - a));
    }
  }
  if (hits.size() < 2) return std::nullopt;
  // Extreme pair along the line direction.
  const Vec3 dir = wall_normal.cross(n);
  auto [lo, hi] = std::minmax_element(
      hits.begin(), hits.end(),
      [&](const Vec3& x, const Vec3& y) { return dir.dot(x) < dir.dot(y); });
  return std::make_pair(*lo, *hi);
}

Vec3 lexicographic_positive(Vec3 v) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v[i]) > 1e-12) return v[i] > 0.0 ? v : Vec3(-v);
  }
  return v;
}

}  // namespace

BimModel::BimModel(std::vector<WallSegment> walls) : walls_(std::move(walls)) {
  if (walls_.empty()) throw ValidationError("BIM model has no walls");
  for (std::size_t i = 0; i < walls_.size(); ++i) {
    if (walls_[i].id.empty()) throw ValidationError("wall id is empty");
    if (!index_.emplace(walls_[i].id, i).second) {
      throw ValidationError("duplicate wall id '" + walls_[i].id + "'");
    }
  }
}

const WallSegment* BimModel::find(const std::string& id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? nullptr : &walls_[it->second];
}

double BimModel::total_area() const {
  double sum = 0.0;
  for (const auto& w : walls_) sum += w.plane.area();
  return sum;
}

BimModel parse_floorplan(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  if (!doc.is_object()) throw ParseError("floorplan must be a JSON object");
  if (doc.contains("units") && doc["units"] != "meters") {
    throw ValidationError("unsupported units (expected \"meters\")");
  }
  if (!doc.contains("walls") || !doc["walls"].is_array()) {
    throw ParseError("floorplan needs a \"walls\" array");
  }
  std::vector<WallSegment> walls;
  for (const auto& w : doc["walls"]) {
    if (!w.is_object() || !w.contains("id") || !w["id"].is_string()) {
      throw ParseError("wall entry needs a string \"id\"");
    }
    const std::string id = w["id"].get<std::string>();
    if (!w.contains("corners") || !w["corners"].is_array()) {
      throw ParseError("wall '" + id + "' needs a \"corners\" array");
    }
    if (w["corners"].size() != 4) {
      throw ValidationError("wall '" + id + "' must have exactly 4 corners");
    }
    std::vector<Vec3> corners;
    for (const auto& c : w["corners"]) corners.push_back(parse_point(c));
    std::optional<Plane> plane;
    try {
      plane = Plane::from_corners(std::move(corners));
    } catch (const CollinearInput& e) {
      throw ValidationError("wall '" + id + "' is degenerate: " + e.what());
    } catch (const NonCoplanarInput& e) {
      throw ValidationError("wall '" + id + "': " + e.what());
    }
    WallSegment seg{.id = id, .plane = std::move(*plane)};
    if (w.contains("rooms")) {
      if (!w["rooms"].is_array()) throw ParseError("\"rooms\" must be an array");
      for (const auto& r : w["rooms"]) {
        if (!r.is_string()) throw ParseError("room id must be a string");
        seg.room_ids.push_back(r.get<std::string>());
      }
    }
    if (w.contains("parent_id") && w["parent_id"].is_string()) {
      seg.parent_id = w["parent_id"].get<std::string>();
    }
    walls.push_back(std::move(seg));
  }
  return BimModel(std::move(walls));
}

BimModel load_bim(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open floorplan '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_floorplan(buffer.str());
}

std::string dump_floorplan(const BimModel& model) {
  json walls = json::array();
  for (const auto& w : model.walls()) {
    json corners = json::array();
    for (const auto& c : w.plane.corners()) corners.push_back({c.x(), c.y(), c.z()});
    json entry = {{"id", w.id}, {"corners", corners}, {"rooms", w.room_ids}};
    if (w.parent_id) entry["parent_id"] = *w.parent_id;
    walls.push_back(std::move(entry));
  }
  return json{{"units", "meters"}, {"walls", walls}}.dump(2) + "\n";
}

BimModel split_walls(const BimModel& model) {
  const auto& walls = model.walls();
  std::vector<WallSegment> out;
  out.reserve(walls.size());

  for (std::size_t i = 0; i < walls.size(); ++i) {
    const WallSegment& wall = walls[i];
    const Vec3& wn = wall.plane.normal();

    std::vector<std::pair<Vec3, double>> cuts;
    for (std::size_t j = 0; j < walls.size(); ++j) {
      if (j == i) continue;
      const Plane& other = walls[j].plane;
      if (std::abs(wn.dot(other.normal())) > kMaxCutCosine) continue;
      const auto chord = interior_chord(wall.plane.corners(), wn,
                                        other.normal(), other.offset());
      if (!chord) continue;
      // The cutting wall must actually reach the chord, not just its plane.
      if (overlap_length(chord->first, chord->second, other.corners(),
                         other.normal()) <= kContactTolerance) {
        continue;
      }
      cuts.emplace_back(other.normal(), other.offset());
    }
    if (cuts.empty()) {
      out.push_back(wall);
      continue;
    }

    std::vector<std::vector<Vec3>> pieces{wall.plane.corners()};
    for (const auto& [n, d] : cuts) {
      std::vector<std::vector<Vec3>> next;
      for (const auto& piece : pieces) {
        auto pos = polygon::clip(piece, n, d);
        auto neg = polygon::clip(piece, -n, -d);
        const bool pos_ok = polygon::area(pos, wn) > kAreaTolerance;
        const bool neg_ok = polygon::area(neg, wn) > kAreaTolerance;
        if (pos_ok && neg_ok) {
          next.push_back(std::move(neg));
          next.push_back(std::move(pos));
        } else {
          next.push_back(piece);
        }
      }
      pieces = std::move(next);
    }

    // Order along the axis perpendicular to the first cut line.
    const Vec3 line = lexicographic_positive(wn.cross(cuts.front().first).normalized());
    const Vec3 axis = lexicographic_positive(wn.cross(line).normalized());
    std::vector<std::pair<Vec3, std::vector<Vec3>>> keyed;
    for (auto& piece : pieces) keyed.emplace_back(polygon::mean(piece), std::move(piece));
    std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
      const double da = axis.dot(a.first);
      const double db = axis.dot(b.first);
      if (std::abs(da - db) > 1e-9) return da < db;
      return line.dot(a.first) < line.dot(b.first);
    });

    const std::string parent = wall.parent_id.value_or(wall.id);
    for (std::size_t k = 0; k < keyed.size(); ++k) {
      // Sub-segments keep the parent's exact plane parameters so that
      // collinear siblings compare equal in feature space.
      out.push_back(WallSegment{
          .id = wall.id + "#" + std::to_string(k),
          .plane = Plane::from_parts(wn, wall.plane.offset(),
                                     std::move(keyed[k].second),
                                     wall.plane.covariance()),
          .parent_id = parent,
          .room_ids = wall.room_ids,
      });
    }
  }
  return BimModel(std::move(out));
}

RigidTransform bim_plane_pose(const WallSegment& wall) {
  const Vec3& z = wall.plane.normal();
  const Vec3 up = Vec3::UnitZ();
  Vec3 x;
  if (std::abs(z.dot(up)) > 1.0 - 1e-6) {
    x = Vec3::UnitX() - z.dot(Vec3::UnitX()) * z;
  } else {
    x = up - z.dot(up) * z;
  }
  x.normalize();
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return RigidTransform::from_matrix(r, wall.plane.centroid());
}

}  // namespace bimdrift
