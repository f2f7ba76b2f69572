#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bimdrift/geometry.hpp"

namespace bimdrift {

/// One "as-planned" wall face in the BIM frame.
struct WallSegment {
  std::string id;
  Plane plane;
  std::optional<std::string> parent_id{};
  std::vector<std::string> room_ids{};
};

/// Validated set of wall segments, all expressed in frame B (meters).
class BimModel {
 public:
  static constexpr std::string_view kFrame = "B";

  /// Throws ValidationError on an empty list or duplicate ids.
  explicit BimModel(std::vector<WallSegment> walls);

  const std::vector<WallSegment>& walls() const { return walls_; }
  std::size_t size() const { return walls_.size(); }

  /// nullptr when absent.
  const WallSegment* find(const std::string& id) const;

  double total_area() const;

 private:
  std::vector<WallSegment> walls_;
  std::map<std::string, std::size_t> index_;
};

/// Floorplan JSON:
///   { "units": "meters",
///     "walls": [ { "id": str, "corners": [[x,y,z] x 4], "rooms": [str] } ] }
/// Unknown fields are ignored. Throws ParseError / ValidationError.
BimModel parse_floorplan(std::string_view text);
BimModel load_bim(const std::filesystem::path& path);
std::string dump_floorplan(const BimModel& model);

/// Replaces every wall whose interior is crossed by a touching,
/// roughly perpendicular wall with sub-segments "{parent}#k", ordered along
/// the cut axis. Contacts on the polygon boundary (L-corners) do not split.
BimModel split_walls(const BimModel& model);

/// Frame attached to a wall: origin at the centroid, z along the canonical
/// normal, x along world-up projected into the plane (world-x for
/// near-horizontal planes), y completing a right-handed frame.
RigidTransform bim_plane_pose(const WallSegment& wall);

}  // namespace bimdrift
