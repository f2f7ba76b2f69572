#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bimdrift/bim.hpp"
#include "bimdrift/geometry.hpp"

namespace bimdrift {

struct ObservedPlane {
  std::string id;
  Plane plane;
};

/// Diagnostics of one (observed plane, wall) association.
struct MatchCandidate {
  std::string observed_plane_id;
  std::string wall_id;
  double mahalanobis = 0.0;
  double corner_gap = 0.0;  // m
  double center_gap = 0.0;  // m
  double area_ratio = 1.0;  // min/max area, in (0, 1]
};

struct MatchPair {
  ObservedPlane observed;
  WallSegment wall;
  MatchCandidate candidate;
};

/// One-to-one set of accepted associations for a keyframe.
struct MatchSet {
  std::vector<MatchPair> pairs;
  std::int64_t keyframe_id = 0;

  bool empty() const { return pairs.empty(); }
  std::size_t size() const { return pairs.size(); }
};

struct MatchConfig {
  /// Chi-square 95th percentile with 4 degrees of freedom.
  double tau = 9.488;
  double max_corner_gap = 0.5;
  double max_center_gap = 3.0;
  double min_area_ratio = 0.5;

  /// Throws ValidationError unless every threshold is positive.
  void validate() const;
};

/// (f_s - f_b)^T S^-1 (f_s - f_b) over f = [n_x, n_y, n_z, offset], with
/// S the observation covariance (the wall is treated as exact).
/// Throws SingularCovariance when cond(S) exceeds 1e12.
double mahalanobis_distance(const Plane& observed, const Plane& wall);

struct FilterResult {
  bool passed = false;
  double corner_gap = 0.0;
  double center_gap = 0.0;
  double area_ratio = 0.0;
};

/// Corner proximity, center alignment and area consistency of an observed
/// plane (frame B) against a wall. An observation smaller than the wall
/// passes the area test regardless of ratio, since cameras routinely see
/// only part of a wall.
FilterResult geometric_filter(const Plane& observed, const WallSegment& wall,
                              const MatchConfig& config);

/// Gated, greedy one-to-one association of observed planes (already in B)
/// with BIM walls. Pairs are taken by ascending Mahalanobis distance; ties go
/// to the smaller center gap, then the lexicographically smaller wall id.
MatchSet match_planes(std::span<const ObservedPlane> observed,
                      const BimModel& model, const MatchConfig& config,
                      std::int64_t keyframe_id = 0);

}  // namespace bimdrift
