#include "bimdrift/matching.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "bimdrift/errors.hpp"
#include "bimdrift/polygon.hpp"

namespace bimdrift {

namespace {
constexpr double kMaxCovarianceCondition = 1e12;
}

void MatchConfig::validate() const {
  if (!(tau > 0.0) || !(max_corner_gap > 0.0) || !(max_center_gap > 0.0) ||
      !(min_area_ratio > 0.0)) {
    throw ValidationError("match thresholds must be positive");
  }
}

double mahalanobis_distance(const Plane& observed, const Plane& wall) {
  const Mat4& cov = observed.covariance();
  Eigen::SelfAdjointEigenSolver<Mat4> eig(cov);
  const Vec4 lambda = eig.eigenvalues();
  if (eig.info() != Eigen::Success || !(lambda.minCoeff() > 0.0) ||
      lambda.maxCoeff() / lambda.minCoeff() > kMaxCovarianceCondition) {
    throw SingularCovariance("observation covariance is singular or ill-conditioned");
  }
  const Vec4 diff = observed.feature() - wall.feature();
  return diff.dot(cov.ldlt().solve(diff));
}

FilterResult geometric_filter(const Plane& observed, const WallSegment& wall,
                              const MatchConfig& config) {
  const Plane& w = wall.plane;
  FilterResult r;

  const Vec3 projected = observed.centroid() - w.signed_distance(observed.centroid()) * w.normal();
  r.center_gap = (projected - w.centroid()).norm();

  for (const auto& c : observed.corners()) {
    r.corner_gap = std::max(r.corner_gap, polygon::distance_to(c, w.corners(), w.normal()));
  }

  const double small = std::min(observed.area(), w.area());
  const double large = std::max(observed.area(), w.area());
  r.area_ratio = small / large;

  const bool area_ok = r.area_ratio >= config.min_area_ratio || observed.area() <= w.area();
  r.passed = r.center_gap <= config.max_center_gap &&
             r.corner_gap <= config.max_corner_gap && area_ok;
  return r;
}

MatchSet match_planes(std::span<const ObservedPlane> observed,
                      const BimModel& model, const MatchConfig& config,
                      std::int64_t keyframe_id) {
  config.validate();
  struct Scored {
    std::size_t obs;
    std::size_t wall;
    MatchCandidate candidate;
  };
  std::vector<Scored> scored;
  const auto& walls = model.walls();
  for (std::size_t i = 0; i < observed.size(); ++i) {
    for (std::size_t j = 0; j < walls.size(); ++j) {
      const double d = mahalanobis_distance(observed[i].plane, walls[j].plane);
      if (!(d < config.tau)) continue;
      const FilterResult f = geometric_filter(observed[i].plane, walls[j], config);
      if (!f.passed) continue;
      scored.push_back({i, j,
                        MatchCandidate{observed[i].id, walls[j].id, d,
                                       f.corner_gap, f.center_gap, f.area_ratio}});
    }
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    const auto& x = a.candidate;
    const auto& y = b.candidate;
    return std::tie(x.mahalanobis, x.center_gap, x.wall_id, x.observed_plane_id) <
           std::tie(y.mahalanobis, y.center_gap, y.wall_id, y.observed_plane_id);
  });

  MatchSet result;
  result.keyframe_id = keyframe_id;
  std::vector<bool> obs_used(observed.size(), false);
  std::vector<bool> wall_used(walls.size(), false);
  for (auto& s : scored) {
    if (obs_used[s.obs] || wall_used[s.wall]) continue;
    obs_used[s.obs] = true;
    wall_used[s.wall] = true;
    result.pairs.push_back({observed[s.obs], walls[s.wall], std::move(s.candidate)});
  }
  return result;
}

}  // namespace bimdrift
