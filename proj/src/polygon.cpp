#include "bimdrift/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bimdrift::polygon {

std::vector<Vec3> clip(const std::vector<Vec3>& loop, const Vec3& normal,
                       double offset) {
  std::vector<Vec3> out;
  const std::size_t n = loop.size();
  if (n == 0) return out;
  out.reserve(n + 2);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& a = loop[i];
    const Vec3& b = loop[(i + 1) % n];
    const double da = normal.dot(a) - offset;
    const double db = normal.dot(b) - offset;
    if (da >= 0.0) out.push_back(a);
    if ((da >= 0.0) != (db >= 0.0)) {
      const double s = da / (da - db);
      out.push_back(a + s * (b - a));
    }
  }
  // Drop consecutive duplicates created by vertices lying on the boundary.
  std::vector<Vec3> dedup;
  dedup.reserve(out.size());
  for (const auto& p : out) {
    if (dedup.empty() || (p - dedup.back()).norm() > 1e-12) dedup.push_back(p);
  }
  while (dedup.size() > 1 && (dedup.front() - dedup.back()).norm() <= 1e-12) {
    dedup.pop_back();
  }
  return dedup;
}

Vec3 mean(const std::vector<Vec3>& loop) {
  Vec3 sum = Vec3::Zero();
  for (const auto& p : loop) sum += p;
  return loop.empty() ? sum : Vec3(sum / static_cast<double>(loop.size()));
}

double area(const std::vector<Vec3>& loop, const Vec3& normal) {
  if (loop.size() < 3) return 0.0;
  const Vec3 g = mean(loop);
  double twice = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    twice += normal.dot((loop[i] - g).cross(loop[(i + 1) % loop.size()] - g));
  }
  return 0.5 * std::abs(twice);
}

namespace {

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + s * ab)).norm();
}

// Orientation sign of the loop relative to `normal` (+1 counter-clockwise).
double winding(const std::vector<Vec3>& loop, const Vec3& normal) {
  const Vec3 g = mean(loop);
  double twice = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    twice += normal.dot((loop[i] - g).cross(loop[(i + 1) % loop.size()] - g));
  }
  return twice >= 0.0 ? 1.0 : -1.0;
}

// Signed in-plane distance of q inside each edge; min over edges is > 0
// exactly when q is strictly inside the convex loop.
double inside_margin(const Vec3& q, const std::vector<Vec3>& loop,
                     const Vec3& normal) {
  const double w = winding(loop, normal);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec3& a = loop[i];
    const Vec3& b = loop[(i + 1) % loop.size()];
    const Vec3 edge = b - a;
    const double len = edge.norm();
    if (len == 0.0) continue;
    const Vec3 inward = w * normal.cross(edge) / len;
    margin = std::min(margin, inward.dot(q - a));
  }
  return margin;
}

}  // namespace

double distance_to(const Vec3& point, const std::vector<Vec3>& loop,
                   const Vec3& normal) {
  if (loop.empty()) return std::numeric_limits<double>::infinity();
  const Vec3 g = mean(loop);
  const Vec3 q = point - normal.dot(point - g) * normal;
  if (loop.size() >= 3 && inside_margin(q, loop, normal) >= 0.0) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < loop.size(); ++i) {
    best = std::min(best, point_segment_distance(q, loop[i], loop[(i + 1) % loop.size()]));
  }
  return best;
}

bool segment_crosses(const Vec3& a, const Vec3& b,
                     const std::vector<Vec3>& loop, const Vec3& normal,
                     double offset, double margin) {
  if (loop.size() < 3) return false;
  const double da = normal.dot(a) - offset;
  const double db = normal.dot(b) - offset;
  if (da * db >= 0.0) return false;
  const double s = da / (da - db);
  const Vec3 hit = a + s * (b - a);
  return inside_margin(hit, loop, normal) > margin;
}

}  // namespace bimdrift::polygon
