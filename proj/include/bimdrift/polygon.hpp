#pragma once

#include <vector>

#include "bimdrift/geometry.hpp"

// Helpers for convex planar polygons stored as ordered 3-D vertex loops.
namespace bimdrift::polygon {

/// Sutherland-Hodgman clip keeping the part with dot(normal, x) >= offset.
std::vector<Vec3> clip(const std::vector<Vec3>& loop, const Vec3& normal,
                       double offset);

Vec3 mean(const std::vector<Vec3>& loop);

/// Unsigned area, triangulated from the vertex mean.
double area(const std::vector<Vec3>& loop, const Vec3& normal);

/// In-plane distance from the projection of `point` onto the polygon's
/// plane to the polygon (0 when the projection falls inside).
double distance_to(const Vec3& point, const std::vector<Vec3>& loop,
                   const Vec3& normal);

/// True when the open segment (a, b) crosses the polygon's interior.
/// `margin` shrinks the polygon so grazing contacts do not count.
bool segment_crosses(const Vec3& a, const Vec3& b,
                     const std::vector<Vec3>& loop, const Vec3& normal,
                     double offset, double margin = 1e-6);

}  // namespace bimdrift::polygon
