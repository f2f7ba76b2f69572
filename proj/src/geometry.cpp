#include "bimdrift/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "bimdrift/errors.hpp"
#include "bimdrift/polygon.hpp"

namespace bimdrift {

namespace {

// |offset| below this counts as "through the origin" for sign selection.
constexpr double kOffsetTie = 1e-12;

bool lexicographically_positive(const Vec3& v) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v[i]) > kOffsetTie) return v[i] > 0.0;
  }
  return true;
}

Mat4 checked_covariance(const std::optional<Mat4>& covariance) {
  if (!covariance) return default_plane_covariance();
  const Mat4& c = *covariance;
  if (!c.allFinite()) throw ValidationError("covariance has non-finite entries");
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw ValidationError("covariance is not symmetric");
  }
  Mat4 sym = 0.5 * (c + c.transpose());
  if (Eigen::LLT<Mat4>(sym).info() != Eigen::Success) {
    throw ValidationError("covariance is not positive definite");
  }
  return sym;
}

}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Mat3 so3_exp(const Vec3& omega) {
  const double angle = omega.norm();
  if (angle == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix();
}

RigidTransform::RigidTransform(const Quat& rotation, const Vec3& translation)
    : rotation_(std::abs(rotation.norm() - 1.0) <= 1e-12 ? rotation : rotation.normalized()),
      translation_(translation) {
  // Keep w >= 0 so equal rotations have equal storage.
  if (rotation_.w() < 0.0) rotation_.coeffs() *= -1.0;
}

RigidTransform RigidTransform::from_rotation_vector(const Vec3& omega,
                                                    const Vec3& translation) {
  const double angle = omega.norm();
  if (angle == 0.0) return {Quat::Identity(), translation};
  return {Quat(Eigen::AngleAxisd(angle, omega / angle)), translation};
}

RigidTransform RigidTransform::from_matrix(const Mat3& rotation,
                                           const Vec3& translation) {
  return {Quat(rotation), translation};
}

RigidTransform RigidTransform::rot_z(double angle, const Vec3& translation) {
  return {Quat(Eigen::AngleAxisd(angle, Vec3::UnitZ())), translation};
}

Vec3 RigidTransform::rotation_vector() const {
  const double s = rotation_.vec().norm();
  if (s == 0.0) return Vec3::Zero();
  const double angle = 2.0 * std::atan2(s, rotation_.w());
  return rotation_.vec() / s * angle;
}

RigidTransform RigidTransform::inverse() const {
  const Quat inv = rotation_.conjugate();
  return {inv, -(inv * translation_)};
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation() * b.rotation(), a.apply(b.translation())};
}

RigidTransform invert(const RigidTransform& a) { return a.inverse(); }

double rotation_distance(const RigidTransform& a, const RigidTransform& b) {
  const Quat rel = a.rotation().conjugate() * b.rotation();
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

double translation_distance(const RigidTransform& a, const RigidTransform& b) {
  return (a.translation() - b.translation()).norm();
}

Mat4 default_plane_covariance() {
  Vec4 diag(kDefaultSigmaNormal * kDefaultSigmaNormal,
            kDefaultSigmaNormal * kDefaultSigmaNormal,
            kDefaultSigmaNormal * kDefaultSigmaNormal,
            kDefaultSigmaOffset * kDefaultSigmaOffset);
  return diag.asDiagonal();
}

Plane Plane::from_corners(std::vector<Vec3> corners,
                          const std::optional<Mat4>& covariance) {
  if (corners.size() < 3) {
    throw CollinearInput("a plane needs at least 3 corners");
  }
  for (const auto& c : corners) {
    if (!c.allFinite()) throw ValidationError("corner is not finite");
  }
  const Vec3 centroid = polygon::mean(corners);

  // Newell's method: the summed cross products point along the normal and
  // their norm is twice the polygon area.
  Vec3 newell = Vec3::Zero();
  double extent = 0.0;
  for (std::size_t i = 0; i < corners.size(); ++i) {
    const Vec3 a = corners[i] - centroid;
    const Vec3 b = corners[(i + 1) % corners.size()] - centroid;
    newell += a.cross(b);
    extent = std::max(extent, a.norm());
  }
  if (extent == 0.0 || newell.norm() <= 1e-12 * extent * extent) {
    throw CollinearInput("corners do not span a plane");
  }
  const Vec3 normal = newell.normalized();
  for (const auto& c : corners) {
    const double deviation = std::abs(normal.dot(c - centroid));
    if (deviation > kCoplanarTolerance) {
      throw NonCoplanarInput("corner deviates " + std::to_string(deviation) +
                             " m from the fitted plane");
    }
  }

  Plane plane;
  plane.normal_ = normal;
  plane.offset_ = normal.dot(centroid);
  plane.centroid_ = centroid;
  plane.corners_ = std::move(corners);
  plane.area_ = 0.5 * newell.norm();
  plane.covariance_ = checked_covariance(covariance);
  return canonicalize(plane);
}

Plane Plane::from_parts(const Vec3& normal, double offset,
                        std::vector<Vec3> corners,
                        const std::optional<Mat4>& covariance) {
  if (!normal.allFinite() || !std::isfinite(offset)) {
    throw ValidationError("plane parameters are not finite");
  }
  if (std::abs(normal.norm() - 1.0) > 1e-6) {
    throw ValidationError("plane normal is not unit length");
  }
  if (corners.size() < 3) {
    throw CollinearInput("a plane needs at least 3 corners");
  }
  Plane plane;
  // Already-unit normals are kept as given so serialized planes round-trip.
  plane.normal_ = std::abs(normal.norm() - 1.0) <= 1e-12 ? normal : normal.normalized();
  plane.offset_ = offset;
  for (const auto& c : corners) {
    if (!c.allFinite()) throw ValidationError("corner is not finite");
    const double deviation = std::abs(plane.signed_distance(c));
    if (deviation > kCoplanarTolerance) {
      throw NonCoplanarInput("corner deviates " + std::to_string(deviation) +
                             " m from the plane");
    }
  }
  plane.centroid_ = polygon::mean(corners);
  plane.area_ = polygon::area(corners, plane.normal_);
  if (!(plane.area_ > 0.0)) throw CollinearInput("polygon has zero area");
  plane.corners_ = std::move(corners);
  plane.covariance_ = checked_covariance(covariance);
  return canonicalize(plane);
}

Vec4 Plane::feature() const {
  return {normal_.x(), normal_.y(), normal_.z(), offset_};
}

Plane Plane::flipped() const {
  Plane out = *this;
  out.normal_ = -normal_;
  out.offset_ = -offset_;
  return out;
}

bool Plane::is_canonical() const {
  if (offset_ > kOffsetTie) return true;
  if (offset_ < -kOffsetTie) return false;
  return lexicographically_positive(normal_);
}

Plane canonicalize(const Plane& plane) {
  if (plane.is_canonical()) return plane;
  // Negating feature signs leaves the covariance unchanged (J = -I).
  return plane.flipped();
}

Plane transform_plane(const RigidTransform& transform, const Plane& plane) {
  Plane out;
  out.normal_ = transform.rotate(plane.normal_);
  out.centroid_ = transform.apply(plane.centroid_);
  out.offset_ = out.normal_.dot(out.centroid_);
  out.corners_.reserve(plane.corners_.size());
  for (const auto& c : plane.corners_) out.corners_.push_back(transform.apply(c));
  out.area_ = plane.area_;
  Mat4 jac = Mat4::Identity();
  jac.topLeftCorner<3, 3>() = transform.rotation_matrix();
  out.covariance_ = jac * plane.covariance_ * jac.transpose();
  return canonicalize(out);
}

double angular_deviation(const Plane& p, const Plane& q) {
  // atan2 form of arccos(|n_p . n_q|); keeps precision for small angles.
  const double c = std::abs(p.normal().dot(q.normal()));
  const double s = p.normal().cross(q.normal()).norm();
  return std::atan2(s, c);
}

double distance_error(const Plane& observed, const Plane& reference) {
  return std::abs(reference.signed_distance(observed.centroid()));
}

}  // namespace bimdrift
