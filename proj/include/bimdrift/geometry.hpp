#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <optional>
#include <vector>

namespace bimdrift {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;

/// Maximum distance (m) a corner may sit off its plane.
inline constexpr double kCoplanarTolerance = 1e-6;

/// Default detection noise used when a producer supplies no covariance.
inline constexpr double kDefaultSigmaNormal = 0.05;
inline constexpr double kDefaultSigmaOffset = 0.05;

Mat3 skew(const Vec3& v);

/// Rotation matrix of a rotation vector (axis * angle).
Mat3 so3_exp(const Vec3& omega);

/// Element of SE(3). Maps points of the source frame into the target frame:
/// x_target = R * x_source + t. Rotation is held as a unit quaternion;
/// inputs further than 1e-12 from unit norm are renormalized.
class RigidTransform {
 public:
  RigidTransform() = default;
  RigidTransform(const Quat& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_rotation_vector(const Vec3& omega,
                                             const Vec3& translation = Vec3::Zero());
  static RigidTransform from_matrix(const Mat3& rotation,
                                    const Vec3& translation);
  static RigidTransform rot_z(double angle,
                              const Vec3& translation = Vec3::Zero());

  const Quat& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  Mat3 rotation_matrix() const { return rotation_.toRotationMatrix(); }

  /// Rotation vector of the rotation part, angle in [0, pi].
  Vec3 rotation_vector() const;

  Vec3 apply(const Vec3& point) const { return rotation_ * point + translation_; }
  Vec3 rotate(const Vec3& direction) const { return rotation_ * direction; }

  RigidTransform inverse() const;

 private:
  Quat rotation_{Quat::Identity()};
  Vec3 translation_{Vec3::Zero()};
};

/// a * b: apply b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& a);

inline RigidTransform operator*(const RigidTransform& a,
                                const RigidTransform& b) {
  return compose(a, b);
}

/// Angle (rad) of the relative rotation between a and b.
double rotation_distance(const RigidTransform& a, const RigidTransform& b);
double translation_distance(const RigidTransform& a, const RigidTransform& b);

/// Bounded planar patch in Hessian normal form (normal . x = offset).
///
/// Instances are always canonical: offset >= 0, and when the plane passes
/// through the origin the normal is lexicographically positive. The
/// covariance is over the feature vector [n_x, n_y, n_z, offset].
class Plane {
 public:
  /// Fits the plane through a polygon. Throws CollinearInput or
  /// NonCoplanarInput.
  static Plane from_corners(std::vector<Vec3> corners,
                            const std::optional<Mat4>& covariance = {});

  /// Builds a plane from an explicit normal/offset; corners must lie on it.
  static Plane from_parts(const Vec3& normal, double offset,
                          std::vector<Vec3> corners,
                          const std::optional<Mat4>& covariance = {});

  const Vec3& normal() const { return normal_; }
  double offset() const { return offset_; }
  const Vec3& centroid() const { return centroid_; }
  const std::vector<Vec3>& corners() const { return corners_; }
  double area() const { return area_; }
  const Mat4& covariance() const { return covariance_; }

  /// [n_x, n_y, n_z, offset]
  Vec4 feature() const;

  double signed_distance(const Vec3& point) const {
    return normal_.dot(point) - offset_;
  }

  /// Same plane with the stored normal/offset sign reversed. The result is
  /// deliberately non-canonical; canonicalize() undoes it.
  Plane flipped() const;

  bool is_canonical() const;

 private:
  friend Plane canonicalize(const Plane& plane);
  friend Plane transform_plane(const RigidTransform& transform,
                               const Plane& plane);

  Plane() = default;

  Vec3 normal_{Vec3::UnitZ()};
  double offset_ = 0.0;
  Vec3 centroid_{Vec3::Zero()};
  std::vector<Vec3> corners_;
  double area_ = 0.0;
  Mat4 covariance_{Mat4::Identity()};
};

Mat4 default_plane_covariance();

Plane canonicalize(const Plane& plane);

/// Maps corners, centroid and normal through the transform; offset is
/// recomputed from the mapped centroid and the result re-canonicalized. The
/// normal block of the covariance is rotated, the offset variance kept.
Plane transform_plane(const RigidTransform& transform, const Plane& plane);

/// Unsigned angle between plane normals, in [0, pi/2].
double angular_deviation(const Plane& p, const Plane& q);

/// Perpendicular distance of observed.centroid from the reference plane.
double distance_error(const Plane& observed, const Plane& reference);

}  // namespace bimdrift
