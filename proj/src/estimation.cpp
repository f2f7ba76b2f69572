#include "bimdrift/estimation.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "bimdrift/errors.hpp"

namespace bimdrift {

namespace {

constexpr int kMaxStepHalvings = 8;

int point_rows(const EstimationConfig& config) {
  return config.point_residual_mode == PointResidualMode::point_to_plane ? 1 : 3;
}

Vec3 lexicographic_positive(const Vec3& v) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v[i]) > 1e-12) return v[i] > 0.0 ? v : Vec3(-v);
  }
  return v;
}

// Directions of translation the stacked residual cannot see.
std::vector<Vec3> translation_null_space(const Jacobian& jac, double relative) {
  const Eigen::MatrixXd block = jac.rightCols<3>();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(block, Eigen::ComputeFullV);
  const Eigen::VectorXd s = svd.singularValues();
  const double cutoff = s.size() > 0 ? relative * s(0) : 0.0;
  std::vector<Vec3> out;
  for (int i = 0; i < 3; ++i) {
    const double sigma = i < s.size() ? s(i) : 0.0;
    if (sigma <= cutoff) out.push_back(lexicographic_positive(svd.matrixV().col(i)));
  }
  return out;
}

struct Stacked {
  Eigen::VectorXd r;
  Jacobian j;
  double cost = 0.0;
};

Stacked stack(const MatchSet& matches, const RigidTransform& t,
              const EstimationConfig& config, bool with_jacobian) {
  const int rows_per = point_rows(config) + 3;
  const auto n = static_cast<Eigen::Index>(matches.size()) * rows_per;
  Stacked s;
  s.r.resize(n);
  if (with_jacobian) s.j.resize(n, 6);
  Eigen::Index row = 0;
  for (const auto& pair : matches.pairs) {
    if (with_jacobian) {
      Linearization lin = linearize(pair.observed.plane, pair.wall, t, config);
      s.r.segment(row, rows_per) = lin.residual;
      s.j.middleRows(row, rows_per) = lin.jacobian;
    } else {
      s.r.segment(row, rows_per) = residual(pair.observed.plane, pair.wall, t, config);
    }
    row += rows_per;
  }
  s.cost = s.r.squaredNorm();
  return s;
}

}  // namespace

void EstimationConfig::validate() const {
  if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
  if (!(convergence_tol > 0.0) || !(svd_truncation > 0.0)) {
    throw ValidationError("estimation tolerances must be positive");
  }
  if (!(normal_weight > 0.0)) throw ValidationError("normal_weight must be positive");
}

RigidTransform retract(const RigidTransform& transform, const Vec6& delta) {
  const Vec3 omega = delta.head<3>();
  const double angle = omega.norm();
  const Quat dq = angle == 0.0 ? Quat::Identity()
                               : Quat(Eigen::AngleAxisd(angle, omega / angle));
  return {transform.rotation() * dq, transform.translation() + delta.tail<3>()};
}

Eigen::VectorXd residual(const Plane& observed, const WallSegment& wall,
                         const RigidTransform& b_t_s,
                         const EstimationConfig& config) {
  return linearize(observed, wall, b_t_s, config).residual;
}

Linearization linearize(const Plane& observed, const WallSegment& wall,
                        const RigidTransform& b_t_s,
                        const EstimationConfig& config) {
  const Mat3 rot = b_t_s.rotation_matrix();
  const Vec3& t = b_t_s.translation();
  const Vec3& nb = wall.plane.normal();
  const Vec3& c = observed.centroid();
  Vec3 ns = observed.normal();
  if ((rot * ns).dot(nb) < 0.0) ns = -ns;
  const double w = std::sqrt(config.normal_weight);
  const int pr = point_rows(config);

  Linearization lin;
  lin.residual.resize(pr + 3);
  lin.jacobian.setZero(pr + 3, 6);

  // d(R Exp(w) x)/dw at w = 0 is -R [x]_x.
  const Vec3 mapped = rot * c + t;
  if (pr == 1) {
    lin.residual(0) = nb.dot(mapped) - wall.plane.offset();
    lin.jacobian.block<1, 3>(0, 0) = -nb.transpose() * rot * skew(c);
    lin.jacobian.block<1, 3>(0, 3) = nb.transpose();
  } else {
    lin.residual.head<3>() = mapped - wall.plane.centroid();
    lin.jacobian.block<3, 3>(0, 0) = -rot * skew(c);
    lin.jacobian.block<3, 3>(0, 3) = Mat3::Identity();
  }
  lin.residual.segment<3>(pr) = w * (rot * ns - nb);
  lin.jacobian.block<3, 3>(pr, 0) = -w * rot * skew(ns);
  return lin;
}

TruncatedSolve truncated_svd_solve(const Eigen::MatrixXd& a,
                                   const Eigen::VectorXd& b,
                                   double relative_threshold) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSolve out;
  out.singular_values = svd.singularValues();
  out.solution = Eigen::VectorXd::Zero(a.cols());
  if (out.singular_values.size() == 0) return out;
  const double cutoff = relative_threshold * out.singular_values(0);
  const Eigen::VectorXd utb = svd.matrixU().transpose() * b;
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
    const double sigma = out.singular_values(i);
    if (!(sigma > cutoff) || sigma == 0.0) continue;
    out.solution += svd.matrixV().col(i) * (utb(i) / sigma);
    ++out.rank;
  }
  return out;
}

EstimationResult estimate_transform(const MatchSet& matches,
                                    const RigidTransform& initial,
                                    const EstimationConfig& config) {
  config.validate();
  if (matches.empty()) throw EmptyMatchSet("no plane pairs to estimate from");

  EstimationResult result;
  RigidTransform current = initial;
  Stacked lin = stack(matches, current, config, true);
  if (!std::isfinite(lin.cost)) throw NonFiniteCost("initial cost is not finite");

  for (int it = 0; it < config.max_iterations; ++it) {
    const std::vector<Vec3> degenerate = translation_null_space(lin.j, config.svd_truncation);
    Vec6 delta = truncated_svd_solve(lin.j, -lin.r, config.svd_truncation).solution;
    // Unobservable translation keeps its initial value.
    for (const auto& d : degenerate) {
      delta.tail<3>() -= d.dot(delta.tail<3>()) * d;
    }
    if (!(delta.norm() >= config.convergence_tol)) {
      if (!delta.allFinite()) throw NonFiniteCost("Gauss-Newton step is not finite");
      break;
    }

    double scale = 1.0;
    bool accepted = false;
    bool any_finite = false;
    Stacked trial;
    RigidTransform candidate;
    for (int h = 0; h <= kMaxStepHalvings; ++h, scale *= 0.5) {
      candidate = retract(current, scale * delta);
      trial = stack(matches, candidate, config, false);
      if (std::isfinite(trial.cost)) {
        any_finite = true;
        if (trial.cost <= lin.cost) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      if (!any_finite) throw NonFiniteCost("cost diverged during Gauss-Newton");
      // No descent left at working precision.
      break;
    }

    result.trace.push_back({lin.cost, trial.cost, scale * delta, scale, degenerate});
    current = candidate;
    lin = stack(matches, current, config, true);
    ++result.iterations;
  }

  result.transform = current;
  result.final_cost = lin.cost;
  result.degenerate_directions = translation_null_space(lin.j, config.svd_truncation);
  result.rank = 3 - static_cast<int>(result.degenerate_directions.size());
  return result;
}

RigidTransform initial_alignment(std::span<const KnownCorrespondence> pairs,
                                 const BimModel& model,
                                 const EstimationConfig& config) {
  MatchSet matches;
  for (const auto& p : pairs) {
    const WallSegment* wall = model.find(p.wall_id);
    if (wall == nullptr) throw UnknownWallId("wall '" + p.wall_id + "' is not in the model");
    MatchCandidate diag;
    diag.wall_id = p.wall_id;
    matches.pairs.push_back({ObservedPlane{"", p.observed}, *wall, diag});
  }
  return estimate_transform(matches, RigidTransform::identity(), config).transform;
}

}  // namespace bimdrift
