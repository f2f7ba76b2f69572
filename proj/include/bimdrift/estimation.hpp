#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bimdrift/bim.hpp"
#include "bimdrift/geometry.hpp"
#include "bimdrift/matching.hpp"

namespace bimdrift {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Jacobian = Eigen::Matrix<double, Eigen::Dynamic, 6>;

enum class PointResidualMode { point_to_plane, point_to_point };

struct EstimationConfig {
  int max_iterations = 50;
  double convergence_tol = 1e-9;
  /// Weight of the normal term relative to the point term.
  double normal_weight = 1.0;
  /// Singular values below svd_truncation * sigma_max are treated as zero.
  double svd_truncation = 1e-6;
  PointResidualMode point_residual_mode = PointResidualMode::point_to_plane;

  void validate() const;
};

struct IterationRecord {
  double cost_before = 0.0;
  double cost_after = 0.0;
  /// Accepted update [omega; v] after step halving.
  Vec6 step = Vec6::Zero();
  double step_scale = 1.0;
  std::vector<Vec3> degenerate_directions;
};

struct EstimationResult {
  RigidTransform transform;  // B_T_S
  double final_cost = 0.0;
  int iterations = 0;
  /// Rank of the translation block of the Jacobian at the solution.
  int rank = 0;
  std::vector<Vec3> degenerate_directions;
  std::vector<IterationRecord> trace;
};

/// Local parameterization shared by the solver and its Jacobians:
/// (R, t) [+] [omega; v] = (R * Exp(omega), t + v).
RigidTransform retract(const RigidTransform& transform, const Vec6& delta);

/// Residual of one observed plane (frame S) against its wall under B_T_S.
/// Layout: [point term (1 or 3 rows), sqrt(lambda) * (R n_s - n_b)].
/// n_s is sign-flipped first so that (R n_s) . n_b >= 0.
Eigen::VectorXd residual(const Plane& observed, const WallSegment& wall,
                         const RigidTransform& b_t_s,
                         const EstimationConfig& config);

struct Linearization {
  Eigen::VectorXd residual;
  Jacobian jacobian;  // d residual / d [omega; v] at delta = 0
};

Linearization linearize(const Plane& observed, const WallSegment& wall,
                        const RigidTransform& b_t_s,
                        const EstimationConfig& config);

struct TruncatedSolve {
  Eigen::VectorXd solution;
  Eigen::VectorXd singular_values;
  int rank = 0;
};

/// Minimum-norm least-squares solution of A x = b from a dense SVD with
/// singular values below relative_threshold * sigma_max discarded.
TruncatedSolve truncated_svd_solve(const Eigen::MatrixXd& a,
                                   const Eigen::VectorXd& b,
                                   double relative_threshold);

/// Gauss-Newton on the stacked residuals of every pair, starting at
/// `initial`. The observed planes of `matches` must be in frame S.
/// Throws EmptyMatchSet, NonFiniteCost.
EstimationResult estimate_transform(const MatchSet& matches,
                                    const RigidTransform& initial,
                                    const EstimationConfig& config = {});

struct KnownCorrespondence {
  Plane observed;  // frame S
  std::string wall_id;
};

/// Manual-alignment baseline: fit B_T_S from identity to planes whose wall
/// ids are given. Throws UnknownWallId, EmptyMatchSet.
RigidTransform initial_alignment(std::span<const KnownCorrespondence> pairs,
                                 const BimModel& model,
                                 const EstimationConfig& config = {});

}  // namespace bimdrift
