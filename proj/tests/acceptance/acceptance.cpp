// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "../support/fixtures.hpp"
#include "bimdrift/comparison.hpp"
#include "bimdrift/estimation.hpp"
#include "bimdrift/io.hpp"
#include "bimdrift/matching.hpp"
#include "bimdrift/polygon.hpp"
#include "bimdrift/session.hpp"

namespace fs = std::filesystem;
using namespace bimdrift;
using namespace bimdrift::testing;

namespace {

// Tolerances.
constexpr double kRecoveryRad = 1e-6;
constexpr double kRecoveryM = 1e-6;
constexpr double kRecoverySeconds = 1.0;
constexpr double kUnchanged = 1e-12;
constexpr double kOracleSeconds = 30.0;
constexpr double kOracleSlack = 1e-12;
constexpr double kGridRad = 0.001;
constexpr double kGridM = 0.001;
constexpr double kMatchRate = 0.95;
constexpr double kMinAngularReduction = 40.0;
constexpr double kMinDistanceReduction = 50.0;
constexpr double kFixtureSeconds = 60.0;
constexpr double kLocalPenetration = 0.1;
constexpr double kBaselinePenetration = 0.3;
constexpr double kJacobianRel = 1e-5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

std::vector<IterationRecord> g_traces;  // every GN trace, for criterion 9

void keep_trace(const EstimationResult& r) {
  g_traces.insert(g_traces.end(), r.trace.begin(), r.trace.end());
}

RigidTransform random_transform(std::mt19937_64& rng, double max_angle, double max_shift) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec3 axis(u(rng), u(rng), u(rng));
  axis.normalize();
  const double angle = max_angle * std::abs(u(rng));
  Vec3 t(u(rng), u(rng), u(rng));
  t *= max_shift * std::abs(u(rng)) / t.norm();
  return RigidTransform::from_rotation_vector(angle * axis, t);
}

// 1: noiseless room with floor, random B_T_S, identity start.
Outcome exact_recovery() {
  const BimModel model = room_with_floor();
  std::mt19937_64 rng(101);
  double worst_rad = 0.0;
  double worst_m = 0.0;
  double slowest = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const RigidTransform truth = random_transform(rng, 15.0 * std::numbers::pi / 180.0, 1.0);
    const MatchSet matches = exact_matches(model, truth);
    const auto start = std::chrono::steady_clock::now();
    const EstimationResult r = estimate_transform(matches, RigidTransform::identity());
    slowest = std::max(slowest, seconds_since(start));
    keep_trace(r);
    worst_rad = std::max(worst_rad, rotation_distance(r.transform, truth));
    worst_m = std::max(worst_m, translation_distance(r.transform, truth));
  }
  return {worst_rad <= kRecoveryRad && worst_m <= kRecoveryM && slowest < kRecoverySeconds,
          "20 trials, worst " + fmt(worst_rad) + " rad / " + fmt(worst_m) + " m, slowest " +
              fmt(slowest) + " s"};
}

int analytic_rank(const MatchSet& matches) {
  Eigen::MatrixXd normals(static_cast<Eigen::Index>(matches.size()), 3);
  for (std::size_t i = 0; i < matches.size(); ++i) {
    normals.row(static_cast<Eigen::Index>(i)) = matches.pairs[i].wall.plane.normal().transpose();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(normals);
  lu.setThreshold(1e-9);
  return static_cast<int>(lu.rank());
}

// 2: parallel walls constrain x only; two orthogonal walls constrain x and y.
Outcome degeneracy() {
  const BimModel room = four_wall_room();
  const RigidTransform truth({1, 0, 0, 0}, Vec3(0.5, 0.7, 0.9));
  bool ok = true;
  std::string detail;
  for (const auto& ids : {std::vector<std::string>{"wx0", "wx1"},
                          std::vector<std::string>{"wx0", "wy0"}}) {
    std::vector<WallSegment> walls;
    for (const auto& id : ids) walls.push_back(*room.find(id));
    const MatchSet matches = exact_matches(BimModel(walls), truth);
    const EstimationResult r = estimate_transform(matches, RigidTransform::identity());
    keep_trace(r);
    const int rank = analytic_rank(matches);
    const Vec3 t = r.transform.translation();
    bool case_ok = r.rank == rank && std::abs(t.x() - 0.5) <= kRecoveryM &&
                   rotation_distance(r.transform, RigidTransform::identity()) <= kUnchanged;
    if (rank == 1) {
      case_ok = case_ok && std::abs(t.y()) <= kUnchanged && std::abs(t.z()) <= kUnchanged;
    } else {
      case_ok = case_ok && std::abs(t.y() - 0.7) <= kRecoveryM && std::abs(t.z()) <= kUnchanged;
    }
    // The reported null space must be orthogonal to every wall normal.
    for (const auto& d : r.degenerate_directions) {
      for (const auto& p : matches.pairs) case_ok = case_ok && std::abs(d.dot(p.wall.plane.normal())) < 1e-9;
    }
    ok = ok && case_ok;
    detail += ids[0] + "+" + ids[1] + ": rank " + std::to_string(r.rank) + " (analytic " +
              std::to_string(rank) + "), t = [" + fmt(t.x()) + ", " + fmt(t.y()) + ", " +
              fmt(t.z()) + "]; ";
  }
  return {ok, detail};
}

struct PlanarPair {
  Vec3 ns, cs;  // observed, frame S
  Vec3 nb;
  double db;
};

// Cost of the default objective restricted to yaw + horizontal translation,
// written out independently of the library.
struct PlanarCost {
  std::vector<PlanarPair> pairs;
  double lambda = 1.0;

  double at(double yaw, double tx, double ty) const {
    const Eigen::Matrix3d r = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
    double cost = 0.0;
    for (const auto& p : pairs) {
      Vec3 n = r * p.ns;
      if (n.dot(p.nb) < 0.0) n = -n;
      const double point = p.nb.dot(r * p.cs + Vec3(tx, ty, 0.0)) - p.db;
      cost += point * point + lambda * (n - p.nb).squaredNorm();
    }
    return cost;
  }

  // Exhaustive grid. For each yaw the translation part is evaluated from the
  // per-plane constants, which is the same sum as `at`.
  double grid_min(double yaw0, double tx0, double ty0, double yaw_half, double t_half) const {
    const int ny = static_cast<int>(std::lround(yaw_half / kGridRad));
    const int nt = static_cast<int>(std::lround(t_half / kGridM));
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> a(pairs.size());
    for (int i = -ny; i <= ny; ++i) {
      const double yaw = yaw0 + i * kGridRad;
      const Eigen::Matrix3d r = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
      double normal_part = 0.0;
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto& p = pairs[k];
        Vec3 n = r * p.ns;
        if (n.dot(p.nb) < 0.0) n = -n;
        normal_part += lambda * (n - p.nb).squaredNorm();
        a[k] = p.nb.dot(r * p.cs) - p.db;
      }
      for (int jx = -nt; jx <= nt; ++jx) {
        const double tx = tx0 + jx * kGridM;
        for (int jy = -nt; jy <= nt; ++jy) {
          const double ty = ty0 + jy * kGridM;
          double cost = normal_part;
          for (std::size_t k = 0; k < pairs.size(); ++k) {
            const double point = a[k] + pairs[k].nb.x() * tx + pairs[k].nb.y() * ty;
            cost += point * point;
          }
          best = std::min(best, cost);
        }
      }
    }
    return best;
  }
};

// 3: Gauss-Newton against exhaustive search on noisy planar scenes.
Outcome oracle_equivalence() {
  constexpr double kYawHalf = 0.05;
  constexpr double kTHalf = 0.15;
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  double worst_gap = -std::numeric_limits<double>::infinity();
  double worst_consistency = 0.0;
  for (int seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(500 + seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int count = 4 + seed % 3;
    std::vector<WallSegment> walls;
    for (int i = 0; i < count; ++i) {
      const double phi = 2.0 * std::numbers::pi * (i + 0.3 * u(rng)) / count;
      const Vec3 n(std::cos(phi), std::sin(phi), 0.0);
      const Vec3 along(-n.y(), n.x(), 0.0);
      const Vec3 center = (1.5 + 2.5 * u(rng)) * n;
      const double half = 1.0 + u(rng);
      walls.push_back(make_wall("w" + std::to_string(i),
                                {center - half * along, center + half * along,
                                 center + half * along + Vec3(0, 0, 3),
                                 center - half * along + Vec3(0, 0, 3)}));
    }
    const BimModel model(walls);
    const double yaw = 0.06 * (u(rng) - 0.5);
    const Vec3 t(0.2 * (u(rng) - 0.5), 0.2 * (u(rng) - 0.5), 0.0);
    const RigidTransform truth = RigidTransform::rot_z(yaw, t);

    MatchSet matches = exact_matches(model, truth);
    PlanarCost oracle;
    for (auto& pair : matches.pairs) {
      pair.observed.plane = perturb(pair.observed.plane, 0.0, 0.01, rng);
      oracle.pairs.push_back({pair.observed.plane.normal(), pair.observed.plane.centroid(),
                              pair.wall.plane.normal(), pair.wall.plane.offset()});
    }
    const EstimationResult r = estimate_transform(matches, RigidTransform::identity());
    keep_trace(r);

    const Vec3 rv = r.transform.rotation_vector();
    const Vec3 rt = r.transform.translation();
    const bool planar = std::abs(rv.x()) < 1e-12 && std::abs(rv.y()) < 1e-12 &&
                        std::abs(rt.z()) < 1e-12;
    const bool inside = std::abs(rv.z() - yaw) < kYawHalf && std::abs(rt.x() - t.x()) < kTHalf &&
                        std::abs(rt.y() - t.y()) < kTHalf;
    const double best = oracle.grid_min(yaw, t.x(), t.y(), kYawHalf, kTHalf);
    const double consistency = std::abs(oracle.at(rv.z(), rt.x(), rt.y()) - r.final_cost);
    worst_gap = std::max(worst_gap, r.final_cost - best);
    worst_consistency = std::max(worst_consistency, consistency);
    ok = ok && planar && inside && consistency < 1e-12 && r.final_cost <= best + kOracleSlack;
  }
  const double elapsed = seconds_since(start);
  ok = ok && elapsed < kOracleSeconds;
  return {ok, "10 fixtures, max (GN cost - grid min) = " + fmt(worst_gap) +
                  ", cost cross-check " + fmt(worst_consistency) + ", " + fmt(elapsed) + " s"};
}

// 4: noisy full-wall observations of the 4-wall room.
Outcome matching_precision() {
  const BimModel model = four_wall_room();
  MatchConfig config;
  config.tau = 9.488;
  int correct = 0;
  int total = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::mt19937_64 rng(9000 + trial);
    std::vector<ObservedPlane> observed;
    for (const auto& w : model.walls()) {
      observed.push_back({w.id, perturb(w.plane, 0.02, 0.02, rng)});
    }
    const MatchSet m = match_planes(observed, model, config, trial);
    for (const auto& p : m.pairs) correct += p.observed.id == p.wall.id;
    total += static_cast<int>(observed.size());
  }
  const double rate = static_cast<double>(correct) / total;
  return {rate >= kMatchRate, std::to_string(correct) + "/" + std::to_string(total) +
                                  " correct (" + fmt(100.0 * rate) + " %)"};
}

struct FixtureRun {
  DriftFixture fixture;
  ComparisonReport report;
  double seconds = 0.0;
};

FixtureRun run_fixture(double severity) {
  const auto start = std::chrono::steady_clock::now();
  DriftFixture fixture = standard_drift_fixture(severity);
  const std::vector<Variant> variants{Variant::initial_manual, Variant::global, Variant::local};
  ComparisonReport report =
      compare_variants(fixture.sim.keyframes, fixture.model, PipelineConfig{}, variants);
  return {std::move(fixture), std::move(report), seconds_since(start)};
}

Outcome headline(const FixtureRun& run) {
  const Reduction& r = run.report.reductions.at(Variant::local);
  return {r.angular_pct >= kMinAngularReduction && r.distance_pct >= kMinDistanceReduction &&
              run.seconds < kFixtureSeconds,
          "local reduction " + fmt(r.angular_pct) + " % angular, " + fmt(r.distance_pct) +
              " % distance, " + fmt(run.seconds) + " s"};
}

Outcome ordering(const FixtureRun& run) {
  const auto& p = run.report.pooled;
  const auto& i = p.at(Variant::initial_manual);
  const auto& g = p.at(Variant::global);
  const auto& l = p.at(Variant::local);
  const bool ok = l.angular && g.angular && i.angular && l.distance && g.distance && i.distance &&
                  *l.angular <= *g.angular && *g.angular <= *i.angular &&
                  *l.distance <= *g.distance && *g.distance <= *i.distance;
  auto show = [](const PooledMeans& m) {
    return fmt(m.angular.value_or(NAN)) + " rad / " + fmt(m.distance.value_or(NAN)) + " m";
  };
  return {ok, "local " + show(l) + ", global " + show(g) + ", initial_manual " + show(i)};
}

Outcome severity(const FixtureRun& base, const FixtureRun& doubled) {
  const double a = base.report.reductions.at(Variant::local).distance_pct;
  const double b = doubled.report.reductions.at(Variant::local).distance_pct;
  return {b >= a, "local distance reduction " + fmt(a) + " % at 1x drift, " + fmt(b) + " % at 2x"};
}

// Deepest excursion of the corrected camera through a wall: the segment from
// the true to the corrected position crosses the wall polygon.
double max_penetration(const DriftFixture& f, Variant variant) {
  const SessionRun run = run_session(f.sim.keyframes, f.model, PipelineConfig{}, variant);
  double worst = 0.0;
  for (std::size_t k = 0; k < f.sim.keyframes.size(); ++k) {
    const Vec3 corrected =
        (run.state.history[k].transform * f.sim.keyframes[k].camera_pose).translation();
    const Vec3 truth = f.sim.truth.true_poses[k].translation();
    for (const auto& w : f.model.walls()) {
      const Plane& p = w.plane;
      if (polygon::segment_crosses(truth, corrected, p.corners(), p.normal(), p.offset())) {
        worst = std::max(worst, std::abs(p.signed_distance(corrected)));
      }
    }
  }
  return worst;
}

Outcome penetration(const FixtureRun& run) {
  const double local = max_penetration(run.fixture, Variant::local);
  const double baseline = max_penetration(run.fixture, Variant::initial_manual);
  return {local <= kLocalPenetration && baseline > kBaselinePenetration,
          "max wall penetration: local " + fmt(local) + " m, initial_manual " + fmt(baseline) + " m"};
}

// 9: analytic Jacobians and monotone cost.
Outcome numerical_hygiene(const FixtureRun& run) {
  const BimModel model = room_with_floor();
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (const auto mode : {PointResidualMode::point_to_plane, PointResidualMode::point_to_point}) {
    EstimationConfig config;
    config.point_residual_mode = mode;
    config.normal_weight = 0.7;
    for (int state = 0; state < 20; ++state) {
      const WallSegment& wall = model.walls()[static_cast<std::size_t>(state) % model.size()];
      const RigidTransform b_t_s = random_transform(rng, 0.5, 2.0);
      const Plane observed =
          perturb(transform_plane(random_transform(rng, 0.3, 0.5), wall.plane), 0.05, 0.05, rng);
      const Linearization lin = linearize(observed, wall, b_t_s, config);
      Jacobian numeric(lin.jacobian.rows(), 6);
      constexpr double h = 1e-6;
      for (int j = 0; j < 6; ++j) {
        Vec6 d = Vec6::Zero();
        d(j) = h;
        numeric.col(j) = (residual(observed, wall, retract(b_t_s, d), config) -
                          residual(observed, wall, retract(b_t_s, -d), config)) /
                         (2.0 * h);
      }
      worst = std::max(worst, (lin.jacobian - numeric).norm() / numeric.norm());
    }
  }

  // Extra traces from the drift fixture: each keyframe's planes, paired by
  // ground truth, estimated from the reported pose.
  const auto& f = run.fixture;
  for (std::size_t k = 0; k < f.sim.keyframes.size(); k += 5) {
    const auto& kf = f.sim.keyframes[k];
    MatchSet m;
    for (const auto& p : kf.planes) {
      const auto& wall_id = f.sim.truth.correspondences.at({kf.keyframe_id, p.plane_id});
      m.pairs.push_back({ObservedPlane{p.plane_id, transform_plane(kf.camera_pose, p.plane)},
                         *f.model.find(wall_id), {}});
    }
    if (!m.empty()) keep_trace(estimate_transform(m, RigidTransform::identity()));
  }

  int increases = 0;
  for (const auto& rec : g_traces) increases += rec.cost_after > rec.cost_before;
  return {worst <= kJacobianRel && increases == 0,
          "worst Jacobian relative error " + fmt(worst) + " over 40 states; " +
              std::to_string(increases) + " cost increases in " + std::to_string(g_traces.size()) +
              " accepted steps"};
}

// 10: byte-identical CLI outputs across repeated invocations.
int shell(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

Outcome cli_determinism() {
  const std::string cli = BIMDRIFT_CLI_PATH;
  const fs::path root = fs::temp_directory_path() / "bimdrift_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  std::vector<std::string> mismatched;
  bool ran = true;
  for (const std::string rep : {"a", "b"}) {
    const fs::path dir = root / rep;
    const std::string d = dir.string();
    ran = ran && shell(cli + " generate --rooms 2x2 --room-size 4 --seed 1 -o " + d) == 0;
    ran = ran && shell(cli + " simulate --floorplan " + d + "/floorplan.json --waypoints " + d +
                       "/waypoints.json --seed 7 --max-keyframes 150 -o " + d) == 0;
    ran = ran && shell(cli + " run --floorplan " + d + "/floorplan.json --log " + d +
                       "/observations.jsonl --variant local -o " + d + "/run") == 0;
    ran = ran && shell(cli + " compare --floorplan " + d + "/floorplan.json --log " + d +
                       "/observations.jsonl -o " + d + "/compare") == 0;
    ran = ran && shell(cli + " run --dump-config --variant global > " + d + "/config.json") == 0;
  }
  const std::vector<std::string> files{"floorplan.json",      "waypoints.json",
                                       "observations.jsonl",  "ground_truth.json",
                                       "run/metrics.csv",     "run/transform.json",
                                       "compare/metrics.csv", "compare/report.json",
                                       "config.json"};
  for (const auto& f : files) {
    const fs::path a = root / "a" / f;
    const fs::path b = root / "b" / f;
    if (!fs::exists(a) || !fs::exists(b) || io::read_file(a) != io::read_file(b)) {
      mismatched.push_back(f);
    }
  }
  fs::remove_all(root);
  std::string detail = std::to_string(files.size() - mismatched.size()) + "/" +
                       std::to_string(files.size()) + " outputs identical";
  for (const auto& m : mismatched) detail += ", differs: " + m;
  if (!ran) detail += ", a command failed";
  return {ran && mismatched.empty(), detail};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " " << name << ": "
              << o.detail << std::endl;
  };

  report(1, "exact recovery", exact_recovery);
  report(2, "degeneracy handling", degeneracy);
  report(3, "oracle equivalence", oracle_equivalence);
  report(4, "matching precision", matching_precision);

  const FixtureRun base = run_fixture(1.0);
  const FixtureRun doubled = run_fixture(2.0);
  report(5, "headline reductions", [&] { return headline(base); });
  report(6, "variant ordering", [&] { return ordering(base); });
  report(7, "drift severity", [&] { return severity(base, doubled); });
  report(8, "trajectory sanity", [&] { return penetration(base); });
  report(9, "numerical hygiene", [&] { return numerical_hygiene(base); });
  report(10, "CLI determinism", cli_determinism);

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
