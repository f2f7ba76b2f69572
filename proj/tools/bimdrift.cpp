#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bimdrift/bim.hpp"
#include "bimdrift/comparison.hpp"
#include "bimdrift/config.hpp"
#include "bimdrift/errors.hpp"
#include "bimdrift/io.hpp"
#include "bimdrift/metrics.hpp"
#include "bimdrift/session.hpp"
#include "bimdrift/simulator.hpp"

namespace fs = std::filesystem;
using namespace bimdrift;

namespace {

constexpr int kUsageError = 2;
constexpr int kNumericalError = 3;

std::pair<int, int> parse_rooms(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw ValidationError("--rooms expects NxM, got '" + text + "'");
  try {
    std::size_t used_a = 0;
    std::size_t used_b = 0;
    const int a = std::stoi(text.substr(0, x), &used_a);
    const int b = std::stoi(text.substr(x + 1), &used_b);
    if (used_a != x || used_b != text.size() - x - 1) throw std::invalid_argument(text);
    return {a, b};
  } catch (const std::logic_error&) {
    throw ValidationError("--rooms expects NxM, got '" + text + "'");
  }
}

std::vector<Variant> parse_variants(const std::string& text) {
  std::vector<Variant> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(parse_variant(item));
  }
  return out;
}

BimModel load_split(const std::string& path) { return split_walls(load_bim(path)); }

struct GenerateArgs {
  std::string rooms = "2x2";
  double room_size = 4.0;
  double wall_height = 3.0;
  std::uint64_t seed = 0;
  std::string out = "out";
};

struct SimulateArgs {
  std::string floorplan;
  std::string waypoints;
  std::uint64_t seed = 7;
  bool drift_none = false;
  bool noise_none = false;
  DriftModel drift{.rot_rate = 0.002, .trans_rate = 0.005};
  NoiseModel noise{.sigma_normal = 0.02, .sigma_offset = 0.02, .sigma_centroid = 0.02};
  SimulationConfig sim;
  std::string out = "out";
};

struct ReplayArgs {
  std::string config;
  std::string floorplan;
  std::string log;
  std::string variant;
  std::string variants = "initial_manual,global,local";
  std::string out;
  std::uint64_t seed = 0;
  bool dump_config = false;
};

int cmd_generate(const GenerateArgs& args) {
  const auto [nx, ny] = parse_rooms(args.rooms);
  const SceneSpec spec{.rooms_x = nx,
                       .rooms_y = ny,
                       .room_size = args.room_size,
                       .wall_height = args.wall_height,
                       .seed = args.seed};
  const BimModel model = generate_scene(spec);
  const auto waypoints = generate_waypoints(spec);
  const fs::path dir(args.out);
  io::write_file_atomic(dir / "floorplan.json", dump_floorplan(model));
  io::write_file_atomic(dir / "waypoints.json", io::waypoints_to_json(waypoints));
  return 0;
}

int cmd_simulate(SimulateArgs args) {
  const BimModel model = load_split(args.floorplan);
  const auto waypoints = io::waypoints_from_json(io::read_file(args.waypoints));
  if (args.drift_none) args.drift = DriftModel{};
  if (args.noise_none) {
    args.noise.sigma_normal = args.noise.sigma_offset = args.noise.sigma_centroid = 0.0;
    args.noise.detection_prob = 1.0;
  }
  args.drift.seed = args.seed;
  args.noise.seed = args.seed + 1;
  const Simulation sim = simulate(model, waypoints, args.drift, args.noise, args.sim);

  std::ostringstream log;
  io::write_observation_log(log, sim.keyframes);
  const fs::path dir(args.out);
  io::write_file_atomic(dir / "observations.jsonl", log.str());
  io::write_file_atomic(dir / "ground_truth.json", io::ground_truth_to_json(sim.truth));
  return 0;
}

// Config file first, explicit flags on top.
RunConfig resolve_config(const ReplayArgs& args) {
  RunConfig config;
  if (!args.config.empty()) config = run_config_from_json(io::read_file(args.config));
  if (!args.floorplan.empty()) config.floorplan = args.floorplan;
  if (!args.log.empty()) config.log = args.log;
  if (!args.variant.empty()) config.variant = parse_variant(args.variant);
  if (!args.out.empty()) config.output_dir = args.out;
  if (args.seed != 0) config.seed = args.seed;
  return config;
}

void require_inputs(const RunConfig& config) {
  if (config.floorplan.empty() || config.log.empty()) {
    throw ValidationError("--floorplan and --log are required");
  }
}

int cmd_run(const ReplayArgs& args) {
  const RunConfig config = resolve_config(args);
  if (args.dump_config) {
    std::cout << run_config_to_json(config);
    return 0;
  }
  require_inputs(config);
  config.pipeline.validate();
  const BimModel model = load_split(config.floorplan);
  const auto stream = io::load_observation_log(config.log);
  const SessionRun run = run_session(stream, model, config.pipeline, config.variant);

  std::ostringstream csv;
  write_metrics_csv(csv, run.samples);
  const fs::path dir(config.output_dir);
  io::write_file_atomic(dir / "metrics.csv", csv.str());
  io::write_file_atomic(dir / "transform.json", io::session_to_json(run.state));
  return 0;
}

int cmd_compare(const ReplayArgs& args) {
  const RunConfig config = resolve_config(args);
  if (args.dump_config) {
    std::cout << run_config_to_json(config);
    return 0;
  }
  require_inputs(config);
  config.pipeline.validate();
  const auto variants = parse_variants(args.variants);
  const BimModel model = load_split(config.floorplan);
  const auto stream = io::load_observation_log(config.log);
  const ComparisonReport report = compare_variants(stream, model, config.pipeline, variants);

  std::vector<MetricsSample> all;
  for (Variant v : report.variants) {
    const auto& s = report.series.at(v);
    all.insert(all.end(), s.begin(), s.end());
  }
  std::ostringstream csv;
  write_metrics_csv(csv, all);
  const fs::path dir(config.output_dir);
  io::write_file_atomic(dir / "metrics.csv", csv.str());
  io::write_file_atomic(dir / "report.json", report_to_json(report));
  return 0;
}

void add_replay_options(CLI::App* cmd, ReplayArgs& args) {
  cmd->add_option("--config", args.config, "flat JSON run config");
  cmd->add_option("--floorplan", args.floorplan, "floorplan JSON");
  cmd->add_option("--log", args.log, "observation log (JSONL)");
  cmd->add_option("--seed", args.seed, "recorded in the config");
  cmd->add_option("-o,--output", args.out, "output directory (default ./out)");
  cmd->add_flag("--dump-config", args.dump_config, "print the effective config and exit");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BIM-aware SLAM drift correction"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "write a grid floorplan and waypoint loop");
  generate->add_option("--rooms", gen.rooms, "room grid, NxM");
  generate->add_option("--room-size", gen.room_size, "m");
  generate->add_option("--wall-height", gen.wall_height, "m");
  generate->add_option("--seed", gen.seed);
  generate->add_option("-o,--output", gen.out, "output directory");

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "write an observation log and ground truth");
  simulate_cmd->add_option("--floorplan", sim.floorplan)->required();
  simulate_cmd->add_option("--waypoints", sim.waypoints)->required();
  simulate_cmd->add_option("--seed", sim.seed);
  simulate_cmd->add_flag("--drift-none", sim.drift_none);
  simulate_cmd->add_flag("--noise-none", sim.noise_none);
  simulate_cmd->add_option("--rot-rate", sim.drift.rot_rate, "rad per keyframe");
  simulate_cmd->add_option("--trans-rate", sim.drift.trans_rate, "m per keyframe");
  simulate_cmd->add_option("--bias-rot", sim.drift.bias_rot, "rad per keyframe about z");
  simulate_cmd->add_option("--sigma-normal", sim.noise.sigma_normal);
  simulate_cmd->add_option("--sigma-offset", sim.noise.sigma_offset, "m");
  simulate_cmd->add_option("--sigma-centroid", sim.noise.sigma_centroid, "m");
  simulate_cmd->add_option("--detection-prob", sim.noise.detection_prob);
  simulate_cmd->add_option("--spacing", sim.sim.keyframe_spacing, "m between keyframes");
  simulate_cmd->add_option("--max-keyframes", sim.sim.max_keyframes, "0 walks the whole path");
  simulate_cmd->add_option("-o,--output", sim.out, "output directory");

  ReplayArgs run_args;
  auto* run = app.add_subcommand("run", "replay a log through one session variant");
  add_replay_options(run, run_args);
  run->add_option("--variant", run_args.variant, "initial_manual | global | local");

  ReplayArgs cmp_args;
  auto* compare = app.add_subcommand("compare", "replay a log through several variants");
  add_replay_options(compare, cmp_args);
  compare->add_option("--variants", cmp_args.variants, "comma separated, must include initial_manual");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*generate) return cmd_generate(gen);
    if (*simulate_cmd) return cmd_simulate(sim);
    if (*run) return cmd_run(run_args);
    if (*compare) return cmd_compare(cmp_args);
  } catch (const NonFiniteCost& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}
