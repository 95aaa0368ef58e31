// revisit: simulate worlds, train structural priors, localize against partial
// maps and evaluate match precision/recall.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "revisit/benchmark_suite.hpp"
#include "revisit/errors.hpp"
#include "revisit/evaluation.hpp"
#include "revisit/localization_filter.hpp"
#include "revisit/model_io.hpp"
#include "revisit/occupancy_grid.hpp"
#include "revisit/sim_world.hpp"
#include "revisit/text_format.hpp"

namespace {

using namespace revisit;

std::vector<double> parse_numbers(const std::string& text, char sep) {
  std::vector<double> out;
  for (auto t : split_on(text, sep)) {
    out.push_back(parse_double(t));
  }
  return out;
}

std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

struct WorldFlags {
  std::size_t beams = 181;
  double max_range = 8.0;
  double noise = 0.02;
  double dropout = 0.01;

  void attach(CLI::App* cmd) {
    cmd->add_option("--beams", beams, "beams per scan")->capture_default_str();
    cmd->add_option("--max-range", max_range, "sensor range in meters")->capture_default_str();
    cmd->add_option("--range-noise", noise, "range noise sigma in meters")->capture_default_str();
    cmd->add_option("--dropout", dropout, "per-beam dropout probability")->capture_default_str();
  }

  WorldConfig config(std::uint64_t seed) const {
    WorldConfig cfg;
    cfg.beam_count = beams;
    cfg.max_range = max_range;
    cfg.range_noise_sigma = noise;
    cfg.dropout_prob = dropout;
    cfg.seed = seed;
    return cfg;
  }
};

struct FilterFlags {
  std::size_t particles = 10000;
  double view_distance = 2.0;
  std::string inside_weighting = "view_anchored";
  bool occupied_as_outside = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--particles", particles, "particle count")->capture_default_str();
    cmd->add_option("--inside-weighting", inside_weighting,
                    "how inside particles compete with outside ones")
        ->check(CLI::IsMember({"scan", "view_anchored"}))
        ->capture_default_str();
    cmd->add_option("--view-distance", view_distance, "meters between measurement updates")
        ->capture_default_str();
    cmd->add_flag("--occupied-as-outside", occupied_as_outside,
                  "weight poses in known obstacles by p(z | outside) instead of the floor");
  }

  FilterConfig config(std::uint64_t seed) const {
    FilterConfig cfg;
    cfg.particles = particles;
    cfg.view_update_distance = view_distance;
    cfg.inside_weighting = parse_inside_weighting(inside_weighting);
    cfg.floor_occupied = !occupied_as_outside;
    cfg.seed = seed;
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural priors and partial-map localization for the revisiting problem"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string out;

  // simulate
  auto* simulate = app.add_subcommand("simulate", "simulate a trajectory log in a map");
  std::string sim_map, policy = "random_explore", start_text, waypoint_text;
  double length = 50.0;
  WorldFlags sim_world;
  simulate->add_option("--map", sim_map, "world map file")->required();
  simulate->add_option("--policy", policy, "waypoints | wall_follow | random_explore")
      ->capture_default_str();
  simulate->add_option("--length", length, "meters of travel")->capture_default_str();
  simulate->add_option("--start", start_text, "x,y,theta (default: random free pose)");
  simulate->add_option("--waypoints", waypoint_text, "x,y;x,y;... for the waypoints policy");
  simulate->add_option("--seed", seed, "random seed")->capture_default_str();
  simulate->add_option("--out", out, "trajectory log to write")->required();
  sim_world.attach(simulate);

  // carve
  auto* carve = app.add_subcommand("carve", "carve a partial map from a trajectory");
  std::string carve_map, carve_traj;
  WorldFlags carve_world;
  carve->add_option("--map", carve_map, "world map file")->required();
  carve->add_option("--trajectory", carve_traj, "trajectory log")->required();
  carve->add_option("--out", out, "partial map to write")->required();
  carve_world.attach(carve);

  // train-prior
  auto* train = app.add_subcommand("train-prior", "learn a structural prior from environments");
  std::vector<std::string> envs;
  TrainingOptions training;
  WorldFlags train_world;
  train->add_option("--env", envs, "MAP[,TRAJ...]; repeat per environment")->required();
  train->add_option("--trajectories-per-map", training.trajectories_per_map,
                    "simulated trajectories for maps given without logs")
      ->capture_default_str();
  train->add_option("--length", training.trajectory_length, "meters per simulated trajectory")
      ->capture_default_str();
  train->add_option("--max-views", training.max_views, "alphabet size cap including OTHER")
      ->capture_default_str();
  train->add_option("--view-distance", training.view_spacing, "meters between counted views")
      ->capture_default_str();
  train->add_option("--seed", seed, "random seed")->capture_default_str();
  train->add_option("--out", out, "prior file to write")->required();
  train_world.attach(train);

  // localize
  auto* localize = app.add_subcommand("localize", "run the filter and write a step log");
  std::string loc_map, loc_prior, loc_traj, loc_method = "hierarchical_adaptive";
  double env_area = 0.0;
  FilterFlags loc_filter;
  localize->add_option("--map", loc_map, "partial map file")->required();
  localize->add_option("--prior", loc_prior, "prior file")->required();
  localize->add_option("--trajectory", loc_traj, "trajectory log")->required();
  localize->add_option("--method", loc_method, "outside likelihood method")->capture_default_str();
  localize->add_option("--env-area", env_area, "environment area in m^2 (scaled_counts)");
  localize->add_option("--seed", seed, "random seed")->capture_default_str();
  localize->add_option("--out", out, "step log to write")->required();
  loc_filter.attach(localize);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "precision/recall over a manifest of pairs");
  std::string manifest, methods = "all", thresholds;
  FilterFlags eval_filter;
  evaluate->add_option("--manifest", manifest, "manifest file")->required();
  evaluate->add_option("--methods", methods, "comma-separated methods")->capture_default_str();
  evaluate->add_option("--thresholds", thresholds, "comma-separated thresholds in (0,1)");
  evaluate->add_option("--seed", seed, "random seed")->capture_default_str();
  evaluate->add_option("--out", out, "PR table to write")->required();
  eval_filter.attach(evaluate);

  // make-benchmark
  auto* bench = app.add_subcommand("make-benchmark", "build an evaluation benchmark directory");
  std::vector<std::string> eval_maps, train_maps;
  BenchmarkOptions bench_opts;
  WorldFlags bench_world;
  bench->add_option("--eval", eval_maps, "evaluated environment map; repeatable")->required();
  bench->add_option("--train", train_maps, "training-only map; repeatable");
  bench->add_option("--partial-maps", bench_opts.partial_maps_per_env, "partial maps per env")
      ->capture_default_str();
  bench->add_option("--trajectories", bench_opts.trajectories_per_env, "trajectories per env")
      ->capture_default_str();
  bench->add_option("--seed", seed, "random seed")->capture_default_str();
  bench->add_option("--out", out, "output directory")->required();
  bench_world.attach(bench);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      const auto map = load_map_file(sim_map);
      const WorldConfig cfg = sim_world.config(seed);
      Pose start;
      if (start_text.empty()) {
        Rng rng(seed);
        start = random_free_pose(map, cfg, rng);
      } else {
        const auto v = parse_numbers(start_text, ',');
        if (v.size() != 3) throw DomainError("--start needs x,y,theta");
        start = {v[0], v[1], v[2]};
      }
      std::vector<Point> waypoints;
      if (!waypoint_text.empty()) {
        for (auto wp : split_on(waypoint_text, ';')) {
          const auto v = parse_numbers(std::string(wp), ',');
          if (v.size() != 2) throw DomainError("waypoints need x,y");
          waypoints.push_back({v[0], v[1]});
        }
      }
      const auto traj =
          generate_trajectory(map, start, parse_policy(policy), length, cfg, waypoints);
      save_trajectory_file(out, traj);
      if (traj.truncated) {
        std::cerr << "warning: policy stopped after " << traj.true_length() << " m\n";
      }
    } else if (carve->parsed()) {
      const auto map = load_map_file(carve_map);
      const auto traj = load_trajectory_file(carve_traj);
      save_map_file(out, carve_partial_map(map, traj, carve_world.config(seed)));
    } else if (train->parsed()) {
      std::vector<OccupancyGrid> maps;
      std::vector<std::vector<Trajectory>> logs;
      bool any_logs = false;
      for (const auto& env : envs) {
        const auto parts = split_on(env, ',');
        maps.push_back(load_map_file(std::string(parts[0])));
        logs.emplace_back();
        for (std::size_t k = 1; k < parts.size(); ++k) {
          logs.back().push_back(load_trajectory_file(std::string(parts[k])));
          any_logs = true;
        }
      }
      const WorldConfig cfg = train_world.config(seed);
      const auto data = any_logs ? make_training_data(maps, training, cfg, logs)
                                 : make_training_data(maps, training, cfg);
      save_prior_file(out, train_prior(data, training));
    } else if (localize->parsed()) {
      const auto map = load_map_file(loc_map);
      const auto prior = load_prior_file(loc_prior);
      const auto traj = load_trajectory_file(loc_traj);
      const auto parsed = parse_methods(loc_method);
      if (parsed.size() != 1) throw DomainError("localize takes exactly one method");
      std::optional<double> ratio;
      if (env_area > 0.0) ratio = std::min(1.0, map.area(Cell::kFree) / env_area);
      const auto steps = run_localization(map, make_outside_model(parsed.front(), prior, ratio),
                                          prior.views, traj, loc_filter.config(seed));
      write_file(out, format_step_log(steps));
    } else if (evaluate->parsed()) {
      EvalConfig cfg;
      cfg.methods = parse_methods(methods);
      if (!thresholds.empty()) cfg.thresholds = parse_thresholds(thresholds);
      cfg.filter = eval_filter.config(seed);
      const auto entries = load_manifest_file(manifest);
      const auto results = evaluate_manifest(entries, cfg);
      const auto points = precision_recall(results, cfg);
      write_file(out, format_pr_table(points));
    } else if (bench->parsed()) {
      std::vector<NamedMap> evaluated, training_only;
      for (const auto& p : eval_maps) evaluated.push_back({stem(p), load_map_file(p)});
      for (const auto& p : train_maps) training_only.push_back({stem(p), load_map_file(p)});
      bench_opts.world = bench_world.config(seed);
      bench_opts.seed = seed;
      const auto summary = build_benchmark(evaluated, training_only, bench_opts, out);
      std::cout << summary.entries.size() << " pairs written to " << out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
