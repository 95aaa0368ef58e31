#include "revisit/benchmark_suite.hpp"

#include <filesystem>

#include "revisit/errors.hpp"
#include "revisit/text_format.hpp"

namespace revisit {

namespace {

double draw_length(Rng& rng, double lo, double hi) {
  if (hi <= lo) return lo;
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}

}  // namespace

BenchmarkSummary build_benchmark(const std::vector<NamedMap>& evaluated,
                                 const std::vector<NamedMap>& training_only,
                                 const BenchmarkOptions& options, const std::string& out_dir) {
  namespace fs = std::filesystem;
  if (evaluated.empty()) {
    throw DomainError("benchmark needs at least one evaluated environment");
  }
  if (evaluated.size() + training_only.size() < 2) {
    throw DomainError("leave-one-out priors need at least two environments");
  }
  options.world.validate();
  fs::create_directories(fs::path(out_dir) / "maps");
  fs::create_directories(fs::path(out_dir) / "trajectories");
  fs::create_directories(fs::path(out_dir) / "priors");

  BenchmarkSummary summary;
  const auto write = [&](const std::string& rel, const std::string& contents) {
    write_file((fs::path(out_dir) / rel).string(), contents);
    summary.files.push_back(rel);
  };

  Rng rng(options.seed);
  for (std::size_t e = 0; e < evaluated.size(); ++e) {
    const auto& env = evaluated[e];

    std::vector<OccupancyGrid> train_maps;
    for (std::size_t o = 0; o < evaluated.size(); ++o) {
      if (o != e) train_maps.push_back(evaluated[o].map);
    }
    for (const auto& t : training_only) train_maps.push_back(t.map);
    WorldConfig train_world = options.world;
    train_world.seed = options.seed * 7777ULL + e;
    const TrainingData data = make_training_data(train_maps, options.training, train_world);
    const StructurePrior prior = train_prior(data, options.training);
    const std::string prior_rel = "priors/without_" + env.id + ".prior";
    write(prior_rel, save_prior(prior));

    std::vector<std::string> partial_rels;
    for (std::size_t k = 0; k < options.partial_maps_per_env; ++k) {
      WorldConfig world = options.world;
      world.seed = rng();
      Rng start_rng(world.seed);
      const Pose start = random_free_pose(env.map, world, start_rng);
      const double length =
          draw_length(rng, options.partial_min_length, options.partial_max_length);
      const Trajectory explore =
          generate_trajectory(env.map, start, Policy::kRandomExplore, length, world);
      const OccupancyGrid partial = carve_partial_map(env.map, explore, world);
      const std::string rel = "maps/" + env.id + "_partial" + std::to_string(k) + ".map";
      write(rel, save_map(partial));
      partial_rels.push_back(rel);
    }

    std::vector<std::string> trajectory_rels;
    for (std::size_t t = 0; t < options.trajectories_per_env; ++t) {
      WorldConfig world = options.world;
      world.seed = rng();
      Rng start_rng(world.seed);
      const Pose start = random_free_pose(env.map, world, start_rng);
      const double length =
          draw_length(rng, options.trajectory_min_length, options.trajectory_max_length);
      const Trajectory traj =
          generate_trajectory(env.map, start, Policy::kRandomExplore, length, world);
      const std::string rel = "trajectories/" + env.id + "_run" + std::to_string(t) + ".traj";
      write(rel, save_trajectory(traj));
      trajectory_rels.push_back(rel);
    }

    const double area = env.map.area(Cell::kFree);
    for (const auto& p : partial_rels) {
      for (const auto& t : trajectory_rels) {
        summary.entries.push_back({p, t, env.id, prior_rel, Pose{0.0, 0.0, 0.0}, area});
      }
    }
  }
  write("manifest.txt", save_manifest(summary.entries));
  return summary;
}

}  // namespace revisit
