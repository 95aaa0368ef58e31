#pragma once

// Builds an evaluation benchmark on disk: partial maps carved from one
// robot's exploration, independent trajectories of a second robot,
// leave-one-environment-out priors and the manifest tying them together.

#include <cstdint>
#include <string>
#include <vector>

#include "revisit/model_io.hpp"
#include "revisit/occupancy_grid.hpp"
#include "revisit/sim_world.hpp"

namespace revisit {

struct NamedMap {
  std::string id;
  OccupancyGrid map;
};

struct BenchmarkOptions {
  std::size_t partial_maps_per_env = 5;
  double partial_min_length = 40.0;  // m of exploration behind each partial map
  double partial_max_length = 60.0;
  std::size_t trajectories_per_env = 4;
  double trajectory_min_length = 80.0;
  double trajectory_max_length = 100.0;
  WorldConfig world;
  TrainingOptions training;
  std::uint64_t seed = 1;
};

struct BenchmarkSummary {
  std::vector<ManifestEntry> entries;  // paths relative to the output directory
  std::vector<std::string> files;      // everything written, relative to the output directory
};

// `evaluated` environments get partial maps, trajectories and a prior trained
// on every other map (evaluated or `training_only`). Writes into `out_dir`,
// creating it if needed, with the manifest at out_dir/manifest.txt.
BenchmarkSummary build_benchmark(const std::vector<NamedMap>& evaluated,
                                 const std::vector<NamedMap>& training_only,
                                 const BenchmarkOptions& options, const std::string& out_dir);

}  // namespace revisit
