#pragma once

// Text formats for view models, structural priors, trajectory logs and
// evaluation manifests. Doubles are written in shortest round-trip form, so
// load(save(x)) == x bit for bit.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "revisit/geometry.hpp"
#include "revisit/prior.hpp"
#include "revisit/trajectory.hpp"

namespace revisit {

std::string save_view_model(const ViewModel& model);
ViewModel load_view_model(std::string_view text);

std::string save_prior(const StructurePrior& prior);
StructurePrior load_prior(std::string_view text);

std::string save_trajectory(const Trajectory& trajectory);
Trajectory load_trajectory(std::string_view text);

StructurePrior load_prior_file(const std::string& path);
void save_prior_file(const std::string& path, const StructurePrior& prior);
Trajectory load_trajectory_file(const std::string& path);
void save_trajectory_file(const std::string& path, const Trajectory& trajectory);

struct ManifestEntry {
  std::string partial_map;  // resolved against the manifest's directory
  std::string trajectory;
  std::string environment;
  std::string prior;
  Pose offset;                     // world frame expressed in the partial map's frame
  std::optional<double> env_area;  // m^2, for scaled_counts
};

// One `pair` line per entry; `#` starts a comment.
std::vector<ManifestEntry> load_manifest(std::string_view text, const std::string& base_dir = "");
std::vector<ManifestEntry> load_manifest_file(const std::string& path);
std::string save_manifest(const std::vector<ManifestEntry>& entries);

}  // namespace revisit
