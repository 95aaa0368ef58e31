#pragma once

// Synthetic indoor worlds: noisy range scans, robot trajectories with
// odometry, partial maps carved from what a robot saw, and training data for
// the structural prior.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "revisit/dirichlet.hpp"
#include "revisit/geometry.hpp"
#include "revisit/motion_model.hpp"
#include "revisit/occupancy_grid.hpp"
#include "revisit/partial_map.hpp"
#include "revisit/prior.hpp"
#include "revisit/square_matrix.hpp"
#include "revisit/trajectory.hpp"
#include "revisit/view_model.hpp"

namespace revisit {

struct WorldConfig {
  std::size_t beam_count = 181;
  double fov = kPi;
  double max_range = 8.0;
  double range_noise_sigma = 0.02;
  double dropout_prob = 0.01;
  MotionNoise odometry;
  std::uint64_t seed = 0;

  // Motion policy geometry.
  double step_length = 0.25;              // m per record, upper bound
  double max_turn_per_step = deg2rad(30);  // larger turns happen in place
  double robot_radius = 0.3;              // clearance kept from non-FREE cells

  void validate() const;
  std::vector<double> bearings() const;
  ScanGeometry geometry() const { return {bearings(), max_range}; }
};

enum class Policy { kWaypoints, kWallFollow, kRandomExplore };

Policy parse_policy(std::string_view name);
std::string policy_name(Policy policy);

// Parses a map file. Same as load_map from the grid module.
OccupancyGrid load_world(std::string_view text);

// Ray-cast truth plus Gaussian range noise clamped to (0, max_range]; each
// beam independently drops out to max_range. Throws DomainError for a pose in
// an OCCUPIED cell or off the grid.
RangeScan simulate_scan(const OccupancyGrid& map, const Pose& pose, const WorldConfig& cfg,
                        Rng& rng);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Drives a simulated robot from `start` for `length` meters of true travel.
// kWaypoints visits `waypoints` in order; kRandomExplore picks random
// reachable goals; kWallFollow keeps a wall on its right. Throws DomainError
// when the start is not in a FREE cell. A policy that cannot continue ends the
// trajectory early with `truncated` set.
Trajectory generate_trajectory(const OccupancyGrid& map, const Pose& start, Policy policy,
                               double length, const WorldConfig& cfg,
                               std::span<const Point> waypoints = {});

// Everything a robot following `trajectory` would have seen: all cells
// UNKNOWN except those crossed by noise-free rays (FREE) and the obstacles
// that stopped them (OCCUPIED).
OccupancyGrid carve_partial_map(const OccupancyGrid& map, const Trajectory& trajectory,
                                const WorldConfig& cfg);

// Indices of records at least `spacing` meters of true travel apart,
// starting with the first record.
std::vector<std::size_t> subsample_by_distance(const Trajectory& trajectory, double spacing);

// A uniformly drawn pose in a FREE cell with clearance `robot_radius`.
Pose random_free_pose(const OccupancyGrid& map, const WorldConfig& cfg, Rng& rng);

struct TrainingOptions {
  std::size_t trajectories_per_map = 4;
  double trajectory_length = 150.0;
  Policy policy = Policy::kRandomExplore;
  double view_spacing = 2.0;
  std::size_t max_views = 40;
  ExtractionParams extraction;
  MapEstimateOptions fit;
};

struct TrainingData {
  ViewAlphabet alphabet;
  TrainingDataset dataset;                            // transition counts per map
  std::vector<std::vector<LabeledView>> confusion;     // (true, observed) per map
  std::vector<double> marginals;                      // relative view frequencies
  std::vector<SquareMatrix<double>> reference_transitions;  // q_l, column j = p(. | j)
};

// Simulates `options.trajectories_per_map` trajectories per map, or uses the
// supplied ones (trajectories[l] belongs to maps[l]) when present.
TrainingData make_training_data(std::span<const OccupancyGrid> maps, const TrainingOptions& options,
                                const WorldConfig& cfg,
                                std::span<const std::vector<Trajectory>> trajectories = {});

// Observation model, MAP hyperparameters and marginals from training data.
StructurePrior train_prior(const TrainingData& data, const TrainingOptions& options);

}  // namespace revisit
