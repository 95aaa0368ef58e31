#pragma once

// Geometry against a (partial) occupancy grid: inside/outside membership, ray
// casting, the expected view at a pose and the likelihood-field scan model
// used to weight particles inside the map.

#include <functional>
#include <span>
#include <vector>

#include "revisit/geometry.hpp"
#include "revisit/occupancy_grid.hpp"
#include "revisit/view_model.hpp"

namespace revisit {

// True iff the cell containing (x, y) exists and is FREE.
bool is_inside(const OccupancyGrid& map, const Pose& pose);

struct RayHit {
  double range = 0.0;
  bool through_unknown = false;  // crossed an UNKNOWN cell before terminating
  bool hit = false;              // ended on an OCCUPIED cell within range
};

// Walks the cells pierced by a ray from (x, y) along `angle`, nearest first,
// calling visit(cell, entry_distance). Stops after an OCCUPIED cell, when the
// ray leaves the grid, when entry_distance reaches max_range or when visit
// returns false. Returns the hit description.
RayHit trace_ray(const OccupancyGrid& map, double x, double y, double angle, double max_range,
                 const std::function<bool(const CellIndex&, double)>& visit = {});

// Distance to the first OCCUPIED cell per bearing, else max_range. UNKNOWN
// cells are transparent. Throws DomainError for an off-grid pose.
RangeScan raycast(const OccupancyGrid& map, const Pose& pose, std::span<const double> bearings,
                  double max_range);
std::vector<RayHit> raycast_detailed(const OccupancyGrid& map, const Pose& pose,
                                     std::span<const double> bearings, double max_range);

struct ScanGeometry {
  std::vector<double> bearings = uniform_bearings(181, kPi);
  double max_range = 8.0;
};

// View a robot at `pose` would extract from the map. Beams that cross
// unexplored space read max range. Throws DomainError when the pose is not
// inside the map.
ViewId expected_view(const OccupancyGrid& map, const Pose& pose, const ViewAlphabet& alphabet,
                     const ExtractionParams& params, const ScanGeometry& geometry = {});
ScanString expected_scan_string(const OccupancyGrid& map, const Pose& pose,
                                const ExtractionParams& params, const ScanGeometry& geometry = {});

struct ScanLikelihoodParams {
  double sigma_hit = 0.2;
  double z_hit = 0.9;
  double z_rand = 0.1;
  std::size_t beam_stride = 10;
  double likelihood_exponent = 0.3;

  void validate() const;
};

// Per-cell log of the likelihood-field beam model
// z_hit * exp(-d^2 / (2 sigma^2)) + z_rand, where d is the distance from the
// cell center to the nearest exposed OCCUPIED cell center (one with a
// 4-neighbour that is not OCCUPIED).
class LikelihoodField {
 public:
  LikelihoodField(const OccupancyGrid& map, const ScanLikelihoodParams& params);

  const OccupancyGrid& map() const noexcept { return *map_; }
  const ScanLikelihoodParams& params() const noexcept { return params_; }

  // Distance to the nearest obstacle (meters); +inf off-grid or with no obstacles.
  double distance_at(double x, double y) const;
  // log p for one beam endpoint at (x, y); log(z_rand) off-grid.
  double log_beam(double x, double y) const;

 private:
  const OccupancyGrid* map_;
  ScanLikelihoodParams params_;
  std::vector<double> distance_;
  std::vector<double> log_beam_;
  double log_floor_;
};

// A scan reduced to the strided beams that returned an echo, ready to be
// scored against many poses.
class ScanEvaluator {
 public:
  ScanEvaluator(const LikelihoodField& field, const RangeScan& scan);

  // exponent * sum over evaluated beams of log p(endpoint).
  double log_likelihood(const Pose& pose) const;
  std::size_t beam_count() const noexcept { return ranges_.size(); }

 private:
  const LikelihoodField* field_;
  std::vector<double> ranges_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

double log_scan_likelihood(const LikelihoodField& field, const Pose& pose, const RangeScan& scan);
double scan_likelihood(const LikelihoodField& field, const Pose& pose, const RangeScan& scan);
// Convenience form that builds the likelihood field on the fly.
double scan_likelihood(const OccupancyGrid& map, const Pose& pose, const RangeScan& scan,
                       const ScanLikelihoodParams& params);

// Exact Euclidean distance (in cells) from every cell to the nearest cell for
// which `is_obstacle` holds; +inf when there is none.
std::vector<double> distance_transform(const OccupancyGrid& map,
                                       const std::function<bool(Cell)>& is_obstacle);

}  // namespace revisit
