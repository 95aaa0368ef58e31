#pragma once

// Sequential importance sampling with resampling over robot poses relative to
// a partial map. Particles inside the map are weighted by the raw scan;
// particles outside it share the structural model's p(z | outside).

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "revisit/geometry.hpp"
#include "revisit/motion_model.hpp"
#include "revisit/occupancy_grid.hpp"
#include "revisit/partial_map.hpp"
#include "revisit/prior.hpp"
#include "revisit/structure_hmm.hpp"
#include "revisit/trajectory.hpp"

namespace revisit {

struct Particle {
  Pose pose;
  double weight = 0.0;
  bool inside = false;
};

struct ParticleSet {
  std::vector<Particle> particles;
  double distance_since_update = 0.0;
  Rng rng;
  std::normal_distribution<double> normal{0.0, 1.0};

  std::size_t size() const noexcept { return particles.size(); }
  double inside_mass() const;
  double weight_sum() const;
  double effective_sample_size() const;
};

struct Hypothesis {
  Pose pose;
  double probability = 0.0;
};

// p(z | outside) source: the structural model, or a fixed constant.
class OutsideModel {
 public:
  static OutsideModel structural(StructureState state);
  static OutsideModel fixed(double likelihood);

  // Consumes one observed view and returns the outside likelihood for it.
  double step(ViewId z);

  std::string name() const;
  const StructureState* structure() const noexcept { return std::get_if<StructureState>(&model_); }

 private:
  explicit OutsideModel(std::variant<StructureState, double> model) : model_(std::move(model)) {}
  std::variant<StructureState, double> model_;
};

// How inside particles are scored against the outside hypothesis.
//  kScan: the tempered scan likelihood alone.
//  kViewAnchored: the inside mass moves by p(z | expected view), as outside
//    particles do by p(z | outside); the raw scan only redistributes that
//    mass among the inside particles.
enum class InsideWeighting { kScan, kViewAnchored };

InsideWeighting parse_inside_weighting(const std::string& text);
std::string inside_weighting_name(InsideWeighting weighting);

struct FilterConfig {
  std::size_t particles = 10000;
  InsideWeighting inside_weighting = InsideWeighting::kViewAnchored;
  std::size_t heading_bins = 36;  // expected-view cache resolution
  double view_update_distance = 2.0;  // m travelled between measurement updates
  MotionNoise motion;
  ScanLikelihoodParams scan;
  double hypothesis_radius = 2.0;
  double hypothesis_angle = deg2rad(30.0);
  double outside_extent_factor = 3.0;  // outside region relative to the known map extent
  double outside_weight_floor = 1e-12;
  // Poses inside known obstacles get the floor weight instead of p(z | outside).
  bool floor_occupied = true;
  std::uint64_t seed = 0;

  void validate() const;
};

// N poses uniform over FREE cells (uniform heading), equal weights.
ParticleSet init_filter(const OccupancyGrid& map, std::size_t n, std::uint64_t seed);

// Replaces every pose with sampler(pose, set) and leaves weights untouched.
void propagate(ParticleSet& set, const std::function<Pose(const Pose&, ParticleSet&)>& sampler);

void refresh_inside(ParticleSet& set, const std::function<bool(const Pose&)>& inside);

void motion_update(ParticleSet& set, const OdometryDelta& odometry, const MotionNoise& noise,
                   const OccupancyGrid& map);

// w_i <- w_i * exp(log_factors[i]), renormalized with a max shift in log
// space. Throws FilterDivergence when no weight survives.
void reweight(ParticleSet& set, std::span<const double> log_factors);

// Expected views at cell centers and binned headings, computed on demand.
class ExpectedViewCache {
 public:
  ExpectedViewCache(const OccupancyGrid& map, const ViewModel& views, ScanGeometry geometry,
                    std::size_t heading_bins = 36);

  // Pose must be inside the map.
  ViewId at(const Pose& pose);
  std::size_t computed() const noexcept { return computed_; }
  const ScanGeometry& geometry() const noexcept { return geometry_; }
  const OccupancyGrid& map() const noexcept { return *map_; }

 private:
  const OccupancyGrid* map_;
  const ViewModel* views_;
  ScanGeometry geometry_;
  std::size_t bins_;
  std::vector<std::int32_t> slots_;  // -1 until computed
  std::size_t computed_ = 0;
};

// log p(z | expected view at pose), for inside particles only.
using ViewLogLikelihood = std::function<double(const Pose&)>;

struct MeasurementOutcome {
  double outside_likelihood = 0.0;
  double inside_mass = 0.0;
};

// Steps the outside model once with z, weights inside particles by the scan
// likelihood and outside particles by p(z | outside) (or the floor when
// beyond `outside_region`), renormalizes and resets the travelled distance.
// With `view_log_likelihood`, inside factors are rescaled by one common
// constant so that the inside mass changes as under the view likelihoods;
// the constant is skipped when no particle is outside. Given `obstacles`,
// outside particles on its OCCUPIED cells also get the floor.
MeasurementOutcome measurement_update(ParticleSet& set, const RangeScan& scan, ViewId z,
                                      OutsideModel& outside, const LikelihoodField& field,
                                      const std::optional<Extent>& outside_region,
                                      double outside_floor = 1e-12,
                                      const ViewLogLikelihood& view_log_likelihood = {},
                                      const OccupancyGrid* obstacles = nullptr);

// Systematic resampling: N indices from offset u0 in [0, 1/N).
std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::size_t n,
                                             double u0);

// Resamples when 1/sum(w^2) < N/2. Returns whether it did.
bool resample_if_needed(ParticleSet& set);

// Highest-weight inside particle, with the total weight of all particles
// within `radius` and `angle` of it. nullopt when no particle is inside.
std::optional<Hypothesis> best_hypothesis(const ParticleSet& set, double radius = 2.0,
                                          double angle = deg2rad(30.0));

// Outside region: the known extent of the map scaled about its center.
std::optional<Extent> outside_region(const OccupancyGrid& map, double factor);

struct StepRecord {
  std::size_t step = 0;          // measurement update index
  std::size_t record = 0;        // trajectory record that triggered it
  double distance = 0.0;         // cumulative odometry distance
  std::optional<Hypothesis> hypothesis;
  double inside_mass = 0.0;
  double log_outside_likelihood = 0.0;
  ViewId observed_view;
};

class LocalizationFilter {
 public:
  // `shared_cache`, when given, must be built over the same map and view
  // model; it lets several runs on one partial map reuse expected views.
  LocalizationFilter(const OccupancyGrid& map, OutsideModel outside, ViewModel views,
                     const FilterConfig& config, ExpectedViewCache* shared_cache = nullptr);

  LocalizationFilter(const LocalizationFilter&) = delete;
  LocalizationFilter& operator=(const LocalizationFilter&) = delete;

  // Feeds one odometry increment and scan. Returns a log row when the
  // travelled distance triggered a measurement update.
  std::optional<StepRecord> process(const OdometryDelta& odometry, const RangeScan& scan);

  const ParticleSet& particles() const noexcept { return set_; }
  const OutsideModel& outside() const noexcept { return outside_; }

 private:
  const OccupancyGrid* map_;
  FilterConfig config_;
  LikelihoodField field_;
  std::optional<Extent> region_;
  OutsideModel outside_;
  ViewModel views_;
  std::optional<ExpectedViewCache> own_cache_;
  ExpectedViewCache* cache_ = nullptr;
  ParticleSet set_;
  std::size_t records_ = 0;
  std::size_t steps_ = 0;
  double distance_ = 0.0;
};

std::vector<StepRecord> run_localization(const OccupancyGrid& map, OutsideModel outside,
                                         const ViewModel& views, const Trajectory& trajectory,
                                         const FilterConfig& config,
                                         ExpectedViewCache* shared_cache = nullptr);

// Delimited step log: step,distance,x,y,theta,probability,inside_mass,log_l_out
std::string format_step_log(std::span<const StepRecord> steps);

}  // namespace revisit
