#include "revisit/localization_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "revisit/errors.hpp"
#include "revisit/text_format.hpp"

namespace revisit {

double ParticleSet::inside_mass() const {
  double mass = 0.0;
  for (const auto& p : particles) {
    if (p.inside) {
      mass += p.weight;
    }
  }
  return mass;
}

double ParticleSet::weight_sum() const {
  double sum = 0.0;
  for (const auto& p : particles) {
    sum += p.weight;
  }
  return sum;
}

double ParticleSet::effective_sample_size() const {
  double sq = 0.0;
  for (const auto& p : particles) {
    sq += p.weight * p.weight;
  }
  return sq > 0.0 ? 1.0 / sq : 0.0;
}

OutsideModel OutsideModel::structural(StructureState state) {
  return OutsideModel(std::variant<StructureState, double>(std::move(state)));
}

OutsideModel OutsideModel::fixed(double likelihood) {
  if (!(likelihood > 0.0) || !std::isfinite(likelihood)) {
    throw DomainError("fixed outside likelihood must be positive and finite");
  }
  return OutsideModel(std::variant<StructureState, double>(likelihood));
}

double OutsideModel::step(ViewId z) {
  if (auto* state = std::get_if<StructureState>(&model_)) {
    return state->step(z);
  }
  return std::get<double>(model_);
}

std::string OutsideModel::name() const {
  if (const auto* state = std::get_if<StructureState>(&model_)) {
    return state->mode().name();
  }
  return "fixed(" + format_double(std::get<double>(model_)) + ")";
}

InsideWeighting parse_inside_weighting(const std::string& text) {
  if (text == "scan") {
    return InsideWeighting::kScan;
  }
  if (text == "view_anchored") {
    return InsideWeighting::kViewAnchored;
  }
  throw DomainError("unknown inside weighting '" + text + "' (expected scan or view_anchored)");
}

std::string inside_weighting_name(InsideWeighting weighting) {
  return weighting == InsideWeighting::kScan ? "scan" : "view_anchored";
}

void FilterConfig::validate() const {
  if (particles == 0) {
    throw DomainError("filter needs at least one particle");
  }
  if (heading_bins == 0) {
    throw DomainError("expected-view cache needs at least one heading bin");
  }
  if (!(view_update_distance >= 0.0)) {
    throw DomainError("view update distance must be non-negative");
  }
  if (!(hypothesis_radius > 0.0) || !(hypothesis_angle > 0.0)) {
    throw DomainError("hypothesis neighborhood must be positive");
  }
  if (!(outside_extent_factor > 0.0)) {
    throw DomainError("outside extent factor must be positive");
  }
  if (!(outside_weight_floor > 0.0)) {
    throw DomainError("outside weight floor must be positive");
  }
  motion.validate();
  scan.validate();
}

ParticleSet init_filter(const OccupancyGrid& map, std::size_t n, std::uint64_t seed) {
  if (n == 0) {
    throw DomainError("filter needs at least one particle");
  }
  std::vector<CellIndex> free_cells;
  for (std::size_t row = 0; row < map.height(); ++row) {
    for (std::size_t col = 0; col < map.width(); ++col) {
      if (map.at(static_cast<long>(col), static_cast<long>(row)) == Cell::kFree) {
        free_cells.push_back({static_cast<long>(col), static_cast<long>(row)});
      }
    }
  }
  if (free_cells.empty()) {
    throw DomainError("map has no FREE cell to initialize particles in");
  }

  ParticleSet set;
  set.rng.seed(seed);
  set.particles.reserve(n);
  std::uniform_int_distribution<std::size_t> pick(0, free_cells.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double res = map.resolution();
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const CellIndex c = free_cells[pick(set.rng)];
    Pose pose;
    pose.x = map.origin_x() + (static_cast<double>(c.col) + unit(set.rng)) * res;
    pose.y = map.origin_y() + (static_cast<double>(c.row) + unit(set.rng)) * res;
    pose.theta = normalize_angle(-kPi + 2.0 * kPi * unit(set.rng));
    // Rounding at the cell's upper edge can land in the neighbour.
    const bool inside = is_inside(map, pose);
    if (!inside) {
      pose.x = map.center_x(c.col);
      pose.y = map.center_y(c.row);
    }
    set.particles.push_back({pose, w, true});
  }
  return set;
}

void propagate(ParticleSet& set, const std::function<Pose(const Pose&, ParticleSet&)>& sampler) {
  for (auto& p : set.particles) {
    p.pose = sampler(p.pose, set);
  }
}

void refresh_inside(ParticleSet& set, const std::function<bool(const Pose&)>& inside) {
  for (auto& p : set.particles) {
    p.inside = inside(p.pose);
  }
}

void motion_update(ParticleSet& set, const OdometryDelta& odometry, const MotionNoise& noise,
                   const OccupancyGrid& map) {
  for (auto& p : set.particles) {
    const OdometryDelta noisy = sample_odometry(odometry, noise, set.rng, set.normal);
    p.pose = apply_odometry(p.pose, noisy);
    p.inside = is_inside(map, p.pose);
  }
  set.distance_since_update += std::abs(odometry.d_trans);
}

void reweight(ParticleSet& set, std::span<const double> log_factors) {
  if (log_factors.size() != set.particles.size()) {
    throw DomainError("one log factor per particle required");
  }
  const std::size_t n = set.particles.size();
  std::vector<double> lw(n);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    lw[k] = std::log(set.particles[k].weight) + log_factors[k];
    if (std::isnan(lw[k])) {
      throw FilterDivergence("particle log weight is NaN");
    }
    top = std::max(top, lw[k]);
  }
  if (!std::isfinite(top)) {
    throw FilterDivergence("all particle weights vanished");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    lw[k] = std::exp(lw[k] - top);
    sum += lw[k];
  }
  for (std::size_t k = 0; k < n; ++k) {
    set.particles[k].weight = lw[k] / sum;
  }
}

ExpectedViewCache::ExpectedViewCache(const OccupancyGrid& map, const ViewModel& views,
                                     ScanGeometry geometry, std::size_t heading_bins)
    : map_(&map),
      views_(&views),
      geometry_(std::move(geometry)),
      bins_(heading_bins),
      slots_(map.width() * map.height() * heading_bins, -1) {
  if (heading_bins == 0) {
    throw DomainError("expected-view cache needs at least one heading bin");
  }
}

ViewId ExpectedViewCache::at(const Pose& pose) {
  const auto cell = map_->cell_of(pose.x, pose.y);
  if (!cell || map_->at(cell->col, cell->row) != Cell::kFree) {
    throw DomainError("expected view requested for a pose outside the map");
  }
  const double width = 2.0 * kPi / static_cast<double>(bins_);
  auto bin = static_cast<std::size_t>(std::floor((normalize_angle(pose.theta) + kPi) / width));
  bin %= bins_;
  std::int32_t& slot = slots_[map_->flat(cell->col, cell->row) * bins_ + bin];
  if (slot < 0) {
    const Pose center{map_->center_x(cell->col), map_->center_y(cell->row),
                      normalize_angle(-kPi + (static_cast<double>(bin) + 0.5) * width)};
    slot = static_cast<std::int32_t>(
        expected_view(*map_, center, views_->alphabet, views_->extraction, geometry_).index);
    ++computed_;
  }
  return ViewId{static_cast<std::size_t>(slot)};
}

namespace {

double log_sum_exp(const std::vector<double>& values) {
  double top = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    top = std::max(top, v);
  }
  if (!std::isfinite(top)) {
    return top;
  }
  double sum = 0.0;
  for (double v : values) {
    sum += std::exp(v - top);
  }
  return top + std::log(sum);
}

}  // namespace

MeasurementOutcome measurement_update(ParticleSet& set, const RangeScan& scan, ViewId z,
                                      OutsideModel& outside, const LikelihoodField& field,
                                      const std::optional<Extent>& outside_region,
                                      double outside_floor,
                                      const ViewLogLikelihood& view_log_likelihood,
                                      const OccupancyGrid* obstacles) {
  const auto blocked = [obstacles](const Pose& pose) {
    if (obstacles == nullptr) {
      return false;
    }
    const auto cell = obstacles->cell_of(pose.x, pose.y);
    return cell && obstacles->at(cell->col, cell->row) == Cell::kOccupied;
  };
  const double l_out = outside.step(z);
  const double log_out = std::log(l_out);
  const double log_floor = std::log(outside_floor);
  const ScanEvaluator evaluator(field, scan);

  std::vector<double> factors(set.particles.size());
  bool any_outside = false;
  for (std::size_t k = 0; k < set.particles.size(); ++k) {
    const Particle& p = set.particles[k];
    if (p.inside) {
      factors[k] = evaluator.log_likelihood(p.pose);
    } else if ((outside_region && !outside_region->contains(p.pose.x, p.pose.y)) ||
               blocked(p.pose)) {
      factors[k] = log_floor;
      any_outside = true;
    } else {
      factors[k] = log_out;
      any_outside = true;
    }
  }

  if (view_log_likelihood && any_outside) {
    std::vector<double> by_view;
    std::vector<double> by_scan;
    for (std::size_t k = 0; k < set.particles.size(); ++k) {
      const Particle& p = set.particles[k];
      if (p.inside) {
        const double log_w = std::log(p.weight);
        by_view.push_back(log_w + view_log_likelihood(p.pose));
        by_scan.push_back(log_w + factors[k]);
      }
    }
    const double view_mass = log_sum_exp(by_view);
    const double scan_mass = log_sum_exp(by_scan);
    if (std::isfinite(scan_mass)) {
      const double shift = view_mass - scan_mass;
      for (std::size_t k = 0; k < set.particles.size(); ++k) {
        if (set.particles[k].inside) {
          factors[k] += shift;
        }
      }
    }
  }
  reweight(set, factors);
  set.distance_since_update = 0.0;
  return {l_out, set.inside_mass()};
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::size_t n,
                                             double u0) {
  std::vector<std::size_t> picks;
  picks.reserve(n);
  if (weights.empty() || n == 0) {
    return picks;
  }
  double total = 0.0;
  for (double w : weights) {
    total += w;
  }
  const double step = total / static_cast<double>(n);
  double cumulative = weights[0];
  std::size_t i = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double u = (u0 + static_cast<double>(k)) * step;
    while (u >= cumulative && i + 1 < weights.size()) {
      ++i;
      cumulative += weights[i];
    }
    picks.push_back(i);
  }
  return picks;
}

bool resample_if_needed(ParticleSet& set) {
  const std::size_t n = set.particles.size();
  if (set.effective_sample_size() >= static_cast<double>(n) / 2.0) {
    return false;
  }
  std::vector<double> weights(n);
  for (std::size_t k = 0; k < n; ++k) {
    weights[k] = set.particles[k].weight;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u0 = unit(set.rng);
  const auto picks = systematic_resample(weights, n, u0);
  std::vector<Particle> next;
  next.reserve(n);
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t k : picks) {
    Particle p = set.particles[k];
    p.weight = w;
    next.push_back(p);
  }
  set.particles = std::move(next);
  return true;
}

std::optional<Hypothesis> best_hypothesis(const ParticleSet& set, double radius, double angle) {
  const Particle* anchor = nullptr;
  for (const auto& p : set.particles) {
    if (p.inside && (anchor == nullptr || p.weight > anchor->weight)) {
      anchor = &p;
    }
  }
  if (anchor == nullptr) {
    return std::nullopt;
  }
  double mass = 0.0;
  for (const auto& p : set.particles) {
    if (planar_distance(p.pose, anchor->pose) <= radius &&
        angle_distance(p.pose.theta, anchor->pose.theta) <= angle) {
      mass += p.weight;
    }
  }
  return Hypothesis{anchor->pose, std::min(mass, 1.0)};
}

std::optional<Extent> outside_region(const OccupancyGrid& map, double factor) {
  const auto known = map.known_extent();
  if (!known) {
    return std::nullopt;
  }
  const double cx = 0.5 * (known->min_x + known->max_x);
  const double cy = 0.5 * (known->min_y + known->max_y);
  const double hw = 0.5 * factor * known->width();
  const double hh = 0.5 * factor * known->height();
  return Extent{cx - hw, cy - hh, cx + hw, cy + hh};
}

LocalizationFilter::LocalizationFilter(const OccupancyGrid& map, OutsideModel outside,
                                       ViewModel views, const FilterConfig& config,
                                       ExpectedViewCache* shared_cache)
    : map_(&map),
      config_(config),
      field_(map, config.scan),
      region_(outside_region(map, config.outside_extent_factor)),
      outside_(std::move(outside)),
      views_(std::move(views)),
      cache_(shared_cache) {
  config_.validate();
  if (cache_ && &cache_->map() != map_) {
    throw DomainError("shared expected-view cache belongs to a different map");
  }
  if (const auto* state = outside_.structure(); state && state->size() != views_.size()) {
    throw DomainError("structural model and view alphabet disagree on the number of views");
  }
  set_ = init_filter(map, config_.particles, config_.seed);
  // The first record always gets a measurement update.
  set_.distance_since_update = config_.view_update_distance;
}

std::optional<StepRecord> LocalizationFilter::process(const OdometryDelta& odometry,
                                                      const RangeScan& scan) {
  const std::size_t record = records_++;
  distance_ += std::abs(odometry.d_trans);
  motion_update(set_, odometry, config_.motion, *map_);
  if (set_.distance_since_update < config_.view_update_distance) {
    return std::nullopt;
  }

  StepRecord out;
  out.step = steps_++;
  out.record = record;
  out.distance = distance_;
  out.observed_view = views_.classify(scan);
  ViewLogLikelihood view_term;
  if (config_.inside_weighting == InsideWeighting::kViewAnchored) {
    if (!cache_) {
      own_cache_.emplace(*map_, views_, ScanGeometry{scan.angles, scan.max_range},
                         config_.heading_bins);
      cache_ = &*own_cache_;
    } else if (cache_->geometry().bearings != scan.angles ||
               cache_->geometry().max_range != scan.max_range) {
      throw DomainError("scan geometry differs from the expected-view cache");
    }
    view_term = [this, z = out.observed_view](const Pose& pose) {
      return std::log(views_.observation.likelihood(z, cache_->at(pose)));
    };
  }
  const MeasurementOutcome outcome =
      measurement_update(set_, scan, out.observed_view, outside_, field_, region_,
                         config_.outside_weight_floor, view_term,
                         config_.floor_occupied ? map_ : nullptr);
  out.inside_mass = outcome.inside_mass;
  out.log_outside_likelihood = std::log(outcome.outside_likelihood);
  out.hypothesis = best_hypothesis(set_, config_.hypothesis_radius, config_.hypothesis_angle);
  resample_if_needed(set_);
  return out;
}

std::vector<StepRecord> run_localization(const OccupancyGrid& map, OutsideModel outside,
                                         const ViewModel& views, const Trajectory& trajectory,
                                         const FilterConfig& config,
                                         ExpectedViewCache* shared_cache) {
  LocalizationFilter filter(map, std::move(outside), views, config, shared_cache);
  std::vector<StepRecord> steps;
  for (const auto& rec : trajectory.records) {
    if (auto step = filter.process(rec.odometry, rec.scan)) {
      steps.push_back(std::move(*step));
    }
  }
  return steps;
}

std::string format_step_log(std::span<const StepRecord> steps) {
  std::ostringstream out;
  out << "step,distance,x,y,theta,probability,inside_mass,log_l_out\n";
  for (const auto& s : steps) {
    out << s.step << ',' << format_double(s.distance) << ',';
    if (s.hypothesis) {
      out << format_double(s.hypothesis->pose.x) << ',' << format_double(s.hypothesis->pose.y)
          << ',' << format_double(s.hypothesis->pose.theta) << ','
          << format_double(s.hypothesis->probability);
    } else {
      out << "NONE,NONE,NONE,0";
    }
    out << ',' << format_double(s.inside_mass) << ',' << format_double(s.log_outside_likelihood)
        << '\n';
  }
  return out.str();
}

}  // namespace revisit
