#include "revisit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>

#include "revisit/errors.hpp"
#include "revisit/text_format.hpp"

namespace revisit {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

void append_unique(std::vector<Method>& methods, const Method& m) {
  if (std::find(methods.begin(), methods.end(), m) == methods.end()) {
    methods.push_back(m);
  }
}

}  // namespace

std::string Method::name() const {
  switch (kind) {
    case Kind::kHierarchicalAdaptive:
      return "hierarchical_adaptive";
    case Kind::kPriorOnly:
      return "prior_only";
    case Kind::kFrequencyOnly:
      return "frequency_only";
    case Kind::kScaledCounts:
      return "scaled_counts";
    case Kind::kFixed:
      return "fixed(" + format_double(fixed_likelihood) + ")";
  }
  return "?";
}

std::vector<Method> parse_methods(std::string_view list) {
  std::vector<Method> methods;
  for (auto raw : split_on(list, ',')) {
    const auto token = trim(raw);
    if (token.empty()) {
      continue;
    }
    if (token == "all") {
      append_unique(methods, {Method::Kind::kHierarchicalAdaptive, 0.0});
      append_unique(methods, {Method::Kind::kPriorOnly, 0.0});
      append_unique(methods, {Method::Kind::kFrequencyOnly, 0.0});
      append_unique(methods, {Method::Kind::kScaledCounts, 0.0});
      for (double l : default_fixed_likelihoods()) append_unique(methods, Method::fixed(l));
    } else if (token == "hierarchical_adaptive") {
      append_unique(methods, {Method::Kind::kHierarchicalAdaptive, 0.0});
    } else if (token == "prior_only") {
      append_unique(methods, {Method::Kind::kPriorOnly, 0.0});
    } else if (token == "frequency_only") {
      append_unique(methods, {Method::Kind::kFrequencyOnly, 0.0});
    } else if (token == "scaled_counts") {
      append_unique(methods, {Method::Kind::kScaledCounts, 0.0});
    } else if (token == "fixed") {
      for (double l : default_fixed_likelihoods()) append_unique(methods, Method::fixed(l));
    } else if (token.starts_with("fixed(") && token.ends_with(")")) {
      const double l = parse_double(token.substr(6, token.size() - 7));
      if (!(l > 0.0) || !std::isfinite(l)) {
        throw DomainError("fixed likelihood must be positive: " + std::string(token));
      }
      append_unique(methods, Method::fixed(l));
    } else {
      throw DomainError("unknown method '" + std::string(token) + "'");
    }
  }
  if (methods.empty()) {
    throw DomainError("no methods given");
  }
  return methods;
}

std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int k = 1; k <= 19; ++k) {
    t.push_back(static_cast<double>(k) / 20.0);
  }
  t.push_back(0.99);
  return t;
}

std::vector<double> parse_thresholds(std::string_view list) {
  std::vector<double> t;
  for (auto raw : split_on(list, ',')) {
    const auto token = trim(raw);
    if (!token.empty()) {
      t.push_back(parse_double(token));
    }
  }
  EvalConfig probe;
  probe.thresholds = t;
  probe.validate();
  return t;
}

void EvalConfig::validate() const {
  if (thresholds.empty()) {
    throw DomainError("at least one threshold is required");
  }
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    if (!(thresholds[k] > 0.0 && thresholds[k] < 1.0)) {
      throw DomainError("thresholds must lie in (0, 1)");
    }
    if (k > 0 && !(thresholds[k] > thresholds[k - 1])) {
      throw DomainError("thresholds must be strictly ascending");
    }
  }
  if (!(tolerance_distance > 0.0) || !(tolerance_angle > 0.0)) {
    throw DomainError("correctness tolerance must be positive");
  }
  if (methods.empty()) {
    throw DomainError("at least one method is required");
  }
  filter.validate();
}

OutsideModel make_outside_model(const Method& method, const StructurePrior& prior,
                                std::optional<double> area_ratio) {
  const auto structural = [&](StructureMode mode) {
    return OutsideModel::structural(
        init_structure(prior.alpha, prior.views.observation, mode, prior.marginals));
  };
  switch (method.kind) {
    case Method::Kind::kHierarchicalAdaptive:
      return structural(StructureMode::adaptive());
    case Method::Kind::kPriorOnly:
      return structural(StructureMode::prior_only());
    case Method::Kind::kFrequencyOnly:
      return structural(StructureMode::frequency_only());
    case Method::Kind::kScaledCounts:
      if (!area_ratio) {
        throw DomainError("scaled_counts needs the environment area");
      }
      return structural(StructureMode::scaled_counts(*area_ratio));
    case Method::Kind::kFixed:
      return OutsideModel::fixed(method.fixed_likelihood);
  }
  throw DomainError("unknown method");
}

bool hypothesis_correct(const Pose& hypothesis, const Pose& truth, const EvalConfig& config) {
  return planar_distance(hypothesis, truth) <= config.tolerance_distance &&
         angle_distance(hypothesis.theta, truth.theta) <= config.tolerance_angle;
}

PairResult evaluate_pair(const OccupancyGrid& partial, const Trajectory& trajectory,
                         const StructurePrior& prior, const Method& method, const Pose& offset,
                         const EvalConfig& config, std::optional<double> env_area,
                         const std::string& environment, ExpectedViewCache* shared_cache) {
  prior.validate();
  std::optional<double> ratio;
  if (env_area) {
    ratio = std::min(1.0, partial.area(Cell::kFree) / *env_area);
  }
  const auto steps = run_localization(partial, make_outside_model(method, prior, ratio),
                                      prior.views, trajectory, config.filter, shared_cache);

  PairResult result{environment, method, {}};
  result.steps.reserve(steps.size());
  for (const auto& s : steps) {
    const Pose truth = transform_pose(offset, trajectory.records[s.record].true_pose);
    StepOutcome out;
    out.in_map = is_inside(partial, truth);
    if (s.hypothesis) {
      out.probability = s.hypothesis->probability;
      out.correct = hypothesis_correct(s.hypothesis->pose, truth, config);
    }
    result.steps.push_back(out);
  }
  return result;
}

std::vector<PRPoint> precision_recall(std::span<const PairResult> results,
                                      const EvalConfig& config) {
  struct Tally {
    std::size_t n_valid = 0, n_correct = 0, time_in_map = 0, time_correct = 0;
  };
  std::vector<PRPoint> points;
  // Methods in configuration order, then any extra ones in order of appearance.
  std::vector<std::string> methods;
  for (const auto& m : config.methods) methods.push_back(m.name());
  for (const auto& r : results) {
    const auto n = r.method.name();
    if (std::find(methods.begin(), methods.end(), n) == methods.end()) methods.push_back(n);
  }

  for (const auto& method : methods) {
    for (double theta : config.thresholds) {
      std::map<std::string, Tally> per_env;
      bool seen = false;
      for (const auto& r : results) {
        if (r.method.name() != method) continue;
        seen = true;
        Tally& t = per_env[r.environment];
        for (const auto& s : r.steps) {
          const bool valid = s.probability && *s.probability >= theta;
          t.n_valid += valid;
          t.n_correct += valid && s.correct;
          t.time_in_map += s.in_map;
          t.time_correct += s.in_map && valid && s.correct;
        }
      }
      if (!seen) continue;

      PRPoint p;
      p.method = method;
      p.theta = theta;
      double precision_sum = 0.0, recall_sum = 0.0;
      std::size_t precision_envs = 0, recall_envs = 0;
      for (const auto& [env, t] : per_env) {
        p.n_valid += t.n_valid;
        p.n_correct += t.n_correct;
        p.time_in_map += t.time_in_map;
        p.time_correct += t.time_correct;
        if (t.n_valid > 0) {
          precision_sum += static_cast<double>(t.n_correct) / static_cast<double>(t.n_valid);
          ++precision_envs;
        }
        if (t.time_in_map > 0) {
          recall_sum += static_cast<double>(t.time_correct) / static_cast<double>(t.time_in_map);
          ++recall_envs;
        }
      }
      if (precision_envs > 0) p.precision = precision_sum / static_cast<double>(precision_envs);
      if (recall_envs > 0) p.recall = recall_sum / static_cast<double>(recall_envs);
      points.push_back(std::move(p));
    }
  }
  return points;
}

std::string format_pr_table(std::span<const PRPoint> points) {
  std::ostringstream out;
  out << "method,theta,precision,recall,n_valid,n_correct,time_in_map,time_correct\n";
  for (const auto& p : points) {
    out << p.method << ',' << format_double(p.theta) << ','
        << (p.precision ? format_double(*p.precision) : "") << ','
        << (p.recall ? format_double(*p.recall) : "") << ',' << p.n_valid << ',' << p.n_correct
        << ',' << p.time_in_map << ',' << p.time_correct << '\n';
  }
  return out.str();
}

double pr_area(std::span<const PRPoint> points, const std::string& method) {
  std::vector<std::pair<double, double>> curve;
  for (const auto& p : points) {
    if (p.method == method && p.precision && p.recall) {
      curve.emplace_back(*p.recall, *p.precision);
    }
  }
  if (curve.empty()) {
    return 0.0;
  }
  std::sort(curve.begin(), curve.end());
  double area = curve.front().first * curve.front().second;
  for (std::size_t k = 1; k < curve.size(); ++k) {
    area += 0.5 * (curve[k].first - curve[k - 1].first) * (curve[k].second + curve[k - 1].second);
  }
  return area;
}

double interpolated_precision(std::span<const PRPoint> points, const std::string& method,
                              double recall) {
  double best = 0.0;
  for (const auto& p : points) {
    if (p.method == method && p.precision && p.recall && *p.recall >= recall) {
      best = std::max(best, *p.precision);
    }
  }
  return best;
}

std::vector<PairResult> evaluate_manifest(std::span<const ManifestEntry> entries,
                                          const EvalConfig& config) {
  config.validate();
  std::map<std::string, StructurePrior> priors;
  std::vector<PairResult> results;
  // Consecutive pairs on the same partial map and prior share expected views.
  std::string cached_map;
  std::string cached_prior;
  std::unique_ptr<OccupancyGrid> partial;
  std::unique_ptr<ExpectedViewCache> cache;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    auto it = priors.find(e.prior);
    if (it == priors.end()) {
      it = priors.emplace(e.prior, load_prior_file(e.prior)).first;
    }
    const Trajectory trajectory = load_trajectory_file(e.trajectory);
    const bool same_geometry =
        cache && cache->geometry().bearings == trajectory.records.front().scan.angles &&
        cache->geometry().max_range == trajectory.records.front().scan.max_range;
    if (!partial || e.partial_map != cached_map || e.prior != cached_prior || !same_geometry) {
      cache.reset();
      if (!partial || e.partial_map != cached_map) {
        partial = std::make_unique<OccupancyGrid>(load_map_file(e.partial_map));
      }
      cached_map = e.partial_map;
      cached_prior = e.prior;
      if (config.filter.inside_weighting == InsideWeighting::kViewAnchored &&
          !trajectory.records.empty()) {
        const auto& scan = trajectory.records.front().scan;
        cache = std::make_unique<ExpectedViewCache>(*partial, it->second.views,
                                                    ScanGeometry{scan.angles, scan.max_range},
                                                    config.filter.heading_bins);
      }
    }
    EvalConfig run = config;
    run.filter.seed = config.filter.seed + 104729ULL * k;
    for (const auto& method : config.methods) {
      results.push_back(evaluate_pair(*partial, trajectory, it->second, method, e.offset, run,
                                      e.env_area, e.environment, cache.get()));
    }
  }
  return results;
}

}  // namespace revisit
