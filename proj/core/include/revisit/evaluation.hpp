#pragma once

// Precision-recall evaluation of match hypotheses over map-trajectory pairs.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "revisit/localization_filter.hpp"
#include "revisit/model_io.hpp"
#include "revisit/prior.hpp"

namespace revisit {

// How the filter scores particles outside the partial map.
struct Method {
  enum class Kind { kHierarchicalAdaptive, kPriorOnly, kFrequencyOnly, kScaledCounts, kFixed };

  Kind kind = Kind::kHierarchicalAdaptive;
  double fixed_likelihood = 0.0;  // kFixed only

  static Method fixed(double likelihood) { return {Kind::kFixed, likelihood}; }

  std::string name() const;
  bool operator==(const Method&) const = default;
};

inline const std::vector<double>& default_fixed_likelihoods() {
  static const std::vector<double> values{1e-4, 1e-3, 1e-2, 1e-1, 0.3};
  return values;
}

// Comma-separated method names: hierarchical_adaptive, prior_only,
// frequency_only, scaled_counts, fixed(L), `fixed` for the default sweep and
// `all` for everything.
std::vector<Method> parse_methods(std::string_view list);

// Comma-separated ascending thresholds in (0, 1).
std::vector<double> parse_thresholds(std::string_view list);

std::vector<double> default_thresholds();

struct EvalConfig {
  std::vector<double> thresholds = default_thresholds();
  double tolerance_distance = 2.0;       // m
  double tolerance_angle = deg2rad(30.0);
  std::vector<Method> methods = parse_methods("all");
  FilterConfig filter;

  void validate() const;
};

// Outside model for `method` built from the prior. `area_ratio` is the
// partial map's share of the environment (scaled_counts only).
OutsideModel make_outside_model(const Method& method, const StructurePrior& prior,
                                std::optional<double> area_ratio);

// Whether a hypothesis lies within the configured tolerance of the truth.
bool hypothesis_correct(const Pose& hypothesis, const Pose& truth, const EvalConfig& config);

struct StepOutcome {
  std::optional<double> probability;  // empty when there was no hypothesis
  bool correct = false;
  bool in_map = false;
};

struct PairResult {
  std::string environment;
  Method method;
  std::vector<StepOutcome> steps;
};

// Runs the filter for one pair and judges every measurement step. `offset`
// maps world poses into the partial map's frame.
PairResult evaluate_pair(const OccupancyGrid& partial, const Trajectory& trajectory,
                         const StructurePrior& prior, const Method& method, const Pose& offset,
                         const EvalConfig& config, std::optional<double> env_area = std::nullopt,
                         const std::string& environment = "",
                         ExpectedViewCache* shared_cache = nullptr);

struct PRPoint {
  std::string method;
  double theta = 0.0;
  std::optional<double> precision;  // empty when nothing was valid
  std::optional<double> recall;     // empty when the robot was never in the map
  std::size_t n_valid = 0;
  std::size_t n_correct = 0;
  std::size_t time_in_map = 0;
  std::size_t time_correct = 0;
};

// Per method and threshold: precision and recall pooled within each
// environment, then averaged over environments. Counts are summed over all
// pairs.
std::vector<PRPoint> precision_recall(std::span<const PairResult> results,
                                      const EvalConfig& config);

std::string format_pr_table(std::span<const PRPoint> points);

// Trapezoid area under one method's precision-recall curve, ordered by
// recall and extended flat to recall 0. Points with undefined values are
// skipped.
double pr_area(std::span<const PRPoint> points, const std::string& method);

// Highest precision among the method's points with recall >= r; 0 if none.
double interpolated_precision(std::span<const PRPoint> points, const std::string& method,
                              double recall);

// Evaluates every manifest pair under every configured method. Filter seeds
// are derived from config.filter.seed and the pair index, so all methods see
// the same random stream for a given pair.
std::vector<PairResult> evaluate_manifest(std::span<const ManifestEntry> entries,
                                          const EvalConfig& config);

}  // namespace revisit
