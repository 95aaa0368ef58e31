#pragma once

#include <optional>
#include <string>
#include <vector>

#include "revisit/dirichlet.hpp"
#include "revisit/view_id.hpp"
#include "revisit/view_model.hpp"

namespace revisit {

// How the online structural estimate turns the robot's observation stream
// into p(z | outside).
struct StructureMode {
  enum class Kind {
    kAdaptive,       // prior plus online transition counts
    kPriorOnly,      // prior alone; counts stay frozen at zero
    kFrequencyOnly,  // marginal training view frequencies, no transitions
    kScaledCounts,   // online counts weighted by `ratio` before entering the predictive
  };

  Kind kind = Kind::kAdaptive;
  double ratio = 1.0;  // kScaledCounts only

  static StructureMode adaptive() { return {Kind::kAdaptive, 1.0}; }
  static StructureMode prior_only() { return {Kind::kPriorOnly, 0.0}; }
  static StructureMode frequency_only() { return {Kind::kFrequencyOnly, 0.0}; }
  static StructureMode scaled_counts(double ratio) { return {Kind::kScaledCounts, ratio}; }

  std::string name() const;
};

// Filter-global estimate of environment structure: Dirichlet prior, online
// transition counts and a belief over the current view.
class StructureState {
 public:
  StructureState(HyperMatrix alpha, ObservationModel obs_model, StructureMode mode,
                 std::vector<double> marginals = {});

  // Likelihood of z under the structural model, computed before the counts
  // absorb the new transition. Advances the view belief and counts.
  double step(ViewId z);

  // p(v_t) for the next view, marginalized over the current belief.
  std::vector<double> predict_next_view() const;

  // sum_v p(z | v) * marginal(v); ignores transitions.
  double frequency_only_likelihood(ViewId z) const;

  std::size_t size() const noexcept { return alpha_.size(); }
  const HyperMatrix& alpha() const noexcept { return alpha_; }
  const CountMatrix& counts() const noexcept { return counts_; }
  const std::vector<double>& view_belief() const noexcept { return belief_; }
  std::optional<ViewId> last_ml_view() const noexcept { return last_ml_view_; }
  const StructureMode& mode() const noexcept { return mode_; }
  const ObservationModel& obs_model() const noexcept { return obs_model_; }
  const std::vector<double>& marginals() const noexcept { return marginals_; }

  // Weight applied to the online counts inside the predictive.
  double count_weight() const noexcept;

 private:
  ViewId most_likely_view(ViewId z) const;

  HyperMatrix alpha_;
  CountMatrix counts_;
  ObservationModel obs_model_;
  StructureMode mode_;
  std::vector<double> marginals_;
  std::vector<double> belief_;
  std::optional<ViewId> last_ml_view_;
};

StructureState init_structure(HyperMatrix alpha, ObservationModel obs_model, StructureMode mode,
                              std::vector<double> marginals = {});

}  // namespace revisit
