#include "revisit/structure_hmm.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "revisit/errors.hpp"

namespace revisit {

std::string StructureMode::name() const {
  switch (kind) {
    case Kind::kAdaptive:
      return "hierarchical_adaptive";
    case Kind::kPriorOnly:
      return "prior_only";
    case Kind::kFrequencyOnly:
      return "frequency_only";
    case Kind::kScaledCounts:
      return "scaled_counts";
  }
  return "unknown";
}

StructureState::StructureState(HyperMatrix alpha, ObservationModel obs_model, StructureMode mode,
                               std::vector<double> marginals)
    : alpha_(std::move(alpha)),
      counts_(alpha_.size()),
      obs_model_(std::move(obs_model)),
      mode_(mode),
      marginals_(std::move(marginals)) {
  const std::size_t nu = alpha_.size();
  if (nu < 2) {
    throw DomainError("structural model needs at least two views");
  }
  if (obs_model_.size() != nu) {
    throw DomainError("observation model has " + std::to_string(obs_model_.size()) +
                      " views but the prior has " + std::to_string(nu));
  }
  if (!marginals_.empty()) {
    if (marginals_.size() != nu) {
      throw DomainError("marginal view frequencies do not match the number of views");
    }
    const double sum = std::accumulate(marginals_.begin(), marginals_.end(), 0.0);
    if (!(sum > 0.0)) {
      throw DomainError("marginal view frequencies must have positive mass");
    }
    for (auto& m : marginals_) {
      if (m < 0.0) {
        throw DomainError("marginal view frequencies must be non-negative");
      }
      m /= sum;
    }
  }
  if (mode_.kind == StructureMode::Kind::kFrequencyOnly && marginals_.empty()) {
    throw DomainError("frequency_only mode needs marginal view frequencies");
  }
  if (mode_.kind == StructureMode::Kind::kScaledCounts && !(mode_.ratio >= 0.0)) {
    throw DomainError("scaled_counts ratio must be non-negative");
  }
  belief_.assign(nu, 1.0 / static_cast<double>(nu));
}

double StructureState::count_weight() const noexcept {
  switch (mode_.kind) {
    case StructureMode::Kind::kAdaptive:
      return 1.0;
    case StructureMode::Kind::kScaledCounts:
      return mode_.ratio;
    case StructureMode::Kind::kPriorOnly:
    case StructureMode::Kind::kFrequencyOnly:
      return 0.0;
  }
  return 0.0;
}

std::vector<double> StructureState::predict_next_view() const {
  const std::size_t nu = size();
  const double w = count_weight();
  std::vector<double> next(nu, 0.0);
  for (std::size_t j = 0; j < nu; ++j) {
    if (belief_[j] == 0.0) {
      continue;
    }
    const auto col = predictive_column(alpha_, counts_, ViewId{j}, w);
    for (std::size_t i = 0; i < nu; ++i) {
      next[i] += col[i] * belief_[j];
    }
  }
  return next;
}

double StructureState::frequency_only_likelihood(ViewId z) const {
  if (marginals_.empty()) {
    throw DomainError("no marginal view frequencies loaded");
  }
  double total = 0.0;
  for (std::size_t v = 0; v < size(); ++v) {
    total += obs_model_.likelihood(z, ViewId{v}) * marginals_[v];
  }
  return total;
}

ViewId StructureState::most_likely_view(ViewId z) const {
  std::size_t best = 0;
  double best_p = -1.0;
  for (std::size_t v = 0; v < size(); ++v) {
    const double p = obs_model_.likelihood(z, ViewId{v});
    if (p > best_p) {
      best_p = p;
      best = v;
    }
  }
  return ViewId{best};
}

double StructureState::step(ViewId z) {
  const std::size_t nu = size();
  if (z.index >= nu) {
    throw DomainError("observed view id out of range");
  }

  // Distribution of the current view before seeing z. Without a previous
  // view there is no transition to predict from.
  std::vector<double> prior_view;
  if (mode_.kind == StructureMode::Kind::kFrequencyOnly) {
    prior_view = marginals_;
  } else if (!last_ml_view_) {
    prior_view.assign(nu, 1.0 / static_cast<double>(nu));
  } else {
    prior_view = predict_next_view();
  }

  std::vector<double> posterior(nu);
  double likelihood = 0.0;
  for (std::size_t v = 0; v < nu; ++v) {
    posterior[v] = obs_model_.likelihood(z, ViewId{v}) * prior_view[v];
    likelihood += posterior[v];
  }

  const ViewId ml = most_likely_view(z);
  const bool counting = mode_.kind == StructureMode::Kind::kAdaptive ||
                        mode_.kind == StructureMode::Kind::kScaledCounts;
  if (counting && last_ml_view_) {
    counts_.increment(*last_ml_view_, ml);
  }

  if (likelihood > 0.0) {
    for (auto& p : posterior) {
      p /= likelihood;
    }
    belief_ = std::move(posterior);
  } else {
    belief_.assign(nu, 1.0 / static_cast<double>(nu));
  }
  last_ml_view_ = ml;
  return likelihood;
}

StructureState init_structure(HyperMatrix alpha, ObservationModel obs_model, StructureMode mode,
                              std::vector<double> marginals) {
  return StructureState(std::move(alpha), std::move(obs_model), mode, std::move(marginals));
}

}  // namespace revisit
