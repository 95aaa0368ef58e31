#include <algorithm>
#include <numeric>

#include "revisit/errors.hpp"
#include "revisit/sim_world.hpp"

namespace revisit {

namespace {

struct ViewPair {
  ScanString truth;
  ScanString observed;
};

// Views sampled along one trajectory, in travel order.
std::vector<ViewPair> sample_views(const OccupancyGrid& map, const Trajectory& traj,
                                   const TrainingOptions& options, const WorldConfig& cfg) {
  std::vector<ViewPair> views;
  const ScanGeometry geometry = cfg.geometry();
  for (std::size_t k : subsample_by_distance(traj, options.view_spacing)) {
    const auto& rec = traj.records[k];
    views.push_back({canonicalize(expected_scan_string(map, rec.true_pose, options.extraction,
                                                       geometry)),
                     canonicalize(extract_scan_string(rec.scan, options.extraction))});
  }
  return views;
}

}  // namespace

TrainingData make_training_data(std::span<const OccupancyGrid> maps, const TrainingOptions& options,
                                const WorldConfig& cfg,
                                std::span<const std::vector<Trajectory>> trajectories) {
  if (maps.empty()) {
    throw DomainError("training needs at least one map");
  }
  if (!trajectories.empty() && trajectories.size() != maps.size()) {
    throw DomainError("supplied trajectories must be given per map");
  }
  cfg.validate();

  // views[l][t] holds the sampled views of trajectory t in map l.
  std::vector<std::vector<std::vector<ViewPair>>> views(maps.size());
  std::vector<ScanString> observed;
  for (std::size_t l = 0; l < maps.size(); ++l) {
    if (!trajectories.empty() && !trajectories[l].empty()) {
      for (const auto& traj : trajectories[l]) {
        views[l].push_back(sample_views(maps[l], traj, options, cfg));
      }
      continue;
    }
    for (std::size_t t = 0; t < options.trajectories_per_map; ++t) {
      WorldConfig run = cfg;
      run.seed = cfg.seed + 1000003ULL * l + 7919ULL * t;
      Rng start_rng(run.seed);
      const Pose start = random_free_pose(maps[l], run, start_rng);
      const Trajectory traj = generate_trajectory(maps[l], start, options.policy,
                                                  options.trajectory_length, run);
      views[l].push_back(sample_views(maps[l], traj, options, cfg));
    }
  }
  for (const auto& env : views) {
    for (const auto& traj : env) {
      for (const auto& v : traj) {
        observed.push_back(v.observed);
      }
    }
  }
  if (observed.empty()) {
    throw DomainError("training trajectories produced no views");
  }

  TrainingData data;
  data.alphabet = alphabet_build(observed, options.max_views);
  const std::size_t nu = data.alphabet.size();
  std::vector<double> frequency(nu, 0.0);
  double total = 0.0;
  for (const auto& env : views) {
    CountMatrix counts(nu);
    std::vector<LabeledView> labels;
    for (const auto& traj : env) {
      std::optional<ViewId> previous;
      for (const auto& v : traj) {
        const ViewId truth = view_of(data.alphabet, v.truth);
        labels.push_back({truth, view_of(data.alphabet, v.observed)});
        frequency[truth.index] += 1.0;
        total += 1.0;
        if (previous) {
          counts.increment(*previous, truth);
        }
        previous = truth;
      }
    }

    SquareMatrix<double> q(nu, 0.0);
    for (std::size_t j = 0; j < nu; ++j) {
      const double sum = static_cast<double>(counts.column_sum(j));
      for (std::size_t i = 0; i < nu; ++i) {
        q(i, j) = sum > 0.0 ? static_cast<double>(counts(i, j)) / sum
                            : 1.0 / static_cast<double>(nu);
      }
    }
    data.dataset.environments.push_back(std::move(counts));
    data.confusion.push_back(std::move(labels));
    data.reference_transitions.push_back(std::move(q));
  }
  for (auto& f : frequency) {
    f /= total;
  }
  data.marginals = std::move(frequency);
  return data;
}

StructurePrior train_prior(const TrainingData& data, const TrainingOptions& options) {
  data.dataset.validate();
  const std::size_t nu = data.alphabet.size();
  if (data.dataset.view_count() != nu) {
    throw DomainError("training counts and alphabet disagree on the number of views");
  }

  StructurePrior prior;
  prior.views.alphabet = data.alphabet;
  prior.views.extraction = options.extraction;
  prior.views.observation = learn_observation_model(data.confusion, nu, options.fit);
  prior.alpha = map_estimate(data.dataset, HyperMatrix(nu, 1.0), options.fit);
  prior.marginals = data.marginals;
  CountMatrix pooled(nu);
  for (const auto& env : data.dataset.environments) {
    pooled += env;
  }
  prior.counts = std::move(pooled);
  prior.validate();
  return prior;
}

void StructurePrior::validate() const {
  const std::size_t nu = views.alphabet.size();
  if (nu < 2) {
    throw DomainError("a structural prior needs at least two views");
  }
  if (views.observation.size() != nu || alpha.size() != nu) {
    throw DomainError("prior components disagree on the number of views");
  }
  if (!marginals.empty() && marginals.size() != nu) {
    throw DomainError("marginal view frequencies have the wrong length");
  }
  if (counts && counts->size() != nu) {
    throw DomainError("prior counts have the wrong size");
  }
  views.extraction.validate();
}

}  // namespace revisit
