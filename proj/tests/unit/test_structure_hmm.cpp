#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "revisit/errors.hpp"
#include "revisit/structure_hmm.hpp"
#include "test_support.hpp"

using namespace revisit;

namespace {

ObservationModel noisy_model(std::size_t nu, double hit) {
  SquareMatrix<double> m(nu, (1.0 - hit) / static_cast<double>(nu - 1));
  for (std::size_t i = 0; i < nu; ++i) m(i, i) = hit;
  return ObservationModel::from_matrix(std::move(m));
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST(InitStructure, UniformBeliefAndZeroCounts) {
  const auto s = init_structure(HyperMatrix(3, 1.0), noisy_model(3, 0.8), StructureMode::adaptive());
  for (double b : s.view_belief()) EXPECT_DOUBLE_EQ(b, 1.0 / 3.0);
  EXPECT_EQ(s.counts().total(), 0u);
  EXPECT_FALSE(s.last_ml_view());
}

TEST(InitStructure, RejectsMismatchedSizes) {
  EXPECT_THROW(init_structure(HyperMatrix(3, 1.0), noisy_model(4, 0.8), StructureMode::adaptive()),
               DomainError);
  EXPECT_THROW(init_structure(HyperMatrix(3, 1.0), noisy_model(3, 0.8),
                              StructureMode::frequency_only()),
               DomainError);  // marginals required
}

TEST(InitStructure, Deterministic) {
  const auto a = init_structure(HyperMatrix(4, 0.5), noisy_model(4, 0.7), StructureMode::adaptive());
  const auto b = init_structure(HyperMatrix(4, 0.5), noisy_model(4, 0.7), StructureMode::adaptive());
  EXPECT_EQ(a.view_belief(), b.view_belief());
  EXPECT_EQ(a.counts(), b.counts());
}

TEST(Step, FirstObservationUsesUniformViews) {
  auto s = init_structure(HyperMatrix(3, 1.0), noisy_model(3, 0.8), StructureMode::adaptive());
  const double l = s.step(ViewId{2});
  EXPECT_NEAR(l, (0.8 + 0.1 + 0.1) / 3.0, 1e-15);
  EXPECT_EQ(s.counts().total(), 0u);
  EXPECT_EQ(s.last_ml_view(), ViewId{2});
}

TEST(Step, CountsFollowMostLikelyViews) {
  auto s = init_structure(HyperMatrix(2, 1.0), ObservationModel::identity(2),
                          StructureMode::adaptive());
  for (int k = 0; k < 3; ++k) s.step(ViewId{0});
  EXPECT_EQ(s.counts()(0, 0), 2u);
  EXPECT_NEAR(predictive(s.alpha(), s.counts(), ViewId{0}, ViewId{0}), 3.0 / 4.0, 1e-15);
  // With the belief on view 0, the next likelihood of seeing 1 is 1/4.
  EXPECT_NEAR(s.step(ViewId{1}), 1.0 / 4.0, 1e-15);
}

TEST(Step, PriorOnlyNeverCounts) {
  auto s = init_structure(HyperMatrix(3, 1.0), noisy_model(3, 0.8), StructureMode::prior_only());
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> v(0, 2);
  for (int k = 0; k < 100; ++k) s.step(ViewId{v(rng)});
  EXPECT_EQ(s.counts().total(), 0u);
}

TEST(Step, BeliefStaysNormalizedAndLikelihoodPositive) {
  std::mt19937_64 rng(3);
  auto alpha = HyperMatrix(5, 1e-3);
  auto s = init_structure(alpha, noisy_model(5, 0.9), StructureMode::adaptive());
  std::uniform_int_distribution<std::size_t> v(0, 4);
  for (int k = 0; k < 300; ++k) {
    const double l = s.step(ViewId{v(rng)});
    EXPECT_GT(l, 0.0);
    EXPECT_NEAR(sum(s.view_belief()), 1.0, 1e-9);
  }
}

TEST(Step, PriorOnlyIsPureGivenBeliefAndObservation) {
  auto a = init_structure(HyperMatrix(3, 0.7), noisy_model(3, 0.8), StructureMode::prior_only());
  auto b = a;
  const std::vector<std::size_t> stream{0, 2, 1, 1, 0, 2, 2};
  for (auto z : stream) {
    EXPECT_EQ(a.step(ViewId{z}), b.step(ViewId{z}));
  }
}

TEST(Step, ScaledCountsInterpolatesBetweenModes) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> a(0.1, 3.0);
  std::vector<double> av(16);
  for (auto& x : av) x = a(rng);
  const auto alpha = HyperMatrix::from_row_major(4, av);
  const auto obs = noisy_model(4, 0.85);
  auto prior = init_structure(alpha, obs, StructureMode::prior_only());
  auto adaptive = init_structure(alpha, obs, StructureMode::adaptive());
  auto zero = init_structure(alpha, obs, StructureMode::scaled_counts(0.0));
  auto one = init_structure(alpha, obs, StructureMode::scaled_counts(1.0));
  std::uniform_int_distribution<std::size_t> v(0, 3);
  for (int k = 0; k < 200; ++k) {
    const ViewId z{v(rng)};
    EXPECT_EQ(zero.step(z), prior.step(z));
    EXPECT_EQ(one.step(z), adaptive.step(z));
  }
}

TEST(Step, AdaptationHelpsOnAtypicalEnvironment) {
  // Prior expects mostly self-transitions; the environment cycles 0->1->2->0.
  const std::size_t nu = 3;
  HyperMatrix alpha(nu, 0.5);
  for (std::size_t i = 0; i < nu; ++i) alpha.set(i, i, 20.0);
  const auto obs = noisy_model(nu, 0.9);
  SquareMatrix<double> q(nu, 0.05);
  q(1, 0) = q(2, 1) = q(0, 2) = 0.9;

  std::mt19937_64 rng(7);
  double adaptive_total = 0.0, prior_total = 0.0;
  auto adaptive = init_structure(alpha, obs, StructureMode::adaptive());
  auto prior = init_structure(alpha, obs, StructureMode::prior_only());
  std::size_t v = 0;
  const int steps = 400;
  for (int t = 0; t < steps; ++t) {
    std::vector<double> col(nu);
    for (std::size_t i = 0; i < nu; ++i) col[i] = q(i, v);
    v = fixtures::sample_categorical(col, rng);
    std::vector<double> emit(nu);
    for (std::size_t i = 0; i < nu; ++i) emit[i] = obs.likelihood(ViewId{i}, ViewId{v});
    const ViewId z{fixtures::sample_categorical(emit, rng)};
    adaptive_total += std::log(adaptive.step(z));
    prior_total += std::log(prior.step(z));
  }
  EXPECT_GT(adaptive_total / steps, prior_total / steps);
}

TEST(PredictNextView, UniformEverything) {
  const auto s = init_structure(HyperMatrix(4, 1.0), noisy_model(4, 0.7), StructureMode::adaptive());
  for (double p : s.predict_next_view()) EXPECT_NEAR(p, 0.25, 1e-15);
}

TEST(PredictNextView, ConcentratedBeliefGivesColumn) {
  const auto alpha = HyperMatrix::from_row_major(3, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  auto s = init_structure(alpha, ObservationModel::identity(3), StructureMode::adaptive());
  s.step(ViewId{1});  // identity model: belief is now exactly on view 1
  const auto p = s.predict_next_view();
  const double total = 2.0 + 5.0 + 8.0;
  EXPECT_NEAR(p[0], 2.0 / total, 1e-15);
  EXPECT_NEAR(p[1], 5.0 / total, 1e-15);
  EXPECT_NEAR(p[2], 8.0 / total, 1e-15);
}

TEST(PredictNextView, Normalized) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> a(0.01, 5.0);
  std::vector<double> av(36);
  for (auto& x : av) x = a(rng);
  auto s = init_structure(HyperMatrix::from_row_major(6, av), noisy_model(6, 0.6),
                          StructureMode::adaptive());
  std::uniform_int_distribution<std::size_t> v(0, 5);
  for (int k = 0; k < 50; ++k) {
    s.step(ViewId{v(rng)});
    EXPECT_NEAR(sum(s.predict_next_view()), 1.0, 1e-12);
  }
}

TEST(FrequencyOnly, IdentityModelReturnsMarginal) {
  const std::vector<double> marginals{0.5, 0.3, 0.2};
  auto s = init_structure(HyperMatrix(3, 1.0), ObservationModel::identity(3),
                          StructureMode::frequency_only(), marginals);
  for (std::size_t z = 0; z < 3; ++z) {
    EXPECT_NEAR(s.frequency_only_likelihood(ViewId{z}), marginals[z], 1e-15);
  }
  EXPECT_NEAR(s.step(ViewId{1}), 0.3, 1e-15);
  EXPECT_NEAR(s.step(ViewId{1}), 0.3, 1e-15);  // no transition structure
}

TEST(FrequencyOnly, UniformMarginal) {
  const auto s = init_structure(HyperMatrix(4, 1.0), noisy_model(4, 0.7),
                                StructureMode::frequency_only(), {1, 1, 1, 1});
  for (std::size_t z = 0; z < 4; ++z) {
    EXPECT_NEAR(s.frequency_only_likelihood(ViewId{z}), 0.25, 1e-15);
  }
}

TEST(FrequencyOnly, StreamLikelihoodIsOrderFree) {
  const std::vector<double> marginals{0.1, 0.2, 0.3, 0.4};
  std::vector<std::size_t> stream{0, 3, 3, 1, 2, 0, 3, 1};
  const auto run = [&](const std::vector<std::size_t>& zs) {
    auto s = init_structure(HyperMatrix(4, 1.0), noisy_model(4, 0.7),
                            StructureMode::frequency_only(), marginals);
    double total = 0.0;
    for (auto z : zs) total += std::log(s.step(ViewId{z}));
    return total;
  };
  const double forward = run(stream);
  std::reverse(stream.begin(), stream.end());
  EXPECT_NEAR(run(stream), forward, 1e-12);
}
