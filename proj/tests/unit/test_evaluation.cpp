#include <gtest/gtest.h>

#include <random>

#include "revisit/errors.hpp"
#include "revisit/evaluation.hpp"
#include "revisit/model_io.hpp"
#include "revisit/sim_world.hpp"
#include "test_support.hpp"

using namespace revisit;

namespace {

const StructurePrior& training_prior() {
  static const StructurePrior prior = load_prior_file(fixtures::data_path("priors/training.prior"));
  return prior;
}

StepOutcome step(std::optional<double> p, bool correct, bool in_map) {
  return StepOutcome{p, correct, in_map};
}

EvalConfig config_for(std::string_view methods, std::string_view thresholds = "0.1,0.5,0.9") {
  EvalConfig c;
  c.methods = parse_methods(methods);
  c.thresholds = parse_thresholds(thresholds);
  return c;
}

}  // namespace

TEST(Methods, ParseAndName) {
  const auto all = parse_methods("all");
  EXPECT_EQ(all.size(), 9u);
  EXPECT_EQ(all.front().name(), "hierarchical_adaptive");
  const auto fixed = parse_methods("fixed");
  ASSERT_EQ(fixed.size(), 5u);
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    EXPECT_EQ(fixed[k].fixed_likelihood, default_fixed_likelihoods()[k]);
    EXPECT_EQ(parse_methods(fixed[k].name()).front(), fixed[k]);
  }
  EXPECT_EQ(parse_methods("prior_only, prior_only").size(), 1u);
  EXPECT_THROW(parse_methods("oracle"), DomainError);
  EXPECT_THROW(parse_methods("fixed(-1)"), DomainError);
  EXPECT_THROW(parse_methods(""), DomainError);
}

TEST(Thresholds, DefaultsAndValidation) {
  const auto t = default_thresholds();
  ASSERT_EQ(t.size(), 20u);
  EXPECT_DOUBLE_EQ(t.front(), 0.05);
  EXPECT_DOUBLE_EQ(t[18], 0.95);
  EXPECT_DOUBLE_EQ(t.back(), 0.99);
  EXPECT_EQ(parse_thresholds("0.2, 0.4"), (std::vector<double>{0.2, 0.4}));
  EXPECT_THROW(parse_thresholds("0.4,0.2"), DomainError);
  EXPECT_THROW(parse_thresholds("0,0.5"), DomainError);
  EXPECT_THROW(parse_thresholds("0.5,1"), DomainError);
  EXPECT_THROW(parse_thresholds("half"), ParseError);
}

TEST(OutsideModels, FixedIsConstant) {
  auto model = make_outside_model(Method::fixed(0.01), training_prior(), std::nullopt);
  for (std::size_t z = 0; z < 10; ++z) EXPECT_EQ(model.step(ViewId{z}), 0.01);
  EXPECT_EQ(model.structure(), nullptr);
}

TEST(OutsideModels, ScaledCountsBounds) {
  const auto& prior = training_prior();
  auto zero = make_outside_model({Method::Kind::kScaledCounts, 0.0}, prior, 0.0);
  auto prior_only = make_outside_model({Method::Kind::kPriorOnly, 0.0}, prior, std::nullopt);
  auto one = make_outside_model({Method::Kind::kScaledCounts, 0.0}, prior, 1.0);
  auto adaptive =
      make_outside_model({Method::Kind::kHierarchicalAdaptive, 0.0}, prior, std::nullopt);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> view(0, prior.alpha.size() - 1);
  for (int k = 0; k < 60; ++k) {
    const ViewId z{view(rng)};
    EXPECT_EQ(zero.step(z), prior_only.step(z));
    EXPECT_EQ(one.step(z), adaptive.step(z));
  }
  EXPECT_THROW(make_outside_model({Method::Kind::kScaledCounts, 0.0}, prior, std::nullopt),
               DomainError);
}

TEST(Tolerance, DefaultNeighbourhood) {
  const EvalConfig c;
  const Pose truth{4.0, 5.0, 3.1};
  EXPECT_TRUE(hypothesis_correct({4.1, 5.0, 3.1 + deg2rad(5)}, truth, c));  // wraps past pi
  EXPECT_TRUE(hypothesis_correct({5.9, 5.0, 3.1}, truth, c));
  EXPECT_FALSE(hypothesis_correct({6.1, 5.0, 3.1}, truth, c));
  EXPECT_FALSE(hypothesis_correct({4.0, 5.0, 3.1 - deg2rad(31)}, truth, c));
}

TEST(PrecisionRecall, SinglePairAllCorrect) {
  const auto c = config_for("prior_only");
  PairResult r{"env", parse_methods("prior_only")[0],
               {step(0.95, true, true), step(0.95, true, true), step(std::nullopt, false, true),
                step(0.95, true, false)}};
  const std::vector<PairResult> results{r};
  const auto pr = precision_recall(results, c);
  ASSERT_EQ(pr.size(), 3u);
  for (const auto& p : pr) {
    EXPECT_DOUBLE_EQ(*p.precision, 1.0);
    EXPECT_DOUBLE_EQ(*p.recall, 2.0 / 3.0);
    EXPECT_EQ(p.time_in_map, 3u);
  }
}

TEST(PrecisionRecall, ThresholdAboveEverything) {
  const auto c = config_for("prior_only", "0.5,0.99");
  PairResult r{"env", parse_methods("prior_only")[0], {step(0.6, true, true), step(0.7, false, true)}};
  const std::vector<PairResult> results{r};
  const auto pr = precision_recall(results, c);
  EXPECT_DOUBLE_EQ(*pr[0].precision, 0.5);
  EXPECT_EQ(pr[1].n_valid, 0u);
  EXPECT_FALSE(pr[1].precision);
  EXPECT_DOUBLE_EQ(*pr[1].recall, 0.0);
}

TEST(PrecisionRecall, NeverInMapLeavesRecallEmpty) {
  const auto c = config_for("fixed(0.01)");
  PairResult r{"env", Method::fixed(0.01), {step(0.8, false, false), step(std::nullopt, false, false)}};
  const std::vector<PairResult> results{r};
  for (const auto& p : precision_recall(results, c)) {
    EXPECT_EQ(p.time_in_map, 0u);
    EXPECT_FALSE(p.recall);
  }
}

TEST(PrecisionRecall, AveragesEnvironments) {
  const auto c = config_for("prior_only", "0.5");
  const Method m = parse_methods("prior_only")[0];
  std::vector<PairResult> results{
      {"a", m, {step(0.9, true, true), step(0.9, true, true), step(0.9, false, true),
                step(0.9, false, true)}},
      {"b", m, {step(0.9, true, true)}},
  };
  const auto pr = precision_recall(results, c);
  ASSERT_EQ(pr.size(), 1u);
  EXPECT_DOUBLE_EQ(*pr[0].precision, (0.5 + 1.0) / 2.0);
  EXPECT_DOUBLE_EQ(*pr[0].recall, (0.5 + 1.0) / 2.0);
  EXPECT_EQ(pr[0].n_valid, 5u);
}

TEST(PrecisionRecall, RecallMonotoneInTheta) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Method m = parse_methods("frequency_only")[0];
  std::vector<PairResult> results;
  for (int pair = 0; pair < 12; ++pair) {
    PairResult r{pair % 3 == 0 ? "x" : "y", m, {}};
    for (int k = 0; k < 40; ++k) {
      std::optional<double> p;
      if (unit(rng) < 0.8) p = unit(rng);
      r.steps.push_back(step(p, unit(rng) < 0.6, unit(rng) < 0.5));
    }
    results.push_back(r);
  }
  EvalConfig c;
  c.methods = {m};
  const auto pr = precision_recall(results, c);
  ASSERT_EQ(pr.size(), c.thresholds.size());
  for (std::size_t k = 1; k < pr.size(); ++k) {
    EXPECT_LE(*pr[k].recall, *pr[k - 1].recall);
    EXPECT_LE(pr[k].n_valid, pr[k - 1].n_valid);
  }
}

TEST(PrTable, HeaderAndEmptyFields) {
  PRPoint p;
  p.method = "prior_only";
  p.theta = 0.5;
  p.recall = 0.25;
  p.time_in_map = 4;
  p.time_correct = 1;
  const std::vector<PRPoint> points{p};
  EXPECT_EQ(format_pr_table(points),
            "method,theta,precision,recall,n_valid,n_correct,time_in_map,time_correct\n"
            "prior_only,0.5,,0.25,0,0,4,1\n");
}

TEST(PrArea, TrapezoidWithFlatStart) {
  std::vector<PRPoint> points;
  const auto add = [&](double recall, double precision) {
    PRPoint p;
    p.method = "m";
    p.recall = recall;
    p.precision = precision;
    points.push_back(p);
  };
  add(0.4, 0.5);
  add(0.2, 1.0);
  PRPoint empty;
  empty.method = "m";
  empty.recall = 0.0;
  points.push_back(empty);
  EXPECT_DOUBLE_EQ(pr_area(points, "m"), 0.2 * 1.0 + 0.2 * 0.75);
  EXPECT_DOUBLE_EQ(pr_area(points, "other"), 0.0);
  EXPECT_DOUBLE_EQ(interpolated_precision(points, "m", 0.3), 0.5);
  EXPECT_DOUBLE_EQ(interpolated_precision(points, "m", 0.1), 1.0);
  EXPECT_DOUBLE_EQ(interpolated_precision(points, "m", 0.9), 0.0);
}

TEST(EvaluatePair, TrajectoryNeverInMap) {
  const auto full = fixtures::fixture_map("office");
  auto partial = full;
  for (long r = 0; r < static_cast<long>(full.height()); ++r) {
    for (long c = 0; c < static_cast<long>(full.width()); ++c) {
      if (full.center_x(c) > 16.0 || full.center_y(r) > 13.9) partial.set(c, r, Cell::kUnknown);
    }
  }
  WorldConfig world;
  world.seed = 1;
  const std::vector<Point> goals{{37, 15.2}};
  const auto traj =
      generate_trajectory(full, {22, 15.2, 0.0}, Policy::kWaypoints, 14.0, world, goals);
  EvalConfig c = config_for("all");
  c.filter.particles = 300;
  for (const auto& m : c.methods) {
    const auto r = evaluate_pair(partial, traj, training_prior(), m, {}, c, 1000.0, "office");
    EXPECT_FALSE(r.steps.empty());
    for (const auto& s : r.steps) EXPECT_FALSE(s.in_map);
    const std::vector<PairResult> one{r};
    for (const auto& p : precision_recall(one, c)) EXPECT_FALSE(p.recall);
  }
}

TEST(EvaluatePair, OffsetMapsWorldIntoPartialFrame) {
  const auto map = fixtures::fixture_map("corridor");
  auto shifted = OccupancyGrid(map.width(), map.height(), map.resolution(), 100.0, 50.0);
  for (long r = 0; r < static_cast<long>(map.height()); ++r) {
    for (long c = 0; c < static_cast<long>(map.width()); ++c) shifted.set(c, r, map.at(c, r));
  }
  WorldConfig world;
  world.seed = 2;
  const std::vector<Point> goals{{28, 2}};
  const auto traj = generate_trajectory(map, {4, 2, 0.0}, Policy::kWaypoints, 20.0, world, goals);
  EvalConfig c = config_for("fixed(0.001)");
  c.filter.particles = 300;
  const auto r = evaluate_pair(shifted, traj, training_prior(), c.methods[0],
                               {100.0, 50.0, 0.0}, c);
  for (const auto& s : r.steps) EXPECT_TRUE(s.in_map);
}
