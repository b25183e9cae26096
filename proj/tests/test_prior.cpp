// Copyright 2026 The playprior Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "playprior/prior.hpp"

using namespace playprior;
using namespace playprior::prior;

namespace {

nn::Vector vec(std::initializer_list<double> v) {
  nn::Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Trained once for the tests that need a reasonable model.
const std::shared_ptr<const PriorModel>& small_model() {
  static const auto model = [] {
    const play::PlayDataset ds = play::collect_play(6000, 21);
    PriorConfig cfg;
    cfg.hidden = {64, 64};
    cfg.batch = 200;
    cfg.steps = 4000;
    cfg.eval_every = 500;
    cfg.seed = 1;
    return std::make_shared<const PriorModel>(train_prior(ds, cfg));
  }();
  return model;
}

}  // namespace

TEST(Train, DegenerateSingleLabelFit) {
  play::PlayDataset ds;
  const auto x = env::encode(env::initial_state(0, 4));
  for (int i = 0; i < 400; ++i) ds.records.push_back({x, 3, x});
  PriorConfig cfg;
  cfg.hidden = {16};
  cfg.batch = 32;
  cfg.steps = 300;
  cfg.lr = 1e-2;
  const PriorModel m = train_prior(ds, cfg);
  EXPECT_GT(probs(m, env::initial_state(0, 4))(3), 0.95);
}

TEST(Train, HeldOutNllBeatsUniformAndDecreases) {
  const PriorModel& m = *small_model();
  ASSERT_GE(m.heldout_nll.size(), 3u);
  EXPECT_EQ(m.heldout_nll.front().first, 0);
  EXPECT_EQ(m.heldout_nll.back().first, 4000);
  EXPECT_LT(m.final_heldout_nll(), std::log(10.0));
  EXPECT_LE(m.final_heldout_nll(), m.heldout_nll[1].second);
}

TEST(Train, DatasetSmallerThanBatchRejected) {
  const play::PlayDataset ds = play::collect_play(100, 2);
  PriorConfig cfg;  // batch 500
  EXPECT_THROW(train_prior(ds, cfg), InvalidInput);
  EXPECT_THROW(train_prior(play::PlayDataset{}, cfg), InvalidInput);
}

TEST(Probs, SumToOneAndUntrainedIsUniform) {
  const PriorModel zero = untrained_prior();
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const env::Task t = env::sample_visited(rng);
    const nn::Vector p = probs(*small_model(), t.state);
    EXPECT_NEAR(p.sum(), 1.0, 1e-9);
    EXPECT_GE(p.minCoeff(), 0.0);
    const nn::Vector u = probs(zero, t.state);
    for (int a = 0; a < kNumPrimitives; ++a) EXPECT_DOUBLE_EQ(u(a), 0.1);
  }
}

TEST(Probs, MassConcentratesOnFeasibleSetNextToDoor) {
  env::EnvState s = env::initial_state(0, 4);
  s = env::step(s, env::Primitive::GoDoorHandle, env::Goal{}).next;
  const ActionSet feasible = env::feasible_oracle(s, env::Goal{});
  const nn::Vector p = probs(*small_model(), s);
  double mass = 0.0;
  for (int a : feasible.to_vector()) mass += p(a);
  EXPECT_GE(mass, 0.9);
}

TEST(Alpha, ThresholdIsStrict) {
  const nn::Vector p = vec({0.5, 0.3, 0.15, 0.04, 0.01, 0.0, 0.0, 0.0, 0.0, 0.0});
  EXPECT_EQ(SelectionOperator::threshold(p, 0.01).to_vector(), (std::vector<int>{0, 1, 2, 3}));
}

TEST(Alpha, RhoZeroSelectsEverything) {
  const SelectionOperator sel(small_model(), 0.0);
  Rng rng(4);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sel.alpha(env::sample_visited(rng).state), ActionSet::full());
}

TEST(Alpha, EmptyThresholdFallsBackToArgmax) {
  const nn::Vector p = vec({0.1, 0.3, 0.05, 0.3, 0.05, 0.05, 0.05, 0.05, 0.03, 0.02});
  EXPECT_TRUE(SelectionOperator::raw_threshold(p, 0.99).empty());
  EXPECT_EQ(SelectionOperator::threshold(p, 0.99), ActionSet::single(1));  // first of the tied maxima
}

TEST(Alpha, MonotoneInRhoAndNeverEmpty) {
  Rng rng(5);
  const std::vector<double> rhos{0.0, 0.001, 0.01, 0.05, 0.2, 0.6, 0.95};
  for (int i = 0; i < 200; ++i) {
    const env::Task t = env::sample_visited(rng);
    const nn::Vector p = probs(*small_model(), t.state);
    for (std::size_t k = 0; k + 1 < rhos.size(); ++k)
      ASSERT_TRUE(SelectionOperator::raw_threshold(p, rhos[k + 1]).subset_of(SelectionOperator::raw_threshold(p, rhos[k])));
    for (double rho : rhos) ASSERT_FALSE(SelectionOperator(small_model(), rho).alpha(t.state).empty());
  }
}

TEST(Alpha, IndependentOfGoal) {
  // alpha sees only the state, so scoring it under two goal streams gives the same sets.
  const SelectionOperator sel(small_model(), 0.01);
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    const env::Task a = env::sample_visited(rng);
    EXPECT_EQ(sel.alpha(a.state), sel.alpha(a.state));
  }
  const PriorQuality q1 = prior_quality([&](const env::EnvState& s, const env::Goal&) { return sel.alpha(s); }, 200, 9);
  const PriorQuality q2 = prior_quality(sel, 200, 9);
  EXPECT_EQ(q1.recall, q2.recall);
}

TEST(Alpha, RejectsRhoOutsideUnitInterval) {
  EXPECT_THROW(SelectionOperator(small_model(), 1.0), InvalidInput);
  EXPECT_THROW(SelectionOperator(small_model(), -0.1), InvalidInput);
}

TEST(Quality, OracleSelectorIsPerfect) {
  const PriorQuality q = prior_quality(env::feasible_oracle, 500, 7);
  EXPECT_DOUBLE_EQ(q.recall, 1.0);
  EXPECT_DOUBLE_EQ(q.precision, 1.0);
  EXPECT_DOUBLE_EQ(q.infeasible_rate, 0.0);
}

TEST(Quality, FullSetHasPerfectRecall) {
  EXPECT_DOUBLE_EQ(prior_quality(SelectionOperator(small_model(), 0.0), 300, 8).recall, 1.0);
  EXPECT_DOUBLE_EQ(prior_quality(SelectionOperator::full(), 300, 8).recall, 1.0);
}

TEST(Quality, DeterministicGivenSeed) {
  const SelectionOperator sel(small_model(), 0.01);
  const PriorQuality a = prior_quality(sel, 200, 11), b = prior_quality(sel, 200, 11);
  EXPECT_EQ(a.recall, b.recall);
  EXPECT_EQ(a.precision, b.precision);
  EXPECT_THROW(prior_quality(sel, 0, 1), InvalidInput);
}

TEST(Checkpoint, SaveLoadRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "playprior_prior_test.ckpt";
  save_prior(*small_model(), path.string());
  const PriorModel m = load_prior(path.string());
  std::filesystem::remove(path);
  Rng rng(12);
  for (int i = 0; i < 20; ++i) {
    const env::EnvState s = env::sample_visited(rng).state;
    EXPECT_EQ(probs(m, s), probs(*small_model(), s));
  }
  EXPECT_EQ(m.steps, 4000);
  EXPECT_EQ(m.final_heldout_nll(), small_model()->final_heldout_nll());
  EXPECT_THROW(load_prior("/nonexistent/prior.ckpt"), ConfigError);
}
