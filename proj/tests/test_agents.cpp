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
#include <limits>

#include "playprior/agents.hpp"

using namespace playprior;
using namespace playprior::agents;

namespace {

// A prior whose output ignores the state: softmax(logits).
std::shared_ptr<const prior::PriorModel> constant_prior(const std::vector<double>& logits) {
  auto m = std::make_shared<prior::PriorModel>(prior::untrained_prior({4}));
  for (int a = 0; a < kNumPrimitives; ++a) m->net.biases.back()(a) = logits[static_cast<std::size_t>(a)];
  return m;
}

// Q networks that output `values` for every input.
QEnsemble constant_q(const std::vector<double>& values) {
  AgentConfig cfg;
  cfg.hidden = {4};
  Rng rng(0);
  QEnsemble q = QEnsemble::make(cfg, rng);
  for (auto* set : {&q.online, &q.target})
    for (auto& net : *set) {
      net.set_zero();
      for (int a = 0; a < kNumPrimitives; ++a) net.biases.back()(a) = values[static_cast<std::size_t>(a)];
    }
  return q;
}

AgentConfig small_config(Algo algo) {
  AgentConfig c = AgentConfig::for_algo(algo);
  c.hidden = {32, 32};
  c.batch = 32;
  c.initial_explore_steps = 200;
  c.learning_starts = 100;
  c.eval_every = 500;
  c.eval_episodes = 5;
  c.record_trace = true;
  return c;
}

double chi_square(const std::vector<int>& counts, const std::vector<double>& expected_p, int n) {
  double chi = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = expected_p[i] * n;
    chi += (counts[i] - e) * (counts[i] - e) / e;
  }
  return chi;
}

// Chi-square 0.99 quantiles by degrees of freedom.
double chi_square_critical(std::size_t dof) {
  static const double kTable[] = {0, 6.635, 9.210, 11.345, 13.277, 15.086, 16.812, 18.475, 20.090, 21.666};
  return kTable[dof];
}

const env::Task& some_task() {
  static const env::Task t = env::reset(std::uint64_t{3}, env::Band::Medium);
  return t;
}

Transition random_transition(Rng& rng) {
  const env::Task t = env::sample_visited(rng);
  const int a = uniform_index(rng, kNumPrimitives);
  const env::StepOutcome o = env::step(t.state, a, t.goal);
  Transition tr;
  tr.s = env::encode(t.state);
  tr.a = a;
  tr.sp = env::encode(o.next);
  tr.g = t.goal.target;
  tr.r = o.reward;
  tr.done = o.done;
  return tr;
}

}  // namespace

TEST(Algo, ParseNamesAndRejectUnknown) {
  for (Algo a : {Algo::ElfP, Algo::Ddqn, Algo::Her, Algo::Prefill, Algo::Dqfd, Algo::SoftElfP})
    EXPECT_EQ(parse_algo(algo_name(a)), a);
  EXPECT_THROW(parse_algo("spirl"), ConfigError);
}

TEST(Config, DefaultsAndValidation) {
  const AgentConfig c;
  EXPECT_EQ(c.gamma, 0.97);
  EXPECT_EQ(c.batch, 256);
  EXPECT_EQ(c.target_retention, 0.995);
  EXPECT_EQ(c.buffer_capacity, 1000000u);
  EXPECT_EQ(AgentConfig::for_algo(Algo::Prefill).gamma, 0.95);
  EXPECT_EQ(AgentConfig::for_algo(Algo::Her).her_k, 4);
  EXPECT_NEAR(epsilon_at(c, 20000), 0.5 * std::exp(-1.0), 1e-15);
  EXPECT_EQ(epsilon_at(c, 1000000), c.eps_min);
  AgentConfig no_floor = c;
  no_floor.eps_min = 0.0;
  EXPECT_NEAR(epsilon_at(no_floor, 100000), 0.5 * std::exp(-5.0), 1e-15);
  AgentConfig bad = c;
  bad.gamma = 1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(ActElfp, FullExplorationIsUniformOverAlpha) {
  // Actions 0, 4, 6, 7 carry mass above 0.01; the rest sit far below.
  const auto model = constant_prior({2, -9, -9, -9, 2, -9, 3, 1, -9, -9});
  const prior::SelectionOperator sel(model, 0.01);
  const ActionSet alpha = sel.alpha(some_task().state);
  ASSERT_EQ(alpha.to_vector(), (std::vector<int>{0, 4, 6, 7}));
  const QEnsemble q = constant_q(std::vector<double>(10, 0.0));
  Rng rng(1);
  std::vector<int> counts(4, 0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const int a = act_elfp(q, sel, some_task().state, some_task().goal, 1.0, rng);
    ASSERT_TRUE(alpha.contains(a));
    for (int k = 0; k < 4; ++k)
      if (alpha.nth(k) == a) ++counts[k];
  }
  EXPECT_LT(chi_square(counts, std::vector<double>(4, 0.25), n), chi_square_critical(3));
}

TEST(ActElfp, GreedyIgnoresMaskedOutMaximum) {
  const auto model = constant_prior({3, 3, -20, -20, -20, -20, -20, -20, -20, -20});
  const prior::SelectionOperator sel(model, 0.01);
  const QEnsemble q = constant_q({5, 1, 9, 0, 0, 0, 0, 0, 0, 0});
  Rng rng(2);
  EXPECT_EQ(act_elfp(q, sel, some_task().state, some_task().goal, 0.0, rng), 0);
}

TEST(ActElfp, RhoZeroMatchesUnmaskedGreedy) {
  Rng init(3);
  AgentConfig cfg;
  cfg.hidden = {16};
  const QEnsemble q = QEnsemble::make(cfg, init);
  const prior::SelectionOperator sel(constant_prior({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}), 0.0);
  Rng rng(4), states(5);
  for (int i = 0; i < 200; ++i) {
    const env::Task t = env::sample_visited(states);
    const QVector qs = nn::forward(q.online[0], q_input(t.state, t.goal));
    Eigen::Index best;
    qs.maxCoeff(&best);
    EXPECT_EQ(act_elfp(q, sel, t.state, t.goal, 0.0, rng), static_cast<int>(best));
  }
}

TEST(ActSoft, UniformPriorGivesPlainArgmax) {
  const prior::SelectionOperator sel(constant_prior(std::vector<double>(10, 0.0)), 0.01);
  const QEnsemble q = constant_q({0.2, 1.5, -3, 0.7, 1.4, 0, 0, 0, 0, 0});
  Rng rng(6);
  EXPECT_EQ(act_soft_elfp(q, sel, some_task().state, some_task().goal, 0.0, rng), 1);
}

TEST(ActSoft, PriorMassOnOneActionDominates) {
  const prior::SelectionOperator sel(constant_prior({-60, -60, 60, -60, -60, -60, -60, -60, -60, -60}), 0.01);
  const QEnsemble q = constant_q({9, 8, -5, 7, 6, 5, 4, 3, 2, 1});
  Rng rng(7);
  EXPECT_EQ(act_soft_elfp(q, sel, some_task().state, some_task().goal, 0.0, rng), 2);
}

TEST(ActSoft, FullExplorationSamplesThePrior) {
  const std::vector<double> logits{1.0, 0.5, 0.0, -0.5, 1.2, 0.3, -1.0, 0.8, 0.1, -0.2};
  const auto model = constant_prior(logits);
  const prior::SelectionOperator sel(model, 0.01);
  const nn::Vector p = sel.probs(some_task().state);
  const QEnsemble q = constant_q(std::vector<double>(10, 0.0));
  Rng rng(8);
  std::vector<int> counts(10, 0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(act_soft_elfp(q, sel, some_task().state, some_task().goal, 1.0, rng))];
  EXPECT_LT(chi_square(counts, std::vector<double>(p.data(), p.data() + 10), n), chi_square_critical(9));
}

TEST(Targets, TerminalTransitionIgnoresBootstrap) {
  const QEnsemble q = constant_q({100, 100, 100, 100, 100, 100, 100, 100, 100, 100});
  Rng rng(9);
  Transition t = random_transition(rng);
  t.r = 1.0;
  t.done = true;
  const auto y = masked_targets(q, make_batch({t}), 0.97);
  EXPECT_EQ(y[0][0], 1.0);
  EXPECT_EQ(y[1][0], 1.0);
}

TEST(Targets, MinimumOfTwoTargetNetsAtMaskedArgmax) {
  QEnsemble q = constant_q({0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  // Online nets prefer action 3 within the mask {1, 3}; action 5 is larger but masked out.
  for (auto& net : q.online) net.biases.back()(3) = 1.0, net.biases.back()(5) = 4.0;
  q.target[0].biases.back()(3) = 2.0;
  q.target[1].biases.back()(3) = 3.0;
  Rng rng(10);
  Transition t = random_transition(rng);
  t.r = 0.0;
  t.done = false;
  t.next_mask = ActionSet::single(1) | ActionSet::single(3);
  const auto y = masked_targets(q, make_batch({t}), 0.97);
  EXPECT_DOUBLE_EQ(y[0][0], 0.97 * 2.0);
  EXPECT_DOUBLE_EQ(y[1][0], 0.97 * 2.0);
  EXPECT_THROW(masked_targets(q, Batch{}, 0.97), InvalidInput);
}

TEST(Targets, FullMaskEqualsDoubleDqnTarget) {
  AgentConfig cfg;
  cfg.hidden = {16, 16};
  Rng init(11), rng(12);
  QEnsemble q = QEnsemble::make(cfg, init);
  q.target[0] = q.online[0];
  q.target[1] = q.online[0];
  q.online[1] = q.online[0];
  std::vector<Transition> ts;
  for (int i = 0; i < 64; ++i) ts.push_back(random_transition(rng));
  const Batch b = make_batch(ts);
  const auto y = masked_targets(q, b, 0.9);
  // Independent double-DQN target: r + gamma * Q'(s', argmax_a Q(s', a)).
  // Batched and single-column products round differently in the network scalar.
  const double tol = 16.0 * std::numeric_limits<QScalar>::epsilon();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const QVector x = q_input(ts[i].sp, ts[i].g);
    const QVector on = nn::forward(q.online[0], x);
    const QVector tg = nn::forward(q.target[0], x);
    int best = 0;
    for (int a = 1; a < kNumPrimitives; ++a)
      if (on(a) > on(best)) best = a;
    const double expect = ts[i].r + (ts[i].done ? 0.0 : 0.9 * tg(best));
    EXPECT_NEAR(y[0][i], expect, tol);
    EXPECT_NEAR(y[1][i], expect, tol);
  }
}

TEST(TdStep, TargetsStartEqualAndUnderflowIsNoop) {
  AgentConfig cfg;
  cfg.hidden = {8};
  cfg.batch = 4;
  Rng rng(13);
  QEnsemble q = QEnsemble::make(cfg, rng);
  for (int j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < q.online[j].num_params(); ++i) ASSERT_EQ(q.online[j].at(i), q.target[j].at(i));
  ReplayBuffer buf(10);
  buf.push(random_transition(rng));
  EXPECT_FALSE(td_step(q, buf, cfg, rng).has_value());
  EXPECT_EQ(q.adam[0].t, 0);
}

TEST(TdStep, RepeatedTerminalTransitionConvergesToOne) {
  AgentConfig cfg;
  cfg.hidden = {32, 32};
  cfg.batch = 32;
  Rng rng(14);
  QEnsemble q = QEnsemble::make(cfg, rng);
  Transition t = random_transition(rng);
  t.r = 1.0;
  t.done = true;
  ReplayBuffer buf(100);
  for (int i = 0; i < 32; ++i) buf.push(t);
  for (int i = 0; i < 5000; ++i) {
    const auto l = td_step(q, buf, cfg, rng);
    ASSERT_TRUE(l.has_value());
  }
  const QVector x = q_input(t.s, t.g);
  EXPECT_NEAR(nn::forward(q.online[0], x)(t.a), 1.0, 0.05);
  EXPECT_NEAR(nn::forward(q.online[1], x)(t.a), 1.0, 0.05);
}

TEST(TdStep, SoftUpdateMovesTargetsByOneMinusRetention) {
  AgentConfig cfg;
  cfg.hidden = {8};
  cfg.batch = 8;
  Rng rng(15);
  QEnsemble q = QEnsemble::make(cfg, rng);
  ReplayBuffer buf(100);
  for (int i = 0; i < 20; ++i) buf.push(random_transition(rng));
  const QEnsemble before = q;
  td_step(q, buf, cfg, rng);
  const double tol = 4.0 * std::numeric_limits<QScalar>::epsilon();
  for (int j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < q.target[j].num_params(); ++i)
      ASSERT_NEAR(q.target[j].at(i), 0.995 * before.target[j].at(i) + 0.005 * q.online[j].at(i), tol);
}

TEST(Replay, FifoEvictionAndCapacity) {
  ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) {
    Transition t;
    t.a = i;
    buf.push(t);
  }
  EXPECT_EQ(buf.size(), 3u);
  EXPECT_EQ(buf.total_inserted(), 5u);
  std::vector<int> kept;
  for (std::size_t i = 0; i < buf.size(); ++i) kept.push_back(buf[i].a);
  std::sort(kept.begin(), kept.end());
  EXPECT_EQ(kept, (std::vector<int>{2, 3, 4}));
  EXPECT_THROW(ReplayBuffer(0), InvalidInput);
}

TEST(Replay, SamplingIsUniform) {
  ReplayBuffer buf(50);
  for (int i = 0; i < 50; ++i) buf.push(Transition{});
  Rng rng(16);
  std::vector<int> counts(50, 0);
  const int n = 200000;
  for (auto i : buf.sample_indices(n, rng)) ++counts[i];
  // One chi-square test over all cells; 0.99 quantile at 49 degrees of freedom.
  EXPECT_LT(chi_square(counts, std::vector<double>(50, 1.0 / 50), n), 74.919);
}

TEST(Her, ZeroCopiesIsIdentity) {
  Rng rng(17);
  std::vector<Transition> ep;
  for (int i = 0; i < 10; ++i) ep.push_back(random_transition(rng));
  const auto out = her_relabel(ep, 0, rng);
  ASSERT_EQ(out.size(), ep.size());
  for (std::size_t i = 0; i < ep.size(); ++i) EXPECT_EQ(out[i].g, ep[i].g);
}

TEST(Her, CopiesUseFutureAchievedGoalsAndRecomputedRewards) {
  Rng rng(18);
  // A real episode so block positions change over time.
  std::vector<Transition> ep;
  env::Task task = env::reset(rng, env::Band::Medium);
  for (int t = 0; t < 40; ++t) {
    const ActionSet f = env::feasible_oracle(task.state, task.goal);
    const int a = f.nth(uniform_index(rng, f.size()));
    const env::StepOutcome o = env::step(task.state, a, task.goal);
    ep.push_back({env::encode(task.state), a, static_cast<double>(o.reward), env::encode(o.next), task.goal.target,
                  o.done, ActionSet::full(), false});
    task.state = o.next;
  }
  const int k = 3;
  const auto out = her_relabel(ep, k, rng);
  ASSERT_EQ(out.size(), (k + 1) * ep.size());
  for (std::size_t t = 0; t < ep.size(); ++t) {
    EXPECT_EQ(out[t * (k + 1)].g, ep[t].g);  // the real transition comes first
    for (int c = 1; c <= k; ++c) {
      const Transition& r = out[t * (k + 1) + static_cast<std::size_t>(c)];
      bool from_future = false;
      for (std::size_t f = t; f < ep.size(); ++f)
        from_future = from_future || (r.g == GoalVec{ep[f].sp[4], ep[f].sp[5], ep[f].sp[6]});
      EXPECT_TRUE(from_future);
      EXPECT_EQ(r.r, env::reward(env::decode(r.sp), env::Goal{r.g}));
      EXPECT_EQ(r.done, r.r == 1.0);
    }
  }
  // The final transition can only be relabeled with its own achieved goal: reward 1.
  for (int c = 1; c <= k; ++c) EXPECT_EQ(out[(ep.size() - 1) * (k + 1) + static_cast<std::size_t>(c)].r, 1.0);
  EXPECT_THROW(her_relabel(ep, -1, rng), InvalidInput);
}

TEST(Prefill, InsertsEveryRecordWithBandGoals) {
  const play::PlayDataset ds = play::collect_play(10000, 19);
  ReplayBuffer buf(1000000);
  Rng rng(20);
  EXPECT_EQ(prefill(buf, ds, env::Band::Medium, rng), 10000u);
  ASSERT_EQ(buf.size(), 10000u);
  int successes = 0;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const Transition& t = buf[i];
    ASSERT_EQ(t.r, env::reward(env::decode(t.sp), env::Goal{t.g}));
    successes += t.r == 1.0;
    ASSERT_FALSE(t.demo);
  }
  // Independent estimate: block positions of play next-states against fresh Medium goals.
  Rng check(21);
  int expected = 0;
  for (const auto& r : ds.records)
    expected += env::reward(env::decode(r.sp), env::reset(check, env::Band::Medium).goal);
  EXPECT_NEAR(successes / 1e4, expected / 1e4, 0.02);
}

TEST(Dqfd, MarginTermCases) {
  Rng rng(22);
  std::vector<Transition> ts;
  for (int i = 0; i < 6; ++i) {
    Transition t = random_transition(rng);
    t.a = 2;
    t.demo = i % 2 == 0;
    ts.push_back(t);
  }
  const Batch b = make_batch(ts);
  // Uniform Q: every demo sample contributes exactly the margin.
  const QEnsemble flat = constant_q(std::vector<double>(10, 0.3));
  EXPECT_NEAR(dqfd_margin(flat.online[0], b, 0.05).loss, 0.05, 1e-15);
  // Expert action already ahead by more than the margin.
  const QEnsemble ahead = constant_q({0, 0, 1, 0, 0, 0, 0, 0, 0, 0});
  EXPECT_EQ(dqfd_margin(ahead.online[0], b, 0.05).loss, 0.0);
  // No demo samples: zero.
  std::vector<Transition> plain = ts;
  for (auto& t : plain) t.demo = false;
  EXPECT_EQ(dqfd_margin(flat.online[0], make_batch(plain), 0.05).loss, 0.0);
}

TEST(Dqfd, ZeroWeightsReduceToTdLoss) {
  AgentConfig cfg = AgentConfig::for_algo(Algo::Dqfd);
  cfg.hidden = {16};
  cfg.dqfd_lambda2 = 0.0;
  cfg.dqfd_lambda3 = 0.0;
  Rng rng(23);
  const QEnsemble q = QEnsemble::make(cfg, rng);
  std::vector<Transition> ts;
  for (int i = 0; i < 16; ++i) ts.push_back(random_transition(rng)), ts.back().demo = i % 3 == 0;
  const Batch b = make_batch(ts);
  const auto y = masked_targets(q, b, cfg.gamma);
  const QLossAndGrad d = dqfd_loss(q.online[0], b, y[0], cfg);
  const QLossAndGrad t = nn::td_batch(q.online[0], b.x, b.actions, y[0]);
  EXPECT_EQ(d.loss, t.loss);
  for (std::size_t i = 0; i < d.grads.num_params(); ++i) ASSERT_EQ(d.grads.at(i), t.grads.at(i));
}

TEST(Dqfd, GradientMatchesFiniteDifferences) {
  AgentConfig cfg = AgentConfig::for_algo(Algo::Dqfd);
  cfg.hidden = {6};
  cfg.dqfd_lambda2 = 0.7;  // large weights so both extra terms matter
  cfg.dqfd_lambda3 = 0.1;
  Rng rng(24);
  QEnsemble q = QEnsemble::make(cfg, rng);
  std::vector<Transition> ts;
  for (int i = 0; i < 5; ++i) ts.push_back(random_transition(rng)), ts.back().demo = i != 2;
  const Batch b = make_batch(ts);
  const std::vector<double> y{0.3, -0.2, 0.9, 0.0, 0.5};
  nn::DenseNet net = q.online[0].cast<double>();
  const nn::Gradients g = dqfd_loss(net, b, y, cfg).grads;
  double worst = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < net.num_params(); ++i) {
    const double orig = net.at(i);
    net.at(i) = orig + 1e-6;
    const double lp = dqfd_loss(net, b, y, cfg).loss;
    net.at(i) = orig - 1e-6;
    const double lm = dqfd_loss(net, b, y, cfg).loss;
    net.at(i) = orig;
    const double fd = (lp - lm) / 2e-6;
    worst = std::max(worst, std::abs(fd - g.at(i)));
    ref = std::max(ref, std::abs(fd));
  }
  EXPECT_LT(worst / ref, 1e-4);
}

TEST(Trainer, ElfpActionsStayInsideAlpha) {
  const auto model = constant_prior({2, -9, -9, -9, 2, 2, 3, 1, -9, -9});
  AgentConfig cfg = small_config(Algo::ElfP);
  AgentInputs in;
  in.selector = prior::SelectionOperator(model, 0.01);
  const TrainResult r = train(cfg, in, 1, 1500);
  ASSERT_EQ(r.actions.size(), 1500u);
  for (std::size_t i = 0; i < r.actions.size(); ++i)
    ASSERT_TRUE(in.selector.alpha(env::decode(r.states[i])).contains(r.actions[i]));
}

TEST(Trainer, RhoZeroElfpIsBitwiseDdqn) {
  AgentInputs with_prior;
  with_prior.selector = prior::SelectionOperator(constant_prior({1, -3, 0, 2, -1, 0.5, 0, 0, 1, -2}), 0.0);
  AgentConfig ec = small_config(Algo::ElfP), dc = small_config(Algo::Ddqn);
  const TrainResult e = train(ec, with_prior, 5, 1500);
  const TrainResult d = train(dc, AgentInputs{}, 5, 1500);
  EXPECT_EQ(e.actions, d.actions);
  ASSERT_EQ(e.losses.size(), d.losses.size());
  for (std::size_t i = 0; i < e.losses.size(); ++i) ASSERT_EQ(e.losses[i], d.losses[i]);
  ASSERT_EQ(e.rows.size(), d.rows.size());
  for (std::size_t i = 0; i < e.rows.size(); ++i) {
    EXPECT_EQ(e.rows[i].success_rate, d.rows[i].success_rate);
    EXPECT_EQ(e.rows[i].cumulative_infeasible, d.rows[i].cumulative_infeasible);
    EXPECT_EQ(e.rows[i].mean_loss, d.rows[i].mean_loss);
  }
}

TEST(Trainer, LossesFiniteAndNonnegative) {
  AgentConfig cfg = small_config(Algo::Ddqn);
  const TrainResult r = train(cfg, AgentInputs{}, 6, 10000);
  ASSERT_EQ(r.losses.size(), static_cast<std::size_t>(10000 - cfg.learning_starts));
  for (double l : r.losses) ASSERT_TRUE(std::isfinite(l) && l >= 0.0);
  ASSERT_EQ(r.rows.size(), 20u);
  for (std::size_t i = 1; i < r.rows.size(); ++i) EXPECT_GT(r.rows[i].step, r.rows[i - 1].step);
}

TEST(Trainer, HerInsertsKPlusOnePerStep) {
  for (int k : {0, 2, 4}) {
    AgentConfig cfg = small_config(Algo::Her);
    cfg.her_k = k;
    Trainer tr(cfg, AgentInputs{}, 7);
    tr.train(777);
    EXPECT_EQ(tr.buffer().total_inserted(),
              static_cast<std::size_t>((k + 1) * 777 - k * tr.open_episode_length()));
  }
}

TEST(Trainer, HerZeroEqualsPlainElfp) {
  const auto model = constant_prior({2, -9, 1, -9, 2, 2, 3, 1, -9, 0});
  AgentInputs in;
  in.selector = prior::SelectionOperator(model, 0.01);
  AgentConfig plain = small_config(Algo::ElfP), her = small_config(Algo::ElfP);
  her.her_k = 0;
  const TrainResult a = train(plain, in, 8, 1200), b = train(her, in, 8, 1200);
  EXPECT_EQ(a.actions, b.actions);
  EXPECT_EQ(a.losses, b.losses);
}

TEST(Trainer, EvaluationDoesNotPerturbTraining) {
  AgentConfig often = small_config(Algo::Ddqn), rarely = small_config(Algo::Ddqn);
  often.eval_every = 100;
  rarely.eval_every = 5000;
  const TrainResult a = train(often, AgentInputs{}, 9, 1200), b = train(rarely, AgentInputs{}, 9, 1200);
  EXPECT_EQ(a.actions, b.actions);
  EXPECT_EQ(a.losses, b.losses);

  Trainer tr(often, AgentInputs{}, 9);
  tr.train(300);
  const auto inserted = tr.buffer().total_inserted();
  const QEnsemble before = tr.q();
  tr.evaluate(10, 1234);
  EXPECT_EQ(tr.buffer().total_inserted(), inserted);
  EXPECT_EQ(tr.steps_done(), 300);
  for (std::size_t i = 0; i < before.online[0].num_params(); ++i) ASSERT_EQ(before.online[0].at(i), tr.q().online[0].at(i));
}

TEST(Trainer, DeterministicGivenSeed) {
  AgentConfig cfg = small_config(Algo::Ddqn);
  const TrainResult a = train(cfg, AgentInputs{}, 10, 800), b = train(cfg, AgentInputs{}, 10, 800);
  EXPECT_EQ(a.actions, b.actions);
  EXPECT_EQ(a.losses, b.losses);
}

TEST(Trainer, RequiredInputsAreChecked) {
  EXPECT_THROW(Trainer(small_config(Algo::Prefill), AgentInputs{}, 1), ConfigError);
  EXPECT_THROW(Trainer(small_config(Algo::SoftElfP), AgentInputs{}, 1), ConfigError);
  EXPECT_THROW(train(small_config(Algo::Ddqn), AgentInputs{}, 1, 0), InvalidInput);
}

TEST(Trainer, PrefillAndDqfdSeedTheBuffer) {
  const play::PlayDataset ds = play::collect_play(600, 25);
  AgentInputs in;
  in.dataset = &ds;
  Trainer p(small_config(Algo::Prefill), in, 1);
  EXPECT_EQ(p.buffer().size(), 600u);
  Trainer d(small_config(Algo::Dqfd), in, 1);
  EXPECT_TRUE(d.buffer()[0].demo);
  d.train(300);
  EXPECT_EQ(d.buffer().size(), 900u);
}
