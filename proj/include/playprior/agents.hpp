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

// Goal-conditioned Q-learning agents over the desk primitives.
//
// Every algorithm shares one clipped double-Q learner (two online and two
// target networks over state ++ goal). They differ only in
//   * which actions the behavior policy may pick (alpha(s) or all ten),
//   * which actions the bootstrap maximizes over,
//   * what is in the replay buffer (hindsight copies, play transitions),
//   * extra loss terms (large-margin demonstration loss).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "playprior/env.hpp"
#include "playprior/nn.hpp"
#include "playprior/play.hpp"
#include "playprior/prior.hpp"

namespace playprior::agents {

enum class Algo { ElfP, Ddqn, Her, Prefill, Dqfd, SoftElfP };

inline const char* algo_name(Algo a) {
  switch (a) {
    case Algo::ElfP: return "elfp";
    case Algo::Ddqn: return "ddqn";
    case Algo::Her: return "her";
    case Algo::Prefill: return "prefill";
    case Algo::Dqfd: return "dqfd";
    case Algo::SoftElfP: return "soft-elfp";
  }
  return "?";
}

inline Algo parse_algo(const std::string& s) {
  for (Algo a : {Algo::ElfP, Algo::Ddqn, Algo::Her, Algo::Prefill, Algo::Dqfd, Algo::SoftElfP})
    if (s == algo_name(a)) return a;
  throw ConfigError("unknown algorithm '" + s + "' (expected elfp|ddqn|her|prefill|dqfd|soft-elfp)");
}

/// Whether the algorithm consumes play data (for the prior or the replay buffer).
inline bool needs_dataset(Algo a) {
  return a == Algo::ElfP || a == Algo::SoftElfP || a == Algo::Prefill || a == Algo::Dqfd;
}

inline bool uses_prior(Algo a) { return a == Algo::ElfP || a == Algo::SoftElfP; }

struct AgentConfig {
  Algo algo = Algo::ElfP;
  std::vector<int> hidden{128, 256};
  double gamma = 0.97;
  double lr = 1e-4;
  int batch = 256;
  double eps0 = 0.5;
  double eps_decay = 5e-5;
  double eps_min = 0.05;  // exploration floor; 0 gives the pure exponential decay
  double rho = 0.01;
  double target_retention = 0.995;
  int horizon = env::kHorizon;
  long initial_explore_steps = 2000;
  long learning_starts = 1000;
  std::size_t buffer_capacity = 1'000'000;
  int update_every = 1;
  int her_k = 0;
  double dqfd_lambda2 = 1e-3;
  double dqfd_margin = 0.05;
  double dqfd_lambda3 = 1e-5;
  env::Band band = env::Band::Medium;
  long eval_every = 2500;
  int eval_episodes = 50;
  /// Stop once an evaluation reaches this success rate (> 1 disables early stopping).
  double stop_at_success = 2.0;
  /// Record the action and loss streams (for reproducibility tests).
  bool record_trace = false;

  /// Per-algorithm defaults from the baseline descriptions.
  static AgentConfig for_algo(Algo a) {
    AgentConfig c;
    c.algo = a;
    if (a == Algo::Prefill || a == Algo::Dqfd) c.gamma = 0.95;
    if (a == Algo::Her) c.her_k = 4;
    return c;
  }

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
    if (!(lr > 0.0) || batch <= 0 || !(eps0 >= 0.0 && eps0 <= 1.0) || eps_decay < 0.0)
      throw ConfigError("lr, batch must be positive and eps0 in [0,1]");
    if (!(eps_min >= 0.0 && eps_min <= eps0)) throw ConfigError("eps_min must lie in [0, eps0]");
    if (!(target_retention > 0.0 && target_retention < 1.0)) throw ConfigError("target retention must lie in (0,1)");
    if (horizon <= 0 || update_every <= 0 || her_k < 0 || buffer_capacity == 0 || eval_every <= 0 ||
        eval_episodes <= 0)
      throw ConfigError("horizon, cadences and capacities must be positive");
  }
};

inline double epsilon_at(const AgentConfig& c, long step) {
  return std::max(c.eps_min, c.eps0 * std::exp(-c.eps_decay * static_cast<double>(step)));
}

// ---------------------------------------------------------------------------
// Replay

using StateVec = play::StateVec;
using GoalVec = std::array<double, env::kGoalDim>;

struct Transition {
  StateVec s{};
  int a = 0;
  double r = 0.0;
  StateVec sp{};
  GoalVec g{};
  bool done = false;
  /// Actions the bootstrap may maximize over at sp (alpha(sp), or all).
  ActionSet next_mask = ActionSet::full();
  /// Demonstration (play) transition, for the large-margin loss.
  bool demo = false;
};

/// FIFO ring buffer with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw InvalidInput("replay capacity must be positive");
  }

  void push(const Transition& t) {
    if (data_.size() < capacity_) {
      data_.push_back(t);
    } else {
      data_[next_] = t;
    }
    next_ = (next_ + 1) % capacity_;
    ++inserted_;
  }

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t total_inserted() const { return inserted_; }
  const Transition& operator[](std::size_t i) const { return data_[i]; }

  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const {
    std::vector<std::size_t> idx(n);
    std::uniform_int_distribution<std::size_t> dist(0, data_.size() - 1);
    for (auto& i : idx) i = dist(rng);
    return idx;
  }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::size_t inserted_ = 0;
  std::vector<Transition> data_;
};

// ---------------------------------------------------------------------------
// Q networks

inline constexpr int kQInputDim = env::kStateDim + env::kGoalDim;

#ifndef PLAYPRIOR_Q_SCALAR
#define PLAYPRIOR_Q_SCALAR float
#endif

/// Q-networks train in single precision by default; define PLAYPRIOR_Q_SCALAR
/// as double to change that. Targets and losses are accumulated in double.
using QScalar = PLAYPRIOR_Q_SCALAR;
using QNet = nn::BasicParamSet<QScalar>;
using QAdam = nn::BasicAdamState<QScalar>;
using QVector = nn::VectorT<QScalar>;
using QMatrix = nn::MatrixT<QScalar>;
using QLossAndGrad = nn::BasicLossAndGrad<QScalar>;

struct QEnsemble {
  std::array<QNet, 2> online;
  std::array<QNet, 2> target;
  std::array<QAdam, 2> adam;

  static QEnsemble make(const AgentConfig& cfg, Rng& rng) {
    std::vector<int> sizes{kQInputDim};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(kNumPrimitives);
    QEnsemble q;
    for (int j = 0; j < 2; ++j) {
      q.online[j] = nn::glorot_uniform<QScalar>(sizes, rng);
      q.target[j] = q.online[j];
      q.adam[j] = QAdam(q.online[j], cfg.lr);
    }
    return q;
  }
};

inline QVector q_input(const StateVec& s, const GoalVec& g) {
  QVector x(kQInputDim);
  for (int i = 0; i < env::kStateDim; ++i) x(i) = static_cast<QScalar>(s[i]);
  for (int i = 0; i < env::kGoalDim; ++i) x(env::kStateDim + i) = static_cast<QScalar>(g[i]);
  return x;
}

inline QVector q_input(const env::EnvState& s, const env::Goal& g) { return q_input(env::encode(s), g.target); }

/// First index of the largest entry among `mask`.
template <class Derived>
int masked_argmax(const Eigen::MatrixBase<Derived>& values, ActionSet mask) {
  int best = -1;
  for (int a = 0; a < kNumPrimitives; ++a)
    if (mask.contains(a) && (best < 0 || values(a) > values(best))) best = a;
  return best;
}

/// Epsilon-greedy over alpha(s); greedy choices use the first online network.
inline int act_elfp(const QEnsemble& q, const prior::SelectionOperator& sel, const env::EnvState& s,
                    const env::Goal& g, double eps, Rng& rng, std::optional<ActionSet> cached_alpha = {}) {
  const ActionSet mask = cached_alpha ? *cached_alpha : sel.alpha(s);
  if (uniform01(rng) < eps) return mask.nth(uniform_index(rng, mask.size()));
  return masked_argmax(nn::forward(q.online[0], q_input(s, g)), mask);
}

inline int sample_categorical(const nn::Vector& p, Rng& rng) {
  const double u = uniform01(rng) * p.sum();
  double acc = 0.0;
  for (int a = 0; a < p.size(); ++a) {
    acc += p(a);
    if (u < acc) return a;
  }
  return static_cast<int>(p.size()) - 1;
}

/// Soft prior integration: explore by sampling the prior, exploit argmax softmax(Q) * prior.
inline int act_soft_elfp(const QEnsemble& q, const prior::SelectionOperator& sel, const env::EnvState& s,
                         const env::Goal& g, double eps, Rng& rng) {
  const nn::Vector p = sel.probs(s);
  if (uniform01(rng) < eps) return sample_categorical(p, rng);
  const nn::Vector w = nn::softmax(nn::forward(q.online[0], q_input(s, g))).cwiseProduct(p);
  return masked_argmax(w, ActionSet::full());
}

// ---------------------------------------------------------------------------
// Targets and losses

struct Batch {
  QMatrix x;       // s ++ g, one column per sample
  QMatrix x_next;  // sp ++ g
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<bool> dones;
  std::vector<ActionSet> next_masks;
  std::vector<bool> demo;

  std::size_t size() const { return actions.size(); }
};

inline Batch make_batch(const std::vector<Transition>& ts) {
  Batch b;
  const auto n = static_cast<Eigen::Index>(ts.size());
  b.x.resize(kQInputDim, n);
  b.x_next.resize(kQInputDim, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const Transition& t = ts[static_cast<std::size_t>(c)];
    b.x.col(c) = q_input(t.s, t.g);
    b.x_next.col(c) = q_input(t.sp, t.g);
    b.actions.push_back(t.a);
    b.rewards.push_back(t.r);
    b.dones.push_back(t.done);
    b.next_masks.push_back(t.next_mask);
    b.demo.push_back(t.demo);
  }
  return b;
}

/// y_j = r + gamma (1 - done) min_i Q'_i(sp, argmax_{a in mask(sp)} Q_j(sp, a)).
inline std::array<std::vector<double>, 2> masked_targets(const QEnsemble& q, const Batch& b, double gamma) {
  if (b.size() == 0) throw InvalidInput("masked_targets: empty batch");
  const QMatrix t1 = nn::forward_batch(q.target[0], b.x_next);
  const QMatrix t2 = nn::forward_batch(q.target[1], b.x_next);
  std::array<std::vector<double>, 2> y;
  for (int j = 0; j < 2; ++j) {
    const QMatrix qn = nn::forward_batch(q.online[j], b.x_next);
    y[j].resize(b.size());
    for (std::size_t c = 0; c < b.size(); ++c) {
      const auto col = static_cast<Eigen::Index>(c);
      const int a_star = masked_argmax(qn.col(col), b.next_masks[c]);
      const double boot = static_cast<double>(std::min(t1(a_star, col), t2(a_star, col)));
      y[j][c] = b.rewards[c] + (b.dones[c] ? 0.0 : gamma * boot);
    }
  }
  return y;
}

/// Large-margin term averaged over demonstration samples:
/// mean_demo [ max_a (Q(s,a) + m 1{a != a_E}) - Q(s,a_E) ].
/// Templated on the network scalar so double copies can be gradient-checked.
template <class T>
nn::BasicLossAndGrad<T> dqfd_margin(const nn::BasicParamSet<T>& net, const Batch& b, double margin) {
  const nn::BasicActivations<T> cache = nn::forward_cache(net, b.x.template cast<T>());
  const nn::MatrixT<T>& qv = cache.acts.back();
  nn::MatrixT<T> d = nn::MatrixT<T>::Zero(qv.rows(), qv.cols());
  std::size_t n_demo = 0;
  double loss = 0.0;
  for (std::size_t c = 0; c < b.size(); ++c) n_demo += b.demo[c] ? 1 : 0;
  if (n_demo == 0) return {0.0, nn::zeros_like(net)};
  for (std::size_t c = 0; c < b.size(); ++c) {
    if (!b.demo[c]) continue;
    const auto col = static_cast<Eigen::Index>(c);
    const int ae = b.actions[c];
    int best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < kNumPrimitives; ++a) {
      const double v = static_cast<double>(qv(a, col)) + (a == ae ? 0.0 : margin);
      if (v > best_v) best_v = v, best = a;
    }
    loss += best_v - static_cast<double>(qv(ae, col));
    d(best, col) += static_cast<T>(1.0 / static_cast<double>(n_demo));
    d(ae, col) -= static_cast<T>(1.0 / static_cast<double>(n_demo));
  }
  return {loss / static_cast<double>(n_demo), nn::backward(net, cache, d)};
}

/// TD loss + lambda2 * margin loss (demo samples only) + lambda3 * sum of squared parameters.
template <class T>
nn::BasicLossAndGrad<T> dqfd_loss(const nn::BasicParamSet<T>& net, const Batch& b, const std::vector<double>& targets,
                                  const AgentConfig& cfg) {
  nn::BasicLossAndGrad<T> td = nn::td_batch(net, b.x.template cast<T>(), b.actions, targets);
  if (cfg.dqfd_lambda2 != 0.0) {
    const nn::BasicLossAndGrad<T> m = dqfd_margin(net, b, cfg.dqfd_margin);
    td.loss += cfg.dqfd_lambda2 * m.loss;
    nn::add_scaled(td.grads, m.grads, cfg.dqfd_lambda2);
  }
  if (cfg.dqfd_lambda3 != 0.0) {
    td.loss += cfg.dqfd_lambda3 * net.sum_squares();
    nn::add_scaled(td.grads, net, 2.0 * cfg.dqfd_lambda3);
  }
  return td;
}

/// One gradient step on both online networks, then Polyak-averaged targets.
/// Returns the mean of the two losses, or nullopt when the buffer holds fewer than a batch.
inline std::optional<double> td_step(QEnsemble& q, const ReplayBuffer& buffer, const AgentConfig& cfg, Rng& rng) {
  if (buffer.size() < static_cast<std::size_t>(cfg.batch)) {
    std::cerr << "td_step: buffer holds " << buffer.size() << " < batch " << cfg.batch << "; skipping\n";
    return std::nullopt;
  }
  std::vector<Transition> ts;
  ts.reserve(static_cast<std::size_t>(cfg.batch));
  for (auto i : buffer.sample_indices(static_cast<std::size_t>(cfg.batch), rng)) ts.push_back(buffer[i]);
  const Batch b = make_batch(ts);
  const auto y = masked_targets(q, b, cfg.gamma);
  double total = 0.0;
  for (int j = 0; j < 2; ++j) {
    const QLossAndGrad lg =
        cfg.algo == Algo::Dqfd ? dqfd_loss(q.online[j], b, y[j], cfg) : nn::td_batch(q.online[j], b.x, b.actions, y[j]);
    nn::adam_step(q.online[j], lg.grads, q.adam[j]);
    total += lg.loss;
  }
  for (int j = 0; j < 2; ++j) nn::soft_update(q.target[j], q.online[j], cfg.target_retention);
  return total / 2.0;
}

// ---------------------------------------------------------------------------
// Hindsight relabeling and prefill

/// k copies of each transition with the goal replaced by the block position achieved at a
/// uniformly drawn later step (t' in [t, T-1], using s'_{t'}), reward recomputed.
inline std::vector<Transition> her_copies(const std::vector<Transition>& episode, int k, Rng& rng) {
  if (k < 0) throw InvalidInput("relabel ratio must be >= 0");
  std::vector<Transition> out;
  if (k == 0) return out;
  out.reserve(episode.size() * static_cast<std::size_t>(k));
  const int n = static_cast<int>(episode.size());
  for (int t = 0; t < n; ++t) {
    for (int c = 0; c < k; ++c) {
      const int f = t + uniform_index(rng, n - t);
      const StateVec& achieved = episode[static_cast<std::size_t>(f)].sp;
      Transition r = episode[static_cast<std::size_t>(t)];
      r.g = {achieved[4], achieved[5], achieved[6]};
      const env::EnvState sp = env::decode(r.sp);
      r.r = env::reward(sp, env::Goal{r.g});
      r.done = r.r == 1.0;
      out.push_back(r);
    }
  }
  return out;
}

/// Each real transition followed by its k relabeled copies.
inline std::vector<Transition> her_relabel(const std::vector<Transition>& episode, int k, Rng& rng) {
  const std::vector<Transition> copies = her_copies(episode, k, rng);
  std::vector<Transition> out;
  out.reserve(episode.size() + copies.size());
  for (std::size_t t = 0; t < episode.size(); ++t) {
    out.push_back(episode[t]);
    for (int c = 0; c < k; ++c) out.push_back(copies[t * static_cast<std::size_t>(k) + static_cast<std::size_t>(c)]);
  }
  return out;
}

/// Inserts play records as transitions with goals drawn from the band's task distribution.
/// No hindsight relabeling. Returns the number inserted.
inline std::size_t prefill(ReplayBuffer& buffer, const play::PlayDataset& ds, env::Band band, Rng& rng,
                           bool mark_demo = false) {
  for (const auto& rec : ds.records) {
    Transition t;
    t.s = rec.s;
    t.a = rec.a;
    t.sp = rec.sp;
    t.g = env::reset(rng, band).goal.target;
    t.r = env::reward(env::decode(rec.sp), env::Goal{t.g});
    t.done = t.r == 1.0;
    t.next_mask = ActionSet::full();
    t.demo = mark_demo;
    buffer.push(t);
  }
  return ds.records.size();
}

// ---------------------------------------------------------------------------
// Training loop

struct MetricsRow {
  long step = 0;
  double success_rate = 0.0;
  long cumulative_infeasible = 0;
  double mean_loss = 0.0;
  double epsilon = 0.0;
};

struct TrainResult {
  std::vector<MetricsRow> rows;
  // Filled when record_trace is set.
  std::vector<StateVec> states;
  std::vector<int> actions;
  std::vector<double> losses;
  long steps_run = 0;  // total environment steps of the run so far

  /// First evaluated step with success >= threshold.
  std::optional<long> steps_to(double threshold) const {
    for (const auto& r : rows)
      if (r.success_rate >= threshold) return r.step;
    return std::nullopt;
  }
};

/// Everything an algorithm needs besides the environment.
struct AgentInputs {
  prior::SelectionOperator selector = prior::SelectionOperator::full();
  const play::PlayDataset* dataset = nullptr;
};

class Trainer {
 public:
  Trainer(AgentConfig cfg, AgentInputs in, std::uint64_t seed)
      : cfg_(std::move(cfg)),
        in_(std::move(in)),
        seed_(seed),
        init_rng_(derive_seed(seed, 0)),
        env_rng_(derive_seed(seed, 1)),
        act_rng_(derive_seed(seed, 2)),
        replay_rng_(derive_seed(seed, 3)),
        her_rng_(derive_seed(seed, 4)),
        buffer_(cfg_.buffer_capacity) {
    cfg_.validate();
    if (cfg_.algo == Algo::SoftElfP && !in_.selector.has_model())
      throw ConfigError("soft-elfp requires a trained prior");
    if ((cfg_.algo == Algo::Prefill || cfg_.algo == Algo::Dqfd) && in_.dataset == nullptr)
      throw ConfigError(std::string(algo_name(cfg_.algo)) + " requires a play dataset");
    q_ = QEnsemble::make(cfg_, init_rng_);
    if (cfg_.algo == Algo::Prefill || cfg_.algo == Algo::Dqfd) {
      Rng prefill_rng(derive_seed(seed, 5));
      prefill(buffer_, *in_.dataset, cfg_.band, prefill_rng, cfg_.algo == Algo::Dqfd);
    }
  }

  const QEnsemble& q() const { return q_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const AgentConfig& config() const { return cfg_; }

  /// Actions the behavior policy may take in `s`.
  ActionSet behavior_set(const env::EnvState& s) const {
    return cfg_.algo == Algo::ElfP ? in_.selector.alpha(s) : ActionSet::full();
  }

  /// Actions the bootstrap maximizes over at a next state.
  ActionSet backup_set(const env::EnvState& sp) const { return behavior_set(sp); }

  int greedy_action(const env::EnvState& s, const env::Goal& g) const {
    if (cfg_.algo == Algo::SoftElfP) {
      const nn::Vector w =
          nn::softmax(nn::forward(q_.online[0], q_input(s, g))).cwiseProduct(in_.selector.probs(s));
      return masked_argmax(w, ActionSet::full());
    }
    return masked_argmax(nn::forward(q_.online[0], q_input(s, g)), behavior_set(s));
  }

  /// Success rate of the greedy policy over `episodes` fresh tasks. Touches neither the
  /// replay buffer, the exploration schedule, nor any training random stream.
  double evaluate(int episodes, std::uint64_t eval_seed) const {
    Rng rng(eval_seed);
    int successes = 0;
    for (int e = 0; e < episodes; ++e) {
      env::Task task = env::reset(rng, cfg_.band);
      for (int t = 0; t < cfg_.horizon; ++t) {
        const env::StepOutcome o = env::step(task.state, greedy_action(task.state, task.goal), task.goal);
        task.state = o.next;
        if (o.done) {
          ++successes;
          break;
        }
      }
    }
    return static_cast<double>(successes) / episodes;
  }

  /// Runs `budget` more environment steps. Successive calls continue the same run.
  TrainResult train(long budget) {
    if (budget < 1) throw InvalidInput("training budget must be >= 1 environment step");
    TrainResult result;
    double loss_sum = 0.0;
    long loss_count = 0;
    const long end = t_ + budget;

    for (; t_ < end; ++t_) {
      const long t = t_;
      if (need_reset_) {
        task_ = env::reset(env_rng_, cfg_.band);
        alpha_s_ = behavior_set(task_.state);
        episode_.clear();
        ep_len_ = 0;
        need_reset_ = false;
      }
      const double eps = t < cfg_.initial_explore_steps ? 1.0 : epsilon_at(cfg_, t);
      const int a = cfg_.algo == Algo::SoftElfP
                        ? act_soft_elfp(q_, in_.selector, task_.state, task_.goal, eps, act_rng_)
                        : act_elfp(q_, in_.selector, task_.state, task_.goal, eps, act_rng_, alpha_s_);
      const env::StepOutcome o = env::step(task_.state, a, task_.goal);
      if (o.infeasible) ++infeasible_;

      const ActionSet alpha_next = behavior_set(o.next);
      Transition tr;
      tr.s = env::encode(task_.state);
      tr.a = a;
      tr.r = o.reward;
      tr.sp = env::encode(o.next);
      tr.g = task_.goal.target;
      tr.done = o.done;
      tr.next_mask = alpha_next;
      buffer_.push(tr);
      if (cfg_.her_k > 0) episode_.push_back(tr);
      if (cfg_.record_trace) {
        result.states.push_back(tr.s);
        result.actions.push_back(a);
      }

      if (t >= cfg_.learning_starts && t % cfg_.update_every == 0) {
        if (auto l = td_step(q_, buffer_, cfg_, replay_rng_)) {
          loss_sum += *l;
          ++loss_count;
          if (cfg_.record_trace) result.losses.push_back(*l);
        }
      }

      task_.state = o.next;
      alpha_s_ = alpha_next;
      ++ep_len_;
      if (o.done || ep_len_ >= cfg_.horizon) {
        for (const auto& c : her_copies(episode_, cfg_.her_k, her_rng_)) buffer_.push(c);
        episode_.clear();
        need_reset_ = true;
      }

      if ((t + 1) % cfg_.eval_every == 0) {
        MetricsRow row;
        row.step = t + 1;
        row.success_rate = evaluate(cfg_.eval_episodes, derive_seed(seed_, 1000 + static_cast<std::uint64_t>(t + 1)));
        row.cumulative_infeasible = infeasible_;
        row.mean_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
        row.epsilon = epsilon_at(cfg_, t + 1);
        result.rows.push_back(row);
        loss_sum = 0.0;
        loss_count = 0;
        if (row.success_rate >= cfg_.stop_at_success) {
          ++t_;
          result.steps_run = t_;
          return result;
        }
      }
    }
    result.steps_run = t_;
    return result;
  }

  long steps_done() const { return t_; }
  long infeasible_attempts() const { return infeasible_; }
  /// Steps of the current, unfinished episode (0 right after an episode ends).
  int open_episode_length() const { return need_reset_ ? 0 : ep_len_; }

 private:
  AgentConfig cfg_;
  AgentInputs in_;
  std::uint64_t seed_;
  Rng init_rng_, env_rng_, act_rng_, replay_rng_, her_rng_;
  ReplayBuffer buffer_;
  QEnsemble q_;

  long t_ = 0;
  env::Task task_;
  ActionSet alpha_s_;
  std::vector<Transition> episode_;
  int ep_len_ = 0;
  bool need_reset_ = true;
  long infeasible_ = 0;
};

inline TrainResult train(const AgentConfig& cfg, const AgentInputs& in, std::uint64_t seed, long budget) {
  Trainer trainer(cfg, in, seed);
  return trainer.train(budget);
}

}  // namespace playprior::agents
