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

// Finite MDPs with per-state action masks: exact solvers, masked tabular
// Q-learning, and a brute-force check that an optimal-preserving mask keeps
// the optimal value.
//
// Rewards are state rewards: V(s) = R(s) + gamma * max_a sum_s' P(s'|s,a) V(s').
// Goal conditioning is collapsed to one fixed goal per instance.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "playprior/common.hpp"
#include "playprior/stats.hpp"

namespace playprior::tabular {

struct TabularMDP {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> P;  // flat [s][a][s']
  std::vector<double> R;  // binary state reward
  double gamma = 0.9;
  std::vector<double> rho0;

  double p(int s, int a, int sp) const { return P[(static_cast<std::size_t>(s) * n_actions + a) * n_states + sp]; }
  double& p(int s, int a, int sp) { return P[(static_cast<std::size_t>(s) * n_actions + a) * n_states + sp]; }

  static TabularMDP zeros(int n_states, int n_actions, double gamma) {
    TabularMDP m;
    m.n_states = n_states;
    m.n_actions = n_actions;
    m.gamma = gamma;
    m.P.assign(static_cast<std::size_t>(n_states) * n_actions * n_states, 0.0);
    m.R.assign(static_cast<std::size_t>(n_states), 0.0);
    m.rho0.assign(static_cast<std::size_t>(n_states), 1.0 / n_states);
    return m;
  }

  void validate() const {
    if (n_states < 1 || n_actions < 1) throw InvalidInput("MDP needs at least one state and one action");
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidInput("discount must lie in (0, 1)");
    for (int s = 0; s < n_states; ++s) {
      if (R[s] != 0.0 && R[s] != 1.0) throw InvalidInput("rewards must be binary");
      for (int a = 0; a < n_actions; ++a) {
        double sum = 0.0;
        for (int sp = 0; sp < n_states; ++sp) {
          if (p(s, a, sp) < 0.0) throw InvalidInput("negative transition probability");
          sum += p(s, a, sp);
        }
        if (std::abs(sum - 1.0) > 1e-12) throw InvalidInput("transition row does not sum to 1");
      }
    }
  }
};

/// Allowed actions per state, sorted ascending.
using MaskTable = std::vector<std::vector<int>>;

inline MaskTable full_mask(const TabularMDP& m) {
  MaskTable mask(static_cast<std::size_t>(m.n_states));
  for (auto& row : mask)
    for (int a = 0; a < m.n_actions; ++a) row.push_back(a);
  return mask;
}

inline void validate_mask(const TabularMDP& m, const MaskTable& mask) {
  if (static_cast<int>(mask.size()) != m.n_states) throw InvalidInput("mask must have one row per state");
  for (const auto& row : mask) {
    if (row.empty()) throw InvalidInput("mask row is empty; every state needs an action");
    for (std::size_t i = 0; i < row.size(); ++i)
      if (row[i] < 0 || row[i] >= m.n_actions || (i > 0 && row[i] <= row[i - 1]))
        throw InvalidInput("mask rows must be sorted, unique action indices");
  }
}

inline bool mask_contains(const MaskTable& mask, int s, int a) {
  return std::binary_search(mask[s].begin(), mask[s].end(), a);
}

/// One-step lookahead value of action a in s given V.
inline double q_value(const TabularMDP& m, const std::vector<double>& V, int s, int a) {
  double ev = 0.0;
  for (int sp = 0; sp < m.n_states; ++sp) ev += m.p(s, a, sp) * V[sp];
  return m.R[s] + m.gamma * ev;
}

struct Solution {
  std::vector<double> V;
  std::vector<int> policy;
  std::vector<double> residuals;  // sup-norm change per sweep
};

/// Bellman optimality iteration restricted to `mask`; stops when the sup-norm change < tol.
/// Greedy ties go to the lowest action index.
inline Solution masked_value_iteration(const TabularMDP& m, const MaskTable& mask, double tol = 1e-12) {
  validate_mask(m, mask);
  if (!(tol > 0.0)) throw InvalidInput("tolerance must be positive");
  Solution sol;
  sol.V.assign(static_cast<std::size_t>(m.n_states), 0.0);
  std::vector<double> next(sol.V.size());
  for (int it = 0; it < 100000; ++it) {
    double res = 0.0;
    for (int s = 0; s < m.n_states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a : mask[s]) best = std::max(best, q_value(m, sol.V, s, a));
      next[s] = best;
      res = std::max(res, std::abs(best - sol.V[s]));
    }
    sol.V.swap(next);
    sol.residuals.push_back(res);
    if (res < tol) break;
  }
  sol.policy.resize(sol.V.size());
  for (int s = 0; s < m.n_states; ++s) {
    int best_a = mask[s][0];
    double best = q_value(m, sol.V, s, best_a);
    for (int a : mask[s]) {
      const double q = q_value(m, sol.V, s, a);
      if (q > best) best = q, best_a = a;
    }
    sol.policy[s] = best_a;
  }
  return sol;
}

inline Solution value_iteration(const TabularMDP& m, double tol = 1e-12) {
  return masked_value_iteration(m, full_mask(m), tol);
}

/// Exact V^pi by solving (I - gamma P_pi) V = R.
inline std::vector<double> policy_evaluation(const TabularMDP& m, const std::vector<int>& policy) {
  const int n = m.n_states;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(n);
  for (int s = 0; s < n; ++s) {
    b(s) = m.R[s];
    for (int sp = 0; sp < n; ++sp) A(s, sp) -= m.gamma * m.p(s, policy[s], sp);
  }
  const Eigen::VectorXd v = A.partialPivLu().solve(b);
  return {v.data(), v.data() + n};
}

/// Q*(s,a) for every (s,a) from an optimal value table; entries outside the mask are NaN.
inline std::vector<double> q_table_from(const TabularMDP& m, const MaskTable& mask, const std::vector<double>& V) {
  std::vector<double> Q(static_cast<std::size_t>(m.n_states) * m.n_actions, NAN);
  for (int s = 0; s < m.n_states; ++s)
    for (int a : mask[s]) Q[static_cast<std::size_t>(s) * m.n_actions + a] = q_value(m, V, s, a);
  return Q;
}

/// Optimal actions of the unmasked MDP per state (within `tol` of the best).
inline MaskTable optimal_actions(const TabularMDP& m, const std::vector<double>& Vstar, double tol = 1e-9) {
  MaskTable out(static_cast<std::size_t>(m.n_states));
  for (int s = 0; s < m.n_states; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < m.n_actions; ++a) best = std::max(best, q_value(m, Vstar, s, a));
    for (int a = 0; a < m.n_actions; ++a)
      if (q_value(m, Vstar, s, a) >= best - tol) out[s].push_back(a);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tabular Q-learning

struct QLearningConfig {
  double epsilon = 0.2;
  double lr_exponent = 0.8;  // step size 1 / (1 + n(s,a))^0.8
  int horizon = 50;          // episode length before resetting from rho0
};

namespace detail {

inline int sample_from(const double* probs, int n, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return n - 1;
}

}  // namespace detail

/// Masked Q-learning run as a resumable object so callers can inspect progress.
class MaskedQLearner {
 public:
  MaskedQLearner(const TabularMDP& m, const MaskTable& mask, std::uint64_t seed, QLearningConfig cfg = {})
      : m_(m), mask_(mask), cfg_(cfg), rng_(seed),
        Q_(static_cast<std::size_t>(m.n_states) * m.n_actions, 0.0),
        visits_(Q_.size(), 0) {
    validate_mask(m, mask);
    state_ = detail::sample_from(m_.rho0.data(), m_.n_states, rng_);
  }

  double q(int s, int a) const { return Q_[idx(s, a)]; }
  const std::vector<double>& table() const { return Q_; }
  long steps_done() const { return steps_; }

  int greedy(int s) const {
    int best = mask_[s][0];
    for (int a : mask_[s])
      if (Q_[idx(s, a)] > Q_[idx(s, best)]) best = a;
    return best;
  }

  std::vector<int> greedy_policy() const {
    std::vector<int> pi(static_cast<std::size_t>(m_.n_states));
    for (int s = 0; s < m_.n_states; ++s) pi[s] = greedy(s);
    return pi;
  }

  void run(long steps) {
    for (long i = 0; i < steps; ++i) {
      const int s = state_;
      int a;
      if (uniform01(rng_) < cfg_.epsilon)
        a = mask_[s][static_cast<std::size_t>(uniform_index(rng_, static_cast<int>(mask_[s].size())))];
      else
        a = greedy(s);
      const int sp = detail::sample_from(&m_.P[idx(s, a) * m_.n_states], m_.n_states, rng_);
      double next_max = -std::numeric_limits<double>::infinity();
      for (int b : mask_[sp]) next_max = std::max(next_max, Q_[idx(sp, b)]);
      const double lr = 1.0 / std::pow(1.0 + static_cast<double>(visits_[idx(s, a)]), cfg_.lr_exponent);
      ++visits_[idx(s, a)];
      Q_[idx(s, a)] += lr * (m_.R[s] + m_.gamma * next_max - Q_[idx(s, a)]);
      state_ = sp;
      if (++t_ == cfg_.horizon) {
        t_ = 0;
        state_ = detail::sample_from(m_.rho0.data(), m_.n_states, rng_);
      }
      ++steps_;
    }
  }

 private:
  std::size_t idx(int s, int a) const { return static_cast<std::size_t>(s) * m_.n_actions + a; }

  const TabularMDP& m_;
  MaskTable mask_;
  QLearningConfig cfg_;
  Rng rng_;
  std::vector<double> Q_;
  std::vector<long> visits_;
  int state_ = 0;
  int t_ = 0;
  long steps_ = 0;
};

/// Flat Q table [s][a] after `steps` masked updates. Unmasked entries stay 0.
inline std::vector<double> tabular_q_masked(const TabularMDP& m, const MaskTable& mask, long steps, std::uint64_t seed,
                                            QLearningConfig cfg = {}) {
  if (steps < 1) throw InvalidInput("tabular_q_masked needs steps >= 1");
  MaskedQLearner learner(m, mask, seed, cfg);
  learner.run(steps);
  return learner.table();
}

/// Ordinary epsilon-greedy Q-learning over every action, written without masks.
inline std::vector<double> tabular_q(const TabularMDP& m, long steps, std::uint64_t seed, QLearningConfig cfg = {}) {
  if (steps < 1) throw InvalidInput("tabular_q needs steps >= 1");
  const int nS = m.n_states, nA = m.n_actions;
  std::vector<double> Q(static_cast<std::size_t>(nS) * nA, 0.0);
  std::vector<long> n(Q.size(), 0);
  Rng rng(seed);
  auto draw = [&](const double* probs) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (int i = 0; i < nS; ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    return nS - 1;
  };
  int s = draw(m.rho0.data());
  int t = 0;
  for (long i = 0; i < steps; ++i) {
    int a = 0;
    if (uniform01(rng) < cfg.epsilon) {
      a = uniform_index(rng, nA);
    } else {
      for (int b = 1; b < nA; ++b)
        if (Q[s * nA + b] > Q[s * nA + a]) a = b;
    }
    const int sp = draw(&m.P[(static_cast<std::size_t>(s) * nA + a) * nS]);
    const double next_max = *std::max_element(Q.begin() + sp * nA, Q.begin() + (sp + 1) * nA);
    const std::size_t k = static_cast<std::size_t>(s) * nA + a;
    const double lr = 1.0 / std::pow(1.0 + static_cast<double>(n[k]), cfg.lr_exponent);
    ++n[k];
    Q[k] += lr * (m.R[s] + m.gamma * next_max - Q[k]);
    s = sp;
    if (++t == cfg.horizon) {
      t = 0;
      s = draw(m.rho0.data());
    }
  }
  return Q;
}

// ---------------------------------------------------------------------------
// Optimality-preservation check

enum class Verdict { Pass, Fail, Vacuous };

inline const char* verdict_name(Verdict v) {
  return v == Verdict::Pass ? "pass" : v == Verdict::Fail ? "fail" : "vacuous";
}

struct TheoremReport {
  Verdict verdict = Verdict::Vacuous;
  double value_gap = 0.0;   // sup |V*_masked - V*|
  double policy_gap = 0.0;  // sup |V^{masked greedy} - V*|
};

/// Passes iff the masked optimum equals the unmasked one within 1e-8 and the masked-greedy
/// policy attains V* in the original MDP. A mask missing every optimal action at some state
/// falls outside the precondition and is reported as vacuous.
inline TheoremReport theorem_check(const TabularMDP& m, const MaskTable& mask, double tol = 1e-8) {
  validate_mask(m, mask);
  const Solution full = value_iteration(m);
  const std::vector<double> vstar = policy_evaluation(m, full.policy);
  const MaskTable opt = optimal_actions(m, vstar);
  TheoremReport rep;
  for (int s = 0; s < m.n_states; ++s) {
    bool hit = false;
    for (int a : opt[s]) hit = hit || mask_contains(mask, s, a);
    if (!hit) {
      rep.verdict = Verdict::Vacuous;
      const Solution red = masked_value_iteration(m, mask);
      for (int t = 0; t < m.n_states; ++t) rep.value_gap = std::max(rep.value_gap, std::abs(red.V[t] - vstar[t]));
      return rep;
    }
  }
  const Solution red = masked_value_iteration(m, mask);
  const std::vector<double> vpi = policy_evaluation(m, red.policy);
  for (int s = 0; s < m.n_states; ++s) {
    rep.value_gap = std::max(rep.value_gap, std::abs(red.V[s] - vstar[s]));
    rep.policy_gap = std::max(rep.policy_gap, std::abs(vpi[s] - vstar[s]));
  }
  rep.verdict = rep.value_gap <= tol && rep.policy_gap <= tol ? Verdict::Pass : Verdict::Fail;
  return rep;
}

// ---------------------------------------------------------------------------
// Random instances

/// Peaked random transition rows (uniforms raised to the 4th power, normalized), a sparse
/// binary reward with at least one rewarding state, uniform rho0.
inline TabularMDP random_mdp(std::uint64_t seed, int n_states, int n_actions, double gamma = 0.9) {
  if (n_states < 2 || n_actions < 2) throw InvalidInput("random_mdp needs at least 2 states and 2 actions");
  Rng rng(seed);
  TabularMDP m = TabularMDP::zeros(n_states, n_actions, gamma);
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      for (int sp = 0; sp < n_states; ++sp) {
        const double u = uniform01(rng);
        m.p(s, a, sp) = u * u * u * u + 1e-6;
        sum += m.p(s, a, sp);
      }
      for (int sp = 0; sp < n_states; ++sp) m.p(s, a, sp) /= sum;
    }
  for (int s = 0; s < n_states; ++s) m.R[s] = uniform01(rng) < 0.2 ? 1.0 : 0.0;
  m.R[uniform_index(rng, n_states)] = 1.0;
  return m;
}

/// Optimal actions plus each non-optimal action with probability delta. The uniforms are
/// drawn once per (s, a) from `seed`, so masks for growing delta are nested.
inline MaskTable optimal_preserving_mask(const TabularMDP& m, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw InvalidInput("delta must lie in [0, 1]");
  const Solution sol = value_iteration(m);
  const MaskTable opt = optimal_actions(m, policy_evaluation(m, sol.policy));
  Rng rng(seed);
  MaskTable mask(static_cast<std::size_t>(m.n_states));
  for (int s = 0; s < m.n_states; ++s)
    for (int a = 0; a < m.n_actions; ++a) {
      const double u = uniform01(rng);
      if (std::binary_search(opt[s].begin(), opt[s].end(), a) || u < delta) mask[s].push_back(a);
    }
  return mask;
}

// ---------------------------------------------------------------------------
// Mask-density sweep

/// Expected 1 - |mask(s)|/|A| under the state visitation of a uniform-over-mask policy
/// started from rho0 and averaged over one episode horizon.
inline double infeasible_pair_ratio(const TabularMDP& m, const MaskTable& mask, int horizon) {
  std::vector<double> d = m.rho0, next(d.size());
  double ratio = 0.0;
  for (int t = 0; t < horizon; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < m.n_states; ++s) {
      ratio += d[s] * (1.0 - static_cast<double>(mask[s].size()) / m.n_actions);
      const double w = d[s] / static_cast<double>(mask[s].size());
      for (int a : mask[s])
        for (int sp = 0; sp < m.n_states; ++sp) next[sp] += w * m.p(s, a, sp);
    }
    d.swap(next);
  }
  return ratio / horizon;
}

struct SweepRow {
  double density = 0.0;
  double ratio = 0.0;  // mean over instances
  double median_steps = 0.0;
  double iqr = 0.0;
  int censored = 0;
  int runs = 0;
};

struct SweepConfig {
  std::vector<double> densities{0.0, 0.25, 0.5, 0.75, 1.0};
  int n_instances = 25;
  int n_states = 12;
  int n_actions = 6;
  double gamma = 0.9;
  double gap = 0.05;  // greedy value within this sup-norm distance of V*
  long check_every = 1000;
  long cap = 1000000;
  std::uint64_t seed = 0;
  QLearningConfig q{};
};

/// Steps until the masked-greedy policy is gap-optimal; nullopt if the cap is hit.
inline std::optional<long> steps_to_optimal(const TabularMDP& m, const MaskTable& mask, const std::vector<double>& vstar,
                                            double gap, long check_every, long cap, std::uint64_t seed,
                                            QLearningConfig cfg = {}) {
  MaskedQLearner learner(m, mask, seed, cfg);
  while (learner.steps_done() < cap) {
    learner.run(check_every);
    const std::vector<double> v = policy_evaluation(m, learner.greedy_policy());
    double worst = 0.0;
    for (int s = 0; s < m.n_states; ++s) worst = std::max(worst, vstar[s] - v[s]);
    if (worst <= gap) return learner.steps_done();
  }
  return std::nullopt;
}

/// One row per density. Each instance is a fresh random MDP; censored runs count as cap + 1.
inline std::vector<SweepRow> complexity_sweep(const SweepConfig& cfg) {
  std::vector<double> uniq = cfg.densities;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  if (uniq.size() < 4) throw InvalidInput("complexity_sweep needs at least 4 distinct densities");
  std::vector<SweepRow> rows;
  for (double density : cfg.densities) {
    SweepRow row;
    row.density = density;
    std::vector<double> steps;
    for (int i = 0; i < cfg.n_instances; ++i) {
      const std::uint64_t inst = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
      const TabularMDP m = random_mdp(inst, cfg.n_states, cfg.n_actions, cfg.gamma);
      const MaskTable mask = optimal_preserving_mask(m, density, derive_seed(inst, 1));
      const std::vector<double> vstar = policy_evaluation(m, value_iteration(m).policy);
      row.ratio += infeasible_pair_ratio(m, mask, cfg.q.horizon);
      const auto k = steps_to_optimal(m, mask, vstar, cfg.gap, cfg.check_every, cfg.cap, derive_seed(inst, 2), cfg.q);
      if (!k) ++row.censored;
      steps.push_back(k ? static_cast<double>(*k) : static_cast<double>(cfg.cap + 1));
      ++row.runs;
    }
    row.ratio /= cfg.n_instances;
    row.median_steps = stats::median(steps);
    row.iqr = stats::iqr(steps);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace playprior::tabular
