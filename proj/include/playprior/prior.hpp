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

// Behavioral prior over primitives, fit to play data by maximum likelihood,
// and the threshold operator that turns it into a per-state feasible set.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "playprior/env.hpp"
#include "playprior/nn.hpp"
#include "playprior/play.hpp"

namespace playprior::prior {

struct PriorConfig {
  std::vector<int> hidden{200, 200};
  int batch = 500;
  long steps = 100000;
  double lr = 1e-3;
  double holdout_fraction = 0.1;
  long eval_every = 1000;
  std::uint64_t seed = 0;
};

struct PriorModel {
  nn::DenseNet net;
  long steps = 0;
  /// (training step, held-out mean NLL); step 0 is the untrained net.
  std::vector<std::pair<long, double>> heldout_nll;

  double final_heldout_nll() const { return heldout_nll.empty() ? NAN : heldout_nll.back().second; }
};

inline nn::Vector state_input(const env::EnvState& s) {
  const auto v = env::encode(s);
  return Eigen::Map<const nn::Vector>(v.data(), env::kStateDim);
}

inline nn::Vector probs(const PriorModel& m, const env::EnvState& s) {
  return nn::softmax(nn::forward(m.net, state_input(s)));
}

inline PriorModel untrained_prior(const std::vector<int>& hidden = {200, 200}) {
  std::vector<int> sizes{env::kStateDim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(kNumPrimitives);
  return PriorModel{nn::ParamSet::zeros(sizes), 0, {}};
}

namespace detail {

inline nn::Matrix states_matrix(const play::PlayDataset& ds, const std::vector<std::size_t>& idx) {
  nn::Matrix x(env::kStateDim, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c)
    for (int i = 0; i < env::kStateDim; ++i) x(i, static_cast<Eigen::Index>(c)) = ds.records[idx[c]].s[i];
  return x;
}

inline std::vector<int> labels(const play::PlayDataset& ds, const std::vector<std::size_t>& idx) {
  std::vector<int> y;
  y.reserve(idx.size());
  for (auto i : idx) y.push_back(ds.records[i].a);
  return y;
}

inline double mean_nll(const nn::DenseNet& net, const nn::Matrix& x, const std::vector<int>& y) {
  const nn::Matrix logits = nn::forward_batch(net, x);
  double total = 0.0;
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double m = logits.col(c).maxCoeff();
    const double lse = m + std::log((logits.col(c).array() - m).exp().sum());
    total += lse - logits(y[c], c);
  }
  return total / static_cast<double>(logits.cols());
}

}  // namespace detail

/// Mini-batch Adam on the negative log-likelihood of the recorded primitives.
/// A random 10% of records is held out and scored every `eval_every` steps.
inline PriorModel train_prior(const play::PlayDataset& ds, const PriorConfig& cfg) {
  if (ds.records.empty()) throw InvalidInput("train_prior: empty dataset");
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_hold = static_cast<std::size_t>(std::ceil(cfg.holdout_fraction * static_cast<double>(ds.size())));
  if (n_hold >= ds.size() || ds.size() - n_hold < static_cast<std::size_t>(cfg.batch))
    throw InvalidInput("train_prior: training split (" + std::to_string(ds.size() - std::min(n_hold, ds.size())) +
                       " records) is smaller than one batch (" + std::to_string(cfg.batch) + ")");
  const std::vector<std::size_t> hold(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_hold));
  const std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_hold), order.end());
  const nn::Matrix hold_x = detail::states_matrix(ds, hold);
  const std::vector<int> hold_y = detail::labels(ds, hold);

  std::vector<int> sizes{env::kStateDim};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(kNumPrimitives);
  PriorModel model{nn::glorot_uniform(sizes, rng), 0, {}};
  nn::AdamState adam(model.net, cfg.lr);
  model.heldout_nll.emplace_back(0, detail::mean_nll(model.net, hold_x, hold_y));

  std::vector<std::size_t> batch(static_cast<std::size_t>(cfg.batch));
  for (long step = 1; step <= cfg.steps; ++step) {
    for (auto& b : batch) b = train[static_cast<std::size_t>(uniform_index(rng, static_cast<int>(train.size())))];
    const auto lg = nn::nll_batch(model.net, detail::states_matrix(ds, batch), detail::labels(ds, batch));
    nn::adam_step(model.net, lg.grads, adam);
    if (step % cfg.eval_every == 0 || step == cfg.steps)
      model.heldout_nll.emplace_back(step, detail::mean_nll(model.net, hold_x, hold_y));
  }
  model.steps = cfg.steps;
  return model;
}

/// alpha(s) = { a : prior(a|s) > rho }, falling back to {argmax} when that is empty.
/// Without a model every primitive is selected.
class SelectionOperator {
 public:
  SelectionOperator() = default;
  SelectionOperator(std::shared_ptr<const PriorModel> model, double rho) : model_(std::move(model)), rho_(rho) {
    if (!(rho >= 0.0 && rho < 1.0)) throw InvalidInput("threshold rho must lie in [0, 1)");
  }

  static SelectionOperator full() { return {}; }

  bool has_model() const { return model_ != nullptr; }
  double rho() const { return rho_; }
  const PriorModel& model() const { return *model_; }

  nn::Vector probs(const env::EnvState& s) const {
    if (!model_) return nn::Vector::Constant(kNumPrimitives, 1.0 / kNumPrimitives);
    return prior::probs(*model_, s);
  }

  ActionSet alpha(const env::EnvState& s) const {
    if (!model_) return ActionSet::full();
    return threshold(probs(s), rho_);
  }

  /// Thresholding without the fallback (may be empty).
  static ActionSet raw_threshold(const nn::Vector& p, double rho) {
    ActionSet out;
    for (int a = 0; a < kNumPrimitives; ++a)
      if (p(a) > rho) out.insert(a);
    return out;
  }

  static ActionSet threshold(const nn::Vector& p, double rho) {
    ActionSet out = raw_threshold(p, rho);
    if (out.empty()) {
      Eigen::Index best = 0;
      p.maxCoeff(&best);  // first maximal index
      out.insert(static_cast<int>(best));
    }
    return out;
  }

 private:
  std::shared_ptr<const PriorModel> model_;
  double rho_ = 0.0;
};

struct PriorQuality {
  double recall = 0.0;
  double precision = 0.0;
  /// Mean fraction of alpha(s) that the environment rejects.
  double infeasible_rate = 0.0;
};

using FeasibleSetFn = std::function<ActionSet(const env::EnvState&, const env::Goal&)>;

/// Compares a feasible-set map against the environment oracle on `n_states` play-visited
/// states. The map receives the task goal too, so the oracle itself can be scored.
inline PriorQuality prior_quality(const FeasibleSetFn& alpha, std::size_t n_states, std::uint64_t seed) {
  if (n_states < 1) throw InvalidInput("prior_quality needs n_states >= 1");
  Rng rng(seed);
  PriorQuality q;
  for (std::size_t i = 0; i < n_states; ++i) {
    const env::Task t = env::sample_visited(rng);
    const ActionSet truth = env::feasible_oracle(t.state, t.goal);
    const ActionSet pred = alpha(t.state, t.goal);
    const int hit = (truth & pred).size();
    q.recall += static_cast<double>(hit) / truth.size();
    q.precision += static_cast<double>(hit) / pred.size();
    q.infeasible_rate += static_cast<double>(pred.size() - hit) / pred.size();
  }
  const auto n = static_cast<double>(n_states);
  q.recall /= n;
  q.precision /= n;
  q.infeasible_rate /= n;
  return q;
}

inline PriorQuality prior_quality(const SelectionOperator& sel, std::size_t n_states, std::uint64_t seed) {
  return prior_quality([&](const env::EnvState& s, const env::Goal&) { return sel.alpha(s); }, n_states, seed);
}

inline void save_prior(const PriorModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write prior to " + path);
  nn::save_checkpoint(out, m.net, nullptr,
                      {{"kind", "behavioral-prior"},
                       {"steps", std::to_string(m.steps)},
                       {"heldout_nll", nn::detail::fmt_double(m.final_heldout_nll())}});
}

inline PriorModel load_prior(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open prior checkpoint " + path);
  nn::Checkpoint ck = nn::load_checkpoint(in);
  if (ck.net.input_dim() != env::kStateDim || ck.net.output_dim() != kNumPrimitives)
    throw FormatError("prior checkpoint has wrong input/output dimensions");
  PriorModel m{std::move(ck.net), 0, {}};
  if (auto it = ck.meta.find("steps"); it != ck.meta.end()) m.steps = std::stol(it->second);
  if (auto it = ck.meta.find("heldout_nll"); it != ck.meta.end()) m.heldout_nll.emplace_back(m.steps, std::stod(it->second));
  return m;
}

}  // namespace playprior::prior
