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


// Dense rectified-linear networks with hand-written backward passes, Adam,
// and a central-difference gradient checker. The scalar type is a template
// parameter; the double instantiation is the default and the one checkpoints
// store.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "playprior/common.hpp"

namespace playprior::nn {

template <class T>
using VectorT = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <class T>
using MatrixT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

// Arguments spelled with these aliases do not take part in deduction, so a
// double vector still binds to a matrix parameter through conversion.
template <class T>
using MatrixArg = std::type_identity_t<MatrixT<T>>;
template <class T>
using VectorArg = std::type_identity_t<VectorT<T>>;

using Vector = VectorT<double>;
using Matrix = MatrixT<double>;

/// Parameter container shared by networks and their gradients. Layer l maps
/// layer_sizes[l] -> layer_sizes[l+1]; weights[l] is (out x in).
template <class T>
struct BasicParamSet {
  using Scalar = T;
  using Vec = VectorT<T>;
  using Mat = MatrixT<T>;

  std::vector<int> layer_sizes;
  std::vector<Mat> weights;
  std::vector<Vec> biases;

  int num_layers() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }

  std::size_t num_params() const {
    std::size_t n = 0;
    for (int l = 0; l < num_layers(); ++l) n += weights[l].size() + biases[l].size();
    return n;
  }

  template <class U>
  bool congruent(const BasicParamSet<U>& o) const {
    return layer_sizes == o.layer_sizes;
  }

  /// Flat parameter view: per layer, weights (row-major) then biases.
  T& at(std::size_t i) {
    for (int l = 0; l < num_layers(); ++l) {
      const auto nw = static_cast<std::size_t>(weights[l].size());
      if (i < nw) {
        const auto cols = static_cast<std::size_t>(weights[l].cols());
        return weights[l](static_cast<Eigen::Index>(i / cols), static_cast<Eigen::Index>(i % cols));
      }
      i -= nw;
      const auto nb = static_cast<std::size_t>(biases[l].size());
      if (i < nb) return biases[l](static_cast<Eigen::Index>(i));
      i -= nb;
    }
    throw InvalidInput("parameter index out of range");
  }
  T at(std::size_t i) const { return const_cast<BasicParamSet*>(this)->at(i); }

  void set_zero() {
    for (auto& w : weights) w.setZero();
    for (auto& b : biases) b.setZero();
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& w : weights) m = std::max(m, static_cast<double>(w.cwiseAbs().maxCoeff()));
    for (const auto& b : biases) m = std::max(m, static_cast<double>(b.cwiseAbs().maxCoeff()));
    return m;
  }

  double sum_squares() const {
    double s = 0.0;
    for (const auto& w : weights) s += static_cast<double>(w.squaredNorm());
    for (const auto& b : biases) s += static_cast<double>(b.squaredNorm());
    return s;
  }

  template <class U>
  BasicParamSet<U> cast() const {
    BasicParamSet<U> out;
    out.layer_sizes = layer_sizes;
    for (const auto& w : weights) out.weights.push_back(w.template cast<U>());
    for (const auto& b : biases) out.biases.push_back(b.template cast<U>());
    return out;
  }

  static BasicParamSet zeros(const std::vector<int>& sizes) {
    if (sizes.size() < 2) throw InvalidInput("a network needs at least input and output sizes");
    for (int s : sizes)
      if (s <= 0) throw InvalidInput("layer sizes must be positive");
    BasicParamSet p;
    p.layer_sizes = sizes;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      p.weights.push_back(Mat::Zero(sizes[l + 1], sizes[l]));
      p.biases.push_back(Vec::Zero(sizes[l + 1]));
    }
    return p;
  }
};

using ParamSet = BasicParamSet<double>;
using DenseNet = ParamSet;
using Gradients = ParamSet;

template <class T>
BasicParamSet<T> zeros_like(const BasicParamSet<T>& net) {
  return BasicParamSet<T>::zeros(net.layer_sizes);
}

/// Uniform(+-sqrt(6/(fan_in+fan_out))) weights, zero biases. Draws are made in
/// double, so the float and double networks start from the same values.
template <class T = double>
BasicParamSet<T> glorot_uniform(const std::vector<int>& sizes, Rng& rng) {
  BasicParamSet<T> net = BasicParamSet<T>::zeros(sizes);
  for (int l = 0; l < net.num_layers(); ++l) {
    const double limit = std::sqrt(6.0 / (sizes[l] + sizes[l + 1]));
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto& w = net.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = static_cast<T>(dist(rng));
  }
  return net;
}

/// Post-activation values of every layer; acts[0] is the input, acts.back() the raw output.
template <class T>
struct BasicActivations {
  std::vector<MatrixT<T>> acts;
};
using Activations = BasicActivations<double>;

namespace detail {

template <class T>
void check_input(const BasicParamSet<T>& net, Eigen::Index rows) {
  if (rows != net.input_dim())
    throw InvalidInput("input dimension " + std::to_string(rows) + " does not match network input " +
                       std::to_string(net.input_dim()));
}

}  // namespace detail

/// Batched forward pass; columns of `x` are samples.
template <class T>
BasicActivations<T> forward_cache(const BasicParamSet<T>& net, const MatrixArg<T>& x) {
  detail::check_input(net, x.rows());
  BasicActivations<T> a;
  a.acts.reserve(net.num_layers() + 1);
  a.acts.push_back(x);
  for (int l = 0; l < net.num_layers(); ++l) {
    MatrixT<T> z = net.weights[l] * a.acts.back();
    z.colwise() += net.biases[l];
    if (l + 1 < net.num_layers()) z = z.cwiseMax(T(0));
    a.acts.push_back(std::move(z));
  }
  return a;
}

template <class T>
MatrixT<T> forward_batch(const BasicParamSet<T>& net, const MatrixArg<T>& x) {
  detail::check_input(net, x.rows());
  MatrixT<T> h = x;
  for (int l = 0; l < net.num_layers(); ++l) {
    MatrixT<T> z = net.weights[l] * h;
    z.colwise() += net.biases[l];
    if (l + 1 < net.num_layers()) z = z.cwiseMax(T(0));
    h = std::move(z);
  }
  return h;
}

template <class T>
VectorT<T> forward(const BasicParamSet<T>& net, const VectorArg<T>& x) {
  return forward_batch(net, x);
}

/// Backpropagates dL/d(output) through a cached forward pass.
template <class T>
BasicParamSet<T> backward(const BasicParamSet<T>& net, const BasicActivations<T>& cache, const MatrixArg<T>& d_out) {
  BasicParamSet<T> g = zeros_like(net);
  MatrixT<T> delta = d_out;
  for (int l = net.num_layers() - 1; l >= 0; --l) {
    const MatrixT<T>& input = cache.acts[l];
    g.weights[l].noalias() = delta * input.transpose();
    g.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      MatrixT<T> prev = net.weights[l].transpose() * delta;
      // ReLU derivative, read off the post-activation value.
      prev = prev.cwiseProduct((input.array() > T(0)).template cast<T>().matrix());
      delta = std::move(prev);
    }
  }
  return g;
}

/// Softmax computed in double whatever the network scalar.
template <class Derived>
Vector softmax(const Eigen::MatrixBase<Derived>& logits) {
  const Vector l = logits.template cast<double>();
  const double m = l.maxCoeff();
  Vector e = (l.array() - m).exp();
  return e / e.sum();
}

inline Matrix softmax_columns(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) out.col(c) = softmax(logits.col(c));
  return out;
}

template <class T>
struct BasicLossAndGrad {
  double loss = 0.0;
  BasicParamSet<T> grads;
};
using LossAndGrad = BasicLossAndGrad<double>;

/// Mean negative log-likelihood of `labels` under softmax(net(x)).
template <class T>
BasicLossAndGrad<T> nll_batch(const BasicParamSet<T>& net, const MatrixArg<T>& x, const std::vector<int>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != x.cols()) throw InvalidInput("one label per column required");
  for (int y : labels)
    if (y < 0 || y >= net.output_dim()) throw InvalidInput("label " + std::to_string(y) + " out of range");
  const BasicActivations<T> cache = forward_cache(net, x);
  const MatrixT<T>& logits = cache.acts.back();
  const double n = static_cast<double>(x.cols());
  MatrixT<T> d(logits.rows(), logits.cols());
  double loss = 0.0;
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const Vector col = logits.col(c).template cast<double>();
    const double m = col.maxCoeff();
    const Vector e = (col.array() - m).exp();
    const double z = e.sum();
    loss += -(col(labels[c]) - m - std::log(z));
    Vector p = e / z;
    p(labels[c]) -= 1.0;
    d.col(c) = (p / n).template cast<T>();
  }
  return {loss / n, backward(net, cache, d)};
}

template <class T>
BasicLossAndGrad<T> nll_loss_and_grad(const BasicParamSet<T>& net, const VectorArg<T>& x, int label) {
  return nll_batch(net, x, {label});
}

/// Mean of (target_i - net(x_i)[action_i])^2. Only the selected outputs carry gradient.
template <class T>
BasicLossAndGrad<T> td_batch(const BasicParamSet<T>& net, const MatrixArg<T>& x, const std::vector<int>& actions,
                             const std::vector<double>& targets) {
  if (static_cast<Eigen::Index>(actions.size()) != x.cols() || targets.size() != actions.size())
    throw InvalidInput("one action and target per column required");
  for (int a : actions)
    if (a < 0 || a >= net.output_dim()) throw InvalidInput("action " + std::to_string(a) + " out of range");
  const BasicActivations<T> cache = forward_cache(net, x);
  const MatrixT<T>& q = cache.acts.back();
  const double n = static_cast<double>(x.cols());
  MatrixT<T> d = MatrixT<T>::Zero(q.rows(), q.cols());
  double loss = 0.0;
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    const double err = static_cast<double>(q(actions[c], c)) - targets[c];
    loss += err * err;
    d(actions[c], c) = static_cast<T>(2.0 * err / n);
  }
  return {loss / n, backward(net, cache, d)};
}

template <class T>
BasicLossAndGrad<T> td_loss_and_grad(const BasicParamSet<T>& net, const VectorArg<T>& input, int action,
                                     double target) {
  return td_batch(net, input, {action}, {target});
}

template <class T>
struct BasicAdamState {
  BasicParamSet<T> m;
  BasicParamSet<T> v;
  long long t = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  BasicAdamState() = default;
  BasicAdamState(const BasicParamSet<T>& net, double learning_rate)
      : m(zeros_like(net)), v(zeros_like(net)), lr(learning_rate) {}
};
using AdamState = BasicAdamState<double>;

template <class T>
void adam_step(BasicParamSet<T>& net, const BasicParamSet<T>& g, BasicAdamState<T>& s) {
  if (!net.congruent(g) || !net.congruent(s.m)) throw InvalidInput("adam_step: shape mismatch");
  s.t += 1;
  const T b1 = static_cast<T>(s.beta1), b2 = static_cast<T>(s.beta2);
  const T c1 = static_cast<T>(1.0 - std::pow(s.beta1, static_cast<double>(s.t)));
  const T c2 = static_cast<T>(1.0 - std::pow(s.beta2, static_cast<double>(s.t)));
  const T lr = static_cast<T>(s.lr), eps = static_cast<T>(s.eps);
  auto update = [&](auto& p, const auto& grad, auto& m, auto& v) {
    m.array() = b1 * m.array() + (T(1) - b1) * grad.array();
    v.array() = b2 * v.array() + (T(1) - b2) * grad.array().square();
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (int l = 0; l < net.num_layers(); ++l) {
    update(net.weights[l], g.weights[l], s.m.weights[l], s.v.weights[l]);
    update(net.biases[l], g.biases[l], s.m.biases[l], s.v.biases[l]);
  }
}

/// target <- retention * target + (1 - retention) * online.
template <class T>
void soft_update(BasicParamSet<T>& target, const BasicParamSet<T>& online, double retention) {
  const T keep = static_cast<T>(retention), mix = static_cast<T>(1.0 - retention);
  for (int l = 0; l < target.num_layers(); ++l) {
    target.weights[l] = keep * target.weights[l] + mix * online.weights[l];
    target.biases[l] = keep * target.biases[l] + mix * online.biases[l];
  }
}

/// g += scale * p
template <class T>
void add_scaled(BasicParamSet<T>& g, const BasicParamSet<T>& p, double scale) {
  const T k = static_cast<T>(scale);
  for (int l = 0; l < g.num_layers(); ++l) {
    g.weights[l] += k * p.weights[l];
    g.biases[l] += k * p.biases[l];
  }
}

enum class LossKind { Nll, Td };

/// Loss value and analytic gradient for one random probe (input, label/action, target).
struct Probe {
  Vector x;
  int index = 0;
  double target = 0.0;
};

inline double probe_loss(const DenseNet& net, LossKind kind, const Probe& p) {
  if (kind == LossKind::Nll) return nll_loss_and_grad(net, p.x, p.index).loss;
  return td_loss_and_grad(net, p.x, p.index, p.target).loss;
}

using GradFn = std::function<Gradients(const DenseNet&, LossKind, const Probe&)>;

inline Gradients analytic_grad(const DenseNet& net, LossKind kind, const Probe& p) {
  if (kind == LossKind::Nll) return nll_loss_and_grad(net, p.x, p.index).grads;
  return td_loss_and_grad(net, p.x, p.index, p.target).grads;
}

/// Max-norm relative error between one analytic gradient and central differences
/// (step 1e-5). Falls back to absolute error when both norms are below 1e-8.
inline double gradient_error(const DenseNet& net, LossKind kind, const Probe& p, const GradFn& grad_fn,
                             double h = 1e-5) {
  const Gradients g = grad_fn(net, kind, p);
  DenseNet probe = net;
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < net.num_params(); ++i) {
    const double orig = probe.at(i);
    probe.at(i) = orig + h;
    const double lp = probe_loss(probe, kind, p);
    probe.at(i) = orig - h;
    const double lm = probe_loss(probe, kind, p);
    probe.at(i) = orig;
    const double fd = (lp - lm) / (2.0 * h);
    diff = std::max(diff, std::abs(fd - g.at(i)));
    ref = std::max({ref, std::abs(fd), std::abs(g.at(i))});
  }
  return ref < 1e-8 ? diff : diff / ref;
}

/// Runs `trials` random probes against `net` and returns the worst error.
inline double finite_diff_check(const DenseNet& net, LossKind kind, int trials, Rng& rng,
                                const GradFn& grad_fn = analytic_grad) {
  if (trials < 1) throw InvalidInput("finite_diff_check needs at least one trial");
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Probe p;
    p.x = Vector(net.input_dim());
    for (Eigen::Index i = 0; i < p.x.size(); ++i) p.x(i) = normal(rng);
    p.index = uniform_index(rng, net.output_dim());
    p.target = normal(rng);
    worst = std::max(worst, gradient_error(net, kind, p, grad_fn));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Checkpoints: "key value..." text lines terminated by "end", then raw
// little-endian float64 parameters (per layer: row-major weights, biases).

using Metadata = std::map<std::string, std::string>;

namespace detail {

inline void write_le_double(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  out.write(buf, 8);
}

inline double read_le_double(std::istream& in) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) throw FormatError("checkpoint: truncated parameter block");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

inline std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

/// Parameters of any scalar type are widened to float64 on disk.
template <class T>
void save_checkpoint(std::ostream& out, const BasicParamSet<T>& net, const std::type_identity_t<BasicAdamState<T>>* adam = nullptr,
                     const Metadata& meta = {}) {
  out << "playprior-densenet 1\n";
  out << "layers";
  for (int s : net.layer_sizes) out << ' ' << s;
  out << '\n';
  if (adam) {
    out << "adam_t " << adam->t << '\n';
    out << "adam_lr " << detail::fmt_double(adam->lr) << '\n';
    out << "adam_beta1 " << detail::fmt_double(adam->beta1) << '\n';
    out << "adam_beta2 " << detail::fmt_double(adam->beta2) << '\n';
    out << "adam_eps " << detail::fmt_double(adam->eps) << '\n';
  }
  for (const auto& [k, v] : meta) out << "meta." << k << ' ' << v << '\n';
  out << "params " << net.num_params() << '\n';
  out << "end\n";
  for (int l = 0; l < net.num_layers(); ++l) {
    const auto& w = net.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) detail::write_le_double(out, static_cast<double>(w(r, c)));
    for (Eigen::Index i = 0; i < net.biases[l].size(); ++i) detail::write_le_double(out, static_cast<double>(net.biases[l](i)));
  }
}

struct Checkpoint {
  DenseNet net;
  Metadata meta;
  long long adam_t = 0;
  double adam_lr = 0.0;
};

inline Checkpoint load_checkpoint(std::istream& in) {
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    return FormatError("checkpoint line " + std::to_string(lineno) + ": " + why);
  };
  if (!std::getline(in, line)) throw FormatError("checkpoint: empty input");
  ++lineno;
  if (line != "playprior-densenet 1") throw fail("unrecognized header '" + line + "'");
  Checkpoint ck;
  std::vector<int> sizes;
  std::size_t declared = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line == "end") break;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "layers") {
      int s;
      while (ls >> s) sizes.push_back(s);
    } else if (key == "params") {
      ls >> declared;
    } else if (key == "adam_t") {
      ls >> ck.adam_t;
    } else if (key == "adam_lr") {
      ls >> ck.adam_lr;
    } else if (key.rfind("meta.", 0) == 0) {
      std::string rest;
      std::getline(ls >> std::ws, rest);
      ck.meta[key.substr(5)] = rest;
    } else if (key.rfind("adam_", 0) != 0) {
      throw fail("unknown key '" + key + "'");
    }
  }
  if (line != "end") throw fail("missing 'end' marker");
  try {
    ck.net = ParamSet::zeros(sizes);
  } catch (const InvalidInput& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  if (declared != ck.net.num_params()) throw FormatError("checkpoint: parameter count does not match layers");
  for (std::size_t i = 0; i < declared; ++i) ck.net.at(i) = detail::read_le_double(in);
  return ck;
}

}  // namespace playprior::nn
