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

// Experiment orchestration: multi-seed runs with CSV + manifest output,
// threshold and dataset-size sweeps, relabeling ablations, SVG charts.

#pragma once

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "playprior/agents.hpp"
#include "playprior/play.hpp"
#include "playprior/prior.hpp"
#include "playprior/stats.hpp"

namespace playprior::harness {

inline constexpr const char* kVersion = "playprior-0.1.0";
inline constexpr const char* kOutputRootVar = "PLAYPRIOR_OUT";

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
  agents::Algo algo = agents::Algo::ElfP;
  env::Band band = env::Band::Medium;
  std::string dataset;     // JSONL path; required by algorithms that use play data
  std::string prior;       // optional checkpoint; otherwise trained from the dataset
  long prior_steps = 100000;
  double rho = 0.01;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  long budget = 200000;
  long eval_every = 2500;
  int eval_episodes = 50;
  int her_k = -1;         // -1: the algorithm's default
  double eps_min = -1.0;  // negative: the agent default
  std::string out_dir = "runs";
  std::string name;  // subdirectory; defaults to "<algo>-<band>"

  std::string run_name() const {
    return name.empty() ? std::string(agents::algo_name(algo)) + "-" + env::band_name(band) : name;
  }

  agents::AgentConfig agent_config() const {
    agents::AgentConfig c = agents::AgentConfig::for_algo(algo);
    c.band = band;
    c.rho = rho;
    c.eval_every = eval_every;
    c.eval_episodes = eval_episodes;
    if (her_k >= 0) c.her_k = her_k;
    if (eps_min >= 0.0) c.eps_min = eps_min;
    return c;
  }

  void validate() const {
    if (seeds.empty()) throw ConfigError("seed list must not be empty");
    if (budget < 1 || eval_every < 1 || eval_episodes < 1 || prior_steps < 1)
      throw ConfigError("budget, cadence, episode count and prior steps must be positive");
    if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("rho must lie in [0, 1)");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline std::vector<std::uint64_t> parse_seeds(const std::string& v) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stoull(tok));
  }
  return out;
}

}  // namespace detail

/// Applies one key=value setting. Unknown keys and unparsable values throw ConfigError.
inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  try {
    if (key == "algo") c.algo = agents::parse_algo(value);
    else if (key == "band" || key == "task") c.band = env::parse_band(value);
    else if (key == "dataset") c.dataset = value;
    else if (key == "prior") c.prior = value;
    else if (key == "prior_steps") c.prior_steps = std::stol(value);
    else if (key == "rho") c.rho = std::stod(value);
    else if (key == "seeds") c.seeds = detail::parse_seeds(value);
    else if (key == "budget") c.budget = std::stol(value);
    else if (key == "eval_every") c.eval_every = std::stol(value);
    else if (key == "eval_episodes") c.eval_episodes = std::stoi(value);
    else if (key == "her_k") c.her_k = std::stoi(value);
    else if (key == "eps_min") c.eps_min = std::stod(value);
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "name") c.name = value;
    else throw ConfigError("unknown key '" + key + "'");
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad value '" + value + "' for key '" + key + "'");
  } catch (const std::out_of_range&) {
    throw ConfigError("value out of range for key '" + key + "'");
  }
}

/// Flat key=value text; '#' starts a comment.
inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    try {
      apply_setting(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return parse_config(in);
}

inline std::string dump_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "algo=" << agents::algo_name(c.algo) << "\nband=" << env::band_name(c.band) << "\ndataset=" << c.dataset
     << "\nprior=" << c.prior << "\nprior_steps=" << c.prior_steps << "\nrho=" << nn::detail::fmt_double(c.rho)
     << "\nseeds=";
  for (std::size_t i = 0; i < c.seeds.size(); ++i) os << (i ? "," : "") << c.seeds[i];
  os << "\nbudget=" << c.budget << "\neval_every=" << c.eval_every << "\neval_episodes=" << c.eval_episodes
     << "\nher_k=" << c.her_k << "\neps_min=" << nn::detail::fmt_double(c.eps_min) << "\nout_dir=" << c.out_dir
     << "\nname=" << c.name << "\n";
  return os.str();
}

/// Relative output directories are placed under $PLAYPRIOR_OUT when it is set.
inline fs::path resolve_out(const std::string& dir) {
  fs::path p(dir);
  if (p.is_relative())
    if (const char* root = std::getenv(kOutputRootVar); root && *root) p = fs::path(root) / p;
  return p;
}

// ---------------------------------------------------------------------------
// Metrics files

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kMetricsHeader = "step,success_rate,cumulative_infeasible,mean_loss,epsilon";

inline void write_metrics_csv(const std::vector<agents::MetricsRow>& rows, std::ostream& out) {
  out << kMetricsHeader << "\n";
  for (const auto& r : rows)
    out << r.step << "," << fmt(r.success_rate) << "," << r.cumulative_infeasible << "," << fmt(r.mean_loss) << ","
        << fmt(r.epsilon) << "\n";
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(trim(tok));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError(where + ": not a number '" + s + "'");
  }
}

}  // namespace detail

/// Header row plus numeric rows; FormatError names the file and line.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open");
  CsvTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    if (t.header.empty()) {
      t.header = cells;
      continue;
    }
    const std::string where = path + ":" + std::to_string(lineno);
    if (cells.size() != t.header.size())
      throw FormatError(where + ": expected " + std::to_string(t.header.size()) + " fields");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(detail::parse_number(c, where));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw FormatError(path + ": empty file");
  return t;
}

inline std::vector<agents::MetricsRow> read_metrics_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  std::ostringstream want;
  for (std::size_t i = 0; i < t.header.size(); ++i) want << (i ? "," : "") << t.header[i];
  if (want.str() != kMetricsHeader) throw FormatError(path + ":1: not a metrics file");
  std::vector<agents::MetricsRow> rows;
  for (const auto& r : t.rows)
    rows.push_back({static_cast<long>(r[0]), r[1], static_cast<long>(r[2]), r[3], r[4]});
  return rows;
}

struct AggregateRow {
  long step = 0;
  double success_mean = 0.0, success_std = 0.0;
  double infeasible_mean = 0.0, infeasible_std = 0.0;
  double loss_mean = 0.0, loss_std = 0.0;
  double epsilon = 0.0;
  int n_seeds = 0;
};

inline constexpr const char* kAggregateHeader =
    "step,success_mean,success_std,infeasible_mean,infeasible_std,loss_mean,loss_std,epsilon,n_seeds";

/// Mean and sample standard deviation per evaluation point, over runs that reached it.
inline std::vector<AggregateRow> aggregate(const std::vector<std::vector<agents::MetricsRow>>& runs) {
  std::map<long, std::vector<const agents::MetricsRow*>> by_step;
  for (const auto& run : runs)
    for (const auto& r : run) by_step[r.step].push_back(&r);
  std::vector<AggregateRow> out;
  for (const auto& [step, rows] : by_step) {
    std::vector<double> s, inf, loss;
    for (const auto* r : rows) {
      s.push_back(r->success_rate);
      inf.push_back(static_cast<double>(r->cumulative_infeasible));
      loss.push_back(r->mean_loss);
    }
    out.push_back({step, stats::mean(s), stats::stddev(s), stats::mean(inf), stats::stddev(inf), stats::mean(loss),
                   stats::stddev(loss), rows.front()->epsilon, static_cast<int>(rows.size())});
  }
  return out;
}

inline void write_aggregate_csv(const std::vector<AggregateRow>& rows, std::ostream& out) {
  out << kAggregateHeader << "\n";
  for (const auto& r : rows)
    out << r.step << "," << fmt(r.success_mean) << "," << fmt(r.success_std) << "," << fmt(r.infeasible_mean) << ","
        << fmt(r.infeasible_std) << "," << fmt(r.loss_mean) << "," << fmt(r.loss_std) << "," << fmt(r.epsilon) << ","
        << r.n_seeds << "\n";
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) h = (h ^ c) * 0x100000001b3ull;
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline std::string dataset_checksum(const play::PlayDataset& ds) {
  std::ostringstream os;
  play::save(ds, os);
  return hex64(fnv1a(os.str()));
}

// ---------------------------------------------------------------------------
// Runs

/// Loaded or generated inputs shared by every seed of an experiment.
struct Resources {
  std::shared_ptr<const play::PlayDataset> dataset;
  std::shared_ptr<const prior::PriorModel> prior;
};

inline std::shared_ptr<const prior::PriorModel> fit_prior(const play::PlayDataset& ds, long steps, std::uint64_t seed) {
  prior::PriorConfig pc;
  pc.steps = steps;
  pc.seed = seed;
  pc.batch = std::min<int>(pc.batch, static_cast<int>(ds.size() - (ds.size() + 9) / 10));
  return std::make_shared<const prior::PriorModel>(prior::train_prior(ds, pc));
}

/// Reads the dataset and prior named by the config. Fails before any training when a
/// required file is missing.
inline Resources load_resources(const ExperimentConfig& c) {
  Resources r;
  if (agents::needs_dataset(c.algo)) {
    if (c.dataset.empty()) throw ConfigError(std::string(agents::algo_name(c.algo)) + " needs dataset=<path>");
    if (!fs::exists(c.dataset)) throw ConfigError("dataset not found: " + c.dataset);
    r.dataset = std::make_shared<const play::PlayDataset>(play::load(c.dataset));
  }
  if (agents::uses_prior(c.algo)) {
    if (!c.prior.empty()) {
      if (!fs::exists(c.prior)) throw ConfigError("prior checkpoint not found: " + c.prior);
      r.prior = std::make_shared<const prior::PriorModel>(prior::load_prior(c.prior));
    } else {
      r.prior = fit_prior(*r.dataset, c.prior_steps, 0);
    }
  }
  return r;
}

inline agents::AgentInputs make_inputs(const Resources& r, double rho) {
  agents::AgentInputs in;
  if (r.prior) in.selector = prior::SelectionOperator(r.prior, rho);
  in.dataset = r.dataset.get();
  return in;
}

struct RunOutput {
  fs::path dir;
  std::vector<std::vector<agents::MetricsRow>> per_seed;
  std::vector<AggregateRow> aggregate;
};

/// Trains every seed, writing seed_<s>.csv, aggregate.csv and manifest.json under
/// <out_dir>/<run_name>.
inline RunOutput run(const ExperimentConfig& c, const Resources& res, std::ostream* log = nullptr) {
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RunOutput out;
  out.dir = resolve_out(c.out_dir) / c.run_name();
  fs::create_directories(out.dir);
  const agents::AgentConfig acfg = c.agent_config();
  const agents::AgentInputs in = make_inputs(res, c.rho);
  for (auto seed : c.seeds) {
    const agents::TrainResult tr = agents::train(acfg, in, seed, c.budget);
    std::ofstream f(out.dir / ("seed_" + std::to_string(seed) + ".csv"), std::ios::binary);
    write_metrics_csv(tr.rows, f);
    out.per_seed.push_back(tr.rows);
    if (log)
      *log << c.run_name() << " seed " << seed << ": final success "
           << (tr.rows.empty() ? 0.0 : tr.rows.back().success_rate) << "\n";
  }
  out.aggregate = aggregate(out.per_seed);
  {
    std::ofstream f(out.dir / "aggregate.csv", std::ios::binary);
    write_aggregate_csv(out.aggregate, f);
  }
  nlohmann::json m;
  m["version"] = kVersion;
  m["config"] = dump_config(c);
  m["seeds"] = c.seeds;
  m["rule_table"] = env::kRuleTableVersion;
  m["dataset_checksum"] = res.dataset ? dataset_checksum(*res.dataset) : "";
  m["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ofstream(out.dir / "manifest.json") << m.dump(2) << "\n";
  return out;
}

inline RunOutput run(const ExperimentConfig& c, std::ostream* log = nullptr) { return run(c, load_resources(c), log); }

// ---------------------------------------------------------------------------
// Sweeps

/// Steps-to-threshold for one training run; censored runs report budget + 1.
struct SweepRecord {
  std::string label;
  double param = 0.0;
  std::uint64_t seed = 0;
  long steps = 0;
  bool censored = false;
  double final_success = 0.0;
  long infeasible = 0;
};

inline constexpr double kSuccessTarget = 0.95;

inline SweepRecord measure(const std::string& label, double param, const agents::AgentConfig& cfg,
                           const agents::AgentInputs& in, std::uint64_t seed, long budget,
                           double target = kSuccessTarget) {
  agents::AgentConfig c = cfg;
  c.stop_at_success = target;
  const agents::TrainResult tr = agents::train(c, in, seed, budget);
  SweepRecord r{label, param, seed, budget + 1, true, 0.0, 0};
  if (auto k = tr.steps_to(target)) r.steps = *k, r.censored = false;
  if (!tr.rows.empty()) r.final_success = tr.rows.back().success_rate, r.infeasible = tr.rows.back().cumulative_infeasible;
  return r;
}

inline void write_sweep_csv(const std::vector<SweepRecord>& rows, const std::string& param_name, std::ostream& out) {
  out << "label," << param_name << ",seed,steps_to_target,censored,final_success,cumulative_infeasible\n";
  for (const auto& r : rows)
    out << r.label << "," << fmt(r.param) << "," << r.seed << "," << r.steps << "," << (r.censored ? 1 : 0) << ","
        << fmt(r.final_success) << "," << r.infeasible << "\n";
}

/// Mean of 1 - |alpha(s)|/|A| along a policy that picks uniformly within alpha(s),
/// resetting tasks of `band` every horizon.
inline double infeasible_pair_ratio(const prior::SelectionOperator& sel, env::Band band, long steps,
                                    std::uint64_t seed) {
  if (steps < 1) throw InvalidInput("ratio estimate needs steps >= 1");
  Rng rng(seed);
  env::Task task;
  double total = 0.0;
  for (long t = 0; t < steps; ++t) {
    if (t % env::kHorizon == 0) task = env::reset(rng, band);
    const ActionSet a = sel.alpha(task.state);
    total += 1.0 - static_cast<double>(a.size()) / kNumPrimitives;
    task.state = env::step(task.state, a.nth(uniform_index(rng, a.size())), task.goal).next;
  }
  return total / static_cast<double>(steps);
}

struct RhoPoint {
  double rho = 0.0;
  double ratio = 0.0;
  std::vector<SweepRecord> runs;
  double median_steps() const {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(static_cast<double>(r.steps));
    return stats::median(v);
  }
  bool all_censored() const {
    for (const auto& r : runs)
      if (!r.censored) return false;
    return true;
  }
};

inline std::vector<RhoPoint> sweep_rho(const agents::AgentConfig& base, std::shared_ptr<const prior::PriorModel> model,
                                       const std::vector<double>& rhos, const std::vector<std::uint64_t>& seeds,
                                       long budget, long ratio_steps = 100000, std::ostream* log = nullptr) {
  if (std::find(rhos.begin(), rhos.end(), 0.0) == rhos.end()) throw ConfigError("rho list must include 0");
  std::vector<RhoPoint> out;
  for (double rho : rhos) {
    RhoPoint p;
    p.rho = rho;
    const prior::SelectionOperator sel(model, rho);
    p.ratio = infeasible_pair_ratio(sel, base.band, ratio_steps, 17);
    agents::AgentConfig cfg = base;
    cfg.algo = agents::Algo::ElfP;
    cfg.rho = rho;
    agents::AgentInputs in;
    in.selector = sel;
    for (auto seed : seeds) {
      p.runs.push_back(measure("elfp", rho, cfg, in, seed, budget));
      if (log) *log << "rho " << rho << " seed " << seed << ": steps " << p.runs.back().steps << "\n";
    }
    out.push_back(std::move(p));
  }
  return out;
}

inline void write_rho_csv(const std::vector<RhoPoint>& pts, std::ostream& out) {
  out << "rho,ratio,seed,steps_to_target,censored\n";
  for (const auto& p : pts)
    for (const auto& r : p.runs)
      out << fmt(p.rho) << "," << fmt(p.ratio) << "," << r.seed << "," << r.steps << "," << (r.censored ? 1 : 0) << "\n";
}

/// Spearman correlation of ratio against median steps over points with at least one
/// uncensored run.
inline double rho_trend(const std::vector<RhoPoint>& pts) {
  std::vector<double> x, y;
  for (const auto& p : pts)
    if (!p.all_censored()) x.push_back(p.ratio), y.push_back(p.median_steps());
  if (x.size() < 2) return NAN;
  return stats::spearman(x, y);
}

/// ELF-P and DDQN+Prefill on each dataset size. Each size gets its own play data and prior.
inline std::vector<SweepRecord> sweep_dataset_size(const std::vector<std::size_t>& sizes, env::Band band,
                                                   const std::vector<std::uint64_t>& seeds, long budget,
                                                   long prior_steps, std::uint64_t data_seed = 7,
                                                   std::ostream* log = nullptr) {
  std::vector<SweepRecord> out;
  for (std::size_t n : sizes) {
    const play::PlayDataset ds = play::collect_play(n, derive_seed(data_seed, n));
    const auto model = fit_prior(ds, prior_steps, 0);
    for (agents::Algo algo : {agents::Algo::ElfP, agents::Algo::Prefill}) {
      agents::AgentConfig cfg = agents::AgentConfig::for_algo(algo);
      cfg.band = band;
      agents::AgentInputs in;
      in.dataset = &ds;
      if (algo == agents::Algo::ElfP) in.selector = prior::SelectionOperator(model, cfg.rho);
      for (auto seed : seeds) {
        out.push_back(measure(agents::algo_name(algo), static_cast<double>(n), cfg, in, seed, budget));
        if (log) *log << agents::algo_name(algo) << " n=" << n << " seed " << seed << ": " << out.back().steps << "\n";
      }
    }
  }
  return out;
}

/// ELF-P with k hindsight copies per transition, for each k and band.
inline std::vector<SweepRecord> sweep_her(const std::vector<int>& ks, const std::vector<env::Band>& bands,
                                          std::shared_ptr<const prior::PriorModel> model,
                                          const std::vector<std::uint64_t>& seeds, long budget,
                                          std::ostream* log = nullptr) {
  std::vector<SweepRecord> out;
  for (env::Band band : bands)
    for (int k : ks) {
      agents::AgentConfig cfg = agents::AgentConfig::for_algo(agents::Algo::ElfP);
      cfg.band = band;
      cfg.her_k = k;
      agents::AgentInputs in;
      in.selector = prior::SelectionOperator(model, cfg.rho);
      for (auto seed : seeds) {
        out.push_back(measure(std::string("elfp-her-") + env::band_name(band), k, cfg, in, seed, budget));
        if (log) *log << "her k=" << k << " " << env::band_name(band) << " seed " << seed << ": " << out.back().steps << "\n";
      }
    }
  return out;
}

// ---------------------------------------------------------------------------
// Charts

struct Series {
  std::string label;
  std::vector<double> x, mean, sd;
};

/// Loads one series per aggregate CSV (label = file stem) for the given metric prefix
/// ("success" or "infeasible").
inline std::vector<Series> load_series(const std::vector<std::string>& files, const std::string& metric) {
  std::vector<Series> out;
  for (const auto& f : files) {
    const CsvTable t = read_csv(f);
    const int cx = t.column("step"), cm = t.column(metric + "_mean"), cs = t.column(metric + "_std");
    if (cx < 0 || cm < 0 || cs < 0) throw FormatError(f + ":1: missing step/" + metric + "_mean/" + metric + "_std columns");
    Series s;
    s.label = fs::path(f).stem().string();
    if (s.label == "aggregate") s.label = fs::path(f).parent_path().filename().string();
    for (const auto& r : t.rows) {
      s.x.push_back(r[cx]);
      s.mean.push_back(r[cm]);
      s.sd.push_back(r[cs]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline const char* color(std::size_t i) {
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  return kColors[i % 6];
}

}  // namespace detail

/// Line chart with a +-1 standard deviation band per series.
inline std::string render_svg(const std::vector<Series>& series, const std::string& title, const std::string& ylabel) {
  const double W = 640, H = 400, L = 70, R = 150, T = 40, B = 50;
  double xmax = 1, ymax = 1e-12, ymin = 0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmax = std::max(xmax, s.x[i]);
      ymax = std::max(ymax, s.mean[i] + s.sd[i]);
      ymin = std::min(ymin, s.mean[i] - s.sd[i]);
    }
  if (ymax <= ymin) ymax = ymin + 1;
  auto px = [&](double x) { return L + (W - L - R) * x / xmax; };
  auto py = [&](double y) { return H - B - (H - T - B) * (y - ymin) / (ymax - ymin); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << " " << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
     << title << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmax * k / 4, yv = ymin + (ymax - ymin) * k / 4;
    os << "<text x=\"" << detail::num(px(xv)) << "\" y=\"" << H - B + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << detail::num(xv) << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << detail::num(py(yv) + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << detail::num(yv) << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">environment steps</text>\n";
  os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
     << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << ylabel << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const Series& s = series[i];
    if (s.x.empty()) continue;
    os << "<polygon fill=\"" << detail::color(i) << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t j = 0; j < s.x.size(); ++j) os << detail::num(px(s.x[j])) << "," << detail::num(py(s.mean[j] + s.sd[j])) << " ";
    for (std::size_t j = s.x.size(); j-- > 0;) os << detail::num(px(s.x[j])) << "," << detail::num(py(s.mean[j] - s.sd[j])) << " ";
    os << "\"/>\n<polyline fill=\"none\" stroke=\"" << detail::color(i) << "\" stroke-width=\"2\" points=\"";
    for (std::size_t j = 0; j < s.x.size(); ++j) os << detail::num(px(s.x[j])) << "," << detail::num(py(s.mean[j])) << " ";
    os << "\"/>\n";
    os << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (i + 1) << "\" fill=\"" << detail::color(i)
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// Writes success.svg and infeasible.svg into out_dir; returns the written paths.
inline std::vector<fs::path> emit_plots(const std::vector<std::string>& files, const fs::path& out_dir) {
  if (files.empty()) throw InvalidInput("emit_plots needs at least one CSV");
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  const std::pair<const char*, const char*> metrics[] = {{"success", "success rate"},
                                                         {"infeasible", "cumulative infeasible attempts"}};
  for (const auto& [metric, ylabel] : metrics) {
    const fs::path p = out_dir / (std::string(metric) + ".svg");
    std::ofstream(p, std::ios::binary) << render_svg(load_series(files, metric), ylabel, ylabel);
    written.push_back(p);
  }
  return written;
}

}  // namespace playprior::harness
