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

// Command-line front end. Exit codes: 0 success, 1 runtime failure or failed check,
// 2 bad usage or configuration.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "playprior/harness.hpp"
#include "playprior/tabular.hpp"

using namespace playprior;
namespace fs = std::filesystem;

namespace {

struct PriorSource {
  std::string dataset;
  std::string prior;
  long prior_steps = 100000;
  std::uint64_t prior_seed = 0;
};

void add_prior_options(CLI::App* cmd, PriorSource& src) {
  cmd->add_option("--dataset", src.dataset, "play dataset (JSONL) used to fit the prior");
  cmd->add_option("--prior", src.prior, "prior checkpoint; skips fitting");
  cmd->add_option("--prior-steps", src.prior_steps, "prior training steps when fitting")->check(CLI::PositiveNumber);
  cmd->add_option("--prior-seed", src.prior_seed, "seed for prior fitting");
}

std::shared_ptr<const prior::PriorModel> obtain_prior(const PriorSource& src) {
  if (!src.prior.empty()) {
    if (!fs::exists(src.prior)) throw ConfigError("prior checkpoint not found: " + src.prior);
    return std::make_shared<const prior::PriorModel>(prior::load_prior(src.prior));
  }
  if (src.dataset.empty()) throw ConfigError("need --prior or --dataset");
  if (!fs::exists(src.dataset)) throw ConfigError("dataset not found: " + src.dataset);
  return harness::fit_prior(play::load(src.dataset), src.prior_steps, src.prior_seed);
}

std::ofstream open_out(const std::string& path) {
  const fs::path p = harness::resolve_out(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  return f;
}

int cmd_collect_play(std::size_t n, std::uint64_t seed, const std::string& out) {
  const play::PlayDataset ds = play::collect_play(n, seed);
  std::ofstream f = open_out(out);
  play::save(ds, f);
  std::cout << "wrote " << ds.size() << " records to " << out << "\n";
  return 0;
}

int cmd_play(std::uint64_t seed, const std::string& out) {
  const play::PlayDataset ds = play::interactive_play(seed, std::cin, std::cout);
  std::ofstream f = open_out(out);
  play::save(ds, f);
  return 0;
}

int cmd_train_prior(const std::string& dataset, double rho, const std::string& out, long steps, std::uint64_t seed,
                    std::size_t eval_states) {
  if (!fs::exists(dataset)) throw ConfigError("dataset not found: " + dataset);
  const play::PlayDataset ds = play::load(dataset);
  prior::PriorConfig cfg;
  cfg.steps = steps;
  cfg.seed = seed;
  const auto model = std::make_shared<const prior::PriorModel>(prior::train_prior(ds, cfg));
  prior::save_prior(*model, harness::resolve_out(out).string());
  const prior::PriorQuality q = prior::prior_quality(prior::SelectionOperator(model, rho), eval_states, seed + 1);
  std::printf("heldout_nll %.4f (uniform %.4f)\nrho %g recall %.4f precision %.4f infeasible_rate %.4f\n",
              model->final_heldout_nll(), std::log(10.0), rho, q.recall, q.precision, q.infeasible_rate);
  return 0;
}

struct TrainArgs {
  std::string algo = "elfp", task = "medium", out = "metrics.csv";
  PriorSource src;
  double rho = 0.01;
  std::uint64_t seed = 0;
  long budget = 200000;
  long eval_every = 2500;
  int eval_episodes = 50;
  int her_k = -1;
  double eps_min = -1.0;
};

int cmd_train(const TrainArgs& a) {
  harness::ExperimentConfig c;
  c.algo = agents::parse_algo(a.algo);
  c.band = env::parse_band(a.task);
  c.rho = a.rho;
  c.budget = a.budget;
  c.eval_every = a.eval_every;
  c.eval_episodes = a.eval_episodes;
  c.her_k = a.her_k;
  c.eps_min = a.eps_min;
  c.seeds = {a.seed};
  c.validate();
  harness::Resources res;
  if (agents::needs_dataset(c.algo) && !(agents::uses_prior(c.algo) && !a.src.prior.empty())) {
    if (a.src.dataset.empty()) throw ConfigError(a.algo + " needs --dataset");
    if (!fs::exists(a.src.dataset)) throw ConfigError("dataset not found: " + a.src.dataset);
    res.dataset = std::make_shared<const play::PlayDataset>(play::load(a.src.dataset));
  }
  if (agents::uses_prior(c.algo)) res.prior = obtain_prior(a.src);
  const agents::TrainResult tr = agents::train(c.agent_config(), harness::make_inputs(res, c.rho), a.seed, a.budget);
  std::ofstream f = open_out(a.out);
  harness::write_metrics_csv(tr.rows, f);
  const auto& last = tr.rows.back();
  std::printf("%s %s seed %llu: step %ld success %.3f infeasible %ld\n", a.algo.c_str(), a.task.c_str(),
              static_cast<unsigned long long>(a.seed), last.step, last.success_rate, last.cumulative_infeasible);
  return 0;
}

int cmd_verify_tabular(int trials, int max_states, int max_actions, std::uint64_t seed, const std::string& sweep_out) {
  if (max_states < 2 || max_actions < 2 || trials < 1) throw ConfigError("need trials >= 1 and sizes >= 2");
  Rng rng(seed);
  int pass = 0, fail = 0, vacuous = 0;
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const int nS = 2 + uniform_index(rng, max_states - 1), nA = 2 + uniform_index(rng, max_actions - 1);
    const auto inst = derive_seed(seed, static_cast<std::uint64_t>(i));
    const tabular::TabularMDP m = tabular::random_mdp(inst, nS, nA);
    const tabular::MaskTable mask = tabular::optimal_preserving_mask(m, uniform01(rng), derive_seed(inst, 1));
    const tabular::TheoremReport r = tabular::theorem_check(m, mask);
    pass += r.verdict == tabular::Verdict::Pass;
    fail += r.verdict == tabular::Verdict::Fail;
    vacuous += r.verdict == tabular::Verdict::Vacuous;
    worst = std::max({worst, r.value_gap, r.policy_gap});
  }
  std::printf("theorem: %d pass, %d fail, %d vacuous of %d; worst gap %.3g\n", pass, fail, vacuous, trials, worst);
  if (!sweep_out.empty()) {
    tabular::SweepConfig sc;
    sc.seed = seed;
    const auto rows = tabular::complexity_sweep(sc);
    std::ofstream f = open_out(sweep_out);
    f << "density,ratio,median_steps,iqr,censored,runs\n";
    std::vector<double> ratio, steps;
    for (const auto& r : rows) {
      f << harness::fmt(r.density) << "," << harness::fmt(r.ratio) << "," << harness::fmt(r.median_steps) << ","
        << harness::fmt(r.iqr) << "," << r.censored << "," << r.runs << "\n";
      ratio.push_back(r.ratio);
      steps.push_back(r.median_steps);
    }
    std::printf("sweep: spearman(ratio, steps) = %.3f\n", stats::spearman(ratio, steps));
  }
  return fail == 0 && vacuous == 0 ? 0 : 1;
}

int cmd_run(const std::string& config, const std::vector<std::string>& sets) {
  harness::ExperimentConfig c = harness::load_config(config);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    harness::apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  c.validate();
  const harness::RunOutput out = harness::run(c, &std::cout);
  if (out.per_seed.size() != c.seeds.size()) return 1;
  for (const auto& rows : out.per_seed)
    if (rows.empty() || rows.back().step != c.budget - c.budget % c.eval_every) return 1;
  std::cout << "wrote " << out.dir.string() << "\n";
  return 0;
}

int cmd_sweep_rho(const PriorSource& src, const std::string& task, const std::vector<double>& rhos,
                  const std::vector<std::uint64_t>& seeds, long budget, long ratio_steps, const std::string& out) {
  agents::AgentConfig base;
  base.band = env::parse_band(task);
  const auto pts = harness::sweep_rho(base, obtain_prior(src), rhos, seeds, budget, ratio_steps, &std::cout);
  std::ofstream f = open_out(out);
  harness::write_rho_csv(pts, f);
  std::printf("spearman(ratio, median steps) over uncensored points = %.3f\n", harness::rho_trend(pts));
  return 0;
}

int cmd_sweep_datasize(const std::vector<std::size_t>& sizes, const std::string& task,
                       const std::vector<std::uint64_t>& seeds, long budget, long prior_steps, std::uint64_t data_seed,
                       const std::string& out) {
  const auto rows =
      harness::sweep_dataset_size(sizes, env::parse_band(task), seeds, budget, prior_steps, data_seed, &std::cout);
  std::ofstream f = open_out(out);
  harness::write_sweep_csv(rows, "dataset_size", f);
  return 0;
}

int cmd_sweep_her(const PriorSource& src, const std::vector<int>& ks, const std::vector<std::string>& tasks,
                  const std::vector<std::uint64_t>& seeds, long budget, const std::string& out) {
  std::vector<env::Band> bands;
  for (const auto& t : tasks) bands.push_back(env::parse_band(t));
  const auto rows = harness::sweep_her(ks, bands, obtain_prior(src), seeds, budget, &std::cout);
  std::ofstream f = open_out(out);
  harness::write_sweep_csv(rows, "her_k", f);
  return 0;
}

int cmd_plot(const std::vector<std::string>& files, const std::string& out) {
  for (const auto& p : harness::emit_plots(files, harness::resolve_out(out))) std::cout << "wrote " << p.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Play-guided hierarchical RL over motion primitives"};
  app.set_version_flag("--version", harness::kVersion);
  app.require_subcommand(1);

  std::size_t n = 10000;
  std::uint64_t seed = 0;
  std::string out;

  auto* collect = app.add_subcommand("collect-play", "generate a synthetic play dataset");
  collect->add_option("--n", n, "number of records")->check(CLI::PositiveNumber);
  collect->add_option("--seed", seed);
  collect->add_option("--out", out)->required();

  auto* play_cmd = app.add_subcommand("play", "record play data interactively from stdin");
  play_cmd->add_option("--seed", seed);
  play_cmd->add_option("--out", out)->required();

  std::string dataset;
  double rho = 0.01;
  long prior_steps = 100000;
  std::size_t eval_states = 1000;
  auto* tp = app.add_subcommand("train-prior", "fit the behavioral prior and report alpha quality");
  tp->add_option("--dataset", dataset)->required();
  tp->add_option("--rho", rho, "threshold used for the quality report");
  tp->add_option("--out", out)->required();
  tp->add_option("--steps", prior_steps)->check(CLI::PositiveNumber);
  tp->add_option("--seed", seed);
  tp->add_option("--eval-states", eval_states)->check(CLI::PositiveNumber);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "train one agent for one seed");
  train->add_option("--algo", ta.algo, "elfp|ddqn|her|prefill|dqfd|soft-elfp");
  train->add_option("--task", ta.task, "medium|hard");
  add_prior_options(train, ta.src);
  train->add_option("--rho", ta.rho);
  train->add_option("--seed", ta.seed);
  train->add_option("--budget", ta.budget)->check(CLI::PositiveNumber);
  train->add_option("--eval-every", ta.eval_every)->check(CLI::PositiveNumber);
  train->add_option("--eval-episodes", ta.eval_episodes)->check(CLI::PositiveNumber);
  train->add_option("--her-k", ta.her_k);
  train->add_option("--eps-min", ta.eps_min, "exploration floor; negative keeps the default");
  train->add_option("--out", ta.out, "metrics CSV path");

  int trials = 100, max_states = 20, max_actions = 6;
  std::string sweep_out;
  auto* vt = app.add_subcommand("verify-tabular", "check the reduced-MDP optimality theorem on random MDPs");
  vt->add_option("--trials", trials);
  vt->add_option("--max-states", max_states);
  vt->add_option("--max-actions", max_actions);
  vt->add_option("--seed", seed);
  vt->add_option("--sweep-out", sweep_out, "also run the mask-density sweep and write its CSV here");

  std::string config;
  std::vector<std::string> sets;
  auto* run = app.add_subcommand("run", "multi-seed experiment from a key=value config");
  run->add_option("--config", config)->required();
  run->add_option("--set", sets, "override a config key (key=value)");

  PriorSource src;
  std::string task = "medium";
  std::vector<double> rhos{0.0, 0.001, 0.01, 0.05};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  long budget = 200000, ratio_steps = 100000;
  auto* sr = app.add_subcommand("sweep-rho", "steps-to-0.95 against the infeasible-pair ratio for several rho");
  add_prior_options(sr, src);
  sr->add_option("--task", task);
  sr->add_option("--rhos", rhos)->delimiter(',');
  sr->add_option("--seeds", seeds)->delimiter(',');
  sr->add_option("--budget", budget)->check(CLI::PositiveNumber);
  sr->add_option("--ratio-steps", ratio_steps)->check(CLI::PositiveNumber);
  sr->add_option("--out", out)->required();

  std::vector<std::size_t> sizes{1000, 10000, 100000};
  std::uint64_t data_seed = 7;
  auto* sd = app.add_subcommand("sweep-datasize", "ELF-P and DDQN+Prefill across play dataset sizes");
  sd->add_option("--sizes", sizes)->delimiter(',');
  sd->add_option("--task", task);
  sd->add_option("--seeds", seeds)->delimiter(',');
  sd->add_option("--budget", budget)->check(CLI::PositiveNumber);
  sd->add_option("--prior-steps", prior_steps)->check(CLI::PositiveNumber);
  sd->add_option("--data-seed", data_seed);
  sd->add_option("--out", out)->required();

  std::vector<int> ks{0, 2, 4};
  std::vector<std::string> tasks{"medium", "hard"};
  auto* sh = app.add_subcommand("sweep-her", "ELF-P with k hindsight copies per transition");
  add_prior_options(sh, src);
  sh->add_option("--ks", ks)->delimiter(',');
  sh->add_option("--tasks", tasks)->delimiter(',');
  sh->add_option("--seeds", seeds)->delimiter(',');
  sh->add_option("--budget", budget)->check(CLI::PositiveNumber);
  sh->add_option("--out", out)->required();

  std::vector<std::string> files;
  auto* plot = app.add_subcommand("plot", "render success and infeasible-attempt charts from aggregate CSVs");
  plot->add_option("files", files)->required();
  plot->add_option("--out", out, "output directory")->default_val("plots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*collect) return cmd_collect_play(n, seed, out);
    if (*play_cmd) return cmd_play(seed, out);
    if (*tp) return cmd_train_prior(dataset, rho, out, prior_steps, seed, eval_states);
    if (*train) return cmd_train(ta);
    if (*vt) return cmd_verify_tabular(trials, max_states, max_actions, seed, sweep_out);
    if (*run) return cmd_run(config, sets);
    if (*sr) return cmd_sweep_rho(src, task, rhos, seeds, budget, ratio_steps, out);
    if (*sd) return cmd_sweep_datasize(sizes, task, seeds, budget, prior_steps, data_seed, out);
    if (*sh) return cmd_sweep_her(src, ks, tasks, seeds, budget, out);
    if (*plot) return cmd_plot(files, out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
