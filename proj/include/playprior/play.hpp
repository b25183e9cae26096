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

// Task-agnostic play data: (state, primitive, next state) triples recorded
// while a scripted or human operator executes feasible primitives.

#pragma once

#include <array>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "playprior/env.hpp"

namespace playprior::play {

using StateVec = std::array<double, env::kStateDim>;

struct PlayRecord {
  StateVec s{};
  int a = 0;
  StateVec sp{};
  bool operator==(const PlayRecord&) const = default;
};

struct PlayDataset {
  std::string rule_table = env::kRuleTableVersion;
  std::uint64_t seed = 0;
  std::vector<PlayRecord> records;

  std::size_t size() const { return records.size(); }
  bool operator==(const PlayDataset&) const = default;
};

/// Scripted collector: uniform over the feasible set, random tasks of both bands, horizon 100.
inline PlayDataset collect_play(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("collect_play needs n >= 1");
  PlayDataset ds;
  ds.seed = seed;
  ds.records.reserve(n);
  Rng rng(seed);
  env::Task task;
  int t = env::kHorizon;
  while (ds.records.size() < n) {
    if (t == env::kHorizon) {
      task = env::reset(rng, uniform_index(rng, 2) == 0 ? env::Band::Medium : env::Band::Hard);
      t = 0;
    }
    const ActionSet feasible = env::feasible_oracle(task.state, task.goal);
    const int a = feasible.nth(uniform_index(rng, feasible.size()));
    const env::StepOutcome o = env::step(task.state, a, task.goal);
    ds.records.push_back({env::encode(task.state), a, env::encode(o.next)});
    task.state = o.next;
    ++t;
  }
  return ds;
}

/// Replays (s, a) and checks it reproduces sp. GoGoal depends on the goal, which is
/// recovered from where the end-effector ended up (hovering over the goal site).
inline bool record_consistent(const PlayRecord& r) {
  const env::EnvState s = env::decode(r.s);
  const env::EnvState sp = env::decode(r.sp);
  env::Goal g;
  if (r.a == env::index_of(env::Primitive::GoGoal))
    g.target = {sp.ee[0], sp.ee[1], sp.ee[2] - env::kHoverHeight};
  const env::StepOutcome o = env::step(s, r.a, g);
  return !o.infeasible && o.next == sp;
}

// ---------------------------------------------------------------------------
// JSONL persistence. Line 1 is a header object; each following line is
// {"s":[11 reals],"a":int,"sp":[11 reals]}.

inline void save(const PlayDataset& ds, std::ostream& out) {
  nlohmann::json header = {{"format", "playprior-play"},
                           {"rule_table", ds.rule_table},
                           {"seed", ds.seed},
                           {"size", ds.records.size()}};
  out << header.dump() << '\n';
  for (const auto& r : ds.records) {
    nlohmann::json j = {{"s", r.s}, {"a", r.a}, {"sp", r.sp}};
    out << j.dump() << '\n';
  }
}

inline void save(const PlayDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write dataset to " + path);
  save(ds, out);
}

namespace detail {

inline StateVec read_state(const nlohmann::json& j, const char* key, int lineno) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != env::kStateDim)
    throw FormatError("line " + std::to_string(lineno) + ": '" + key + "' must be an array of 11 numbers");
  StateVec v{};
  for (int i = 0; i < env::kStateDim; ++i) {
    if (!j[key][i].is_number())
      throw FormatError("line " + std::to_string(lineno) + ": non-numeric entry in '" + key + "'");
    v[i] = j[key][i].get<double>();
  }
  return v;
}

}  // namespace detail

inline PlayDataset load(std::istream& in) {
  PlayDataset ds;
  std::string line;
  int lineno = 0;
  std::size_t declared = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError("line " + std::to_string(lineno) + ": malformed JSON (" + e.what() + ")");
    }
    if (!have_header) {
      if (!j.is_object() || j.value("format", "") != "playprior-play")
        throw FormatError("line " + std::to_string(lineno) + ": missing dataset header");
      ds.rule_table = j.value("rule_table", "");
      if (ds.rule_table != env::kRuleTableVersion)
        throw FormatError("line " + std::to_string(lineno) + ": unknown rule-table version '" + ds.rule_table +
                          "'");
      ds.seed = j.value("seed", std::uint64_t{0});
      declared = j.value("size", std::size_t{0});
      have_header = true;
      continue;
    }
    if (!j.is_object()) throw FormatError("line " + std::to_string(lineno) + ": record must be an object");
    PlayRecord r;
    r.s = detail::read_state(j, "s", lineno);
    r.sp = detail::read_state(j, "sp", lineno);
    if (!j.contains("a") || !j["a"].is_number_integer())
      throw FormatError("line " + std::to_string(lineno) + ": 'a' must be an integer");
    r.a = j["a"].get<int>();
    if (r.a < 0 || r.a >= kNumPrimitives)
      throw FormatError("line " + std::to_string(lineno) + ": action index out of range");
    ds.records.push_back(r);
  }
  if (!have_header) throw FormatError("line 1: empty dataset file");
  if (declared != ds.records.size())
    throw FormatError("line " + std::to_string(lineno + 1) + ": header declares " + std::to_string(declared) +
                      " records but file holds " + std::to_string(ds.records.size()));
  return ds;
}

inline PlayDataset load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open dataset " + path);
  return load(in);
}

// ---------------------------------------------------------------------------
// Interactive collection

inline std::string describe(const env::EnvState& s) {
  std::ostringstream os;
  os.precision(3);
  os << "  end-effector (" << s.ee[0] << ", " << s.ee[1] << ", " << s.ee[2] << ")  gripper "
     << (s.gripper >= 0.5 ? "closed" : "open") << "\n"
     << "  block        (" << s.block[0] << ", " << s.block[1] << ", " << s.block[2] << ")\n"
     << "  drawers      " << s.drawers[0] << " " << s.drawers[1] << " " << s.drawers[2] << "   door " << s.door
     << "\n";
  return os.str();
}

/// Terminal loop: the operator types a primitive index per step, or `q` to quit.
/// Infeasible choices are reported and not recorded.
inline PlayDataset interactive_play(std::uint64_t seed, std::istream& in, std::ostream& out) {
  PlayDataset ds;
  ds.seed = seed;
  Rng rng(seed);
  env::Task task = env::reset(rng, uniform_index(rng, 2) == 0 ? env::Band::Medium : env::Band::Hard);
  int t = 0;
  std::string tok;
  while (true) {
    out << "\nstep " << t << "\n" << describe(task.state);
    for (int a = 0; a < kNumPrimitives; ++a) out << "  [" << a << "] " << env::kPrimitiveNames[a] << "\n";
    out << "primitive (q to quit)> " << std::flush;
    if (!(in >> tok) || tok == "q" || tok == "quit") break;
    int a = -1;
    try {
      std::size_t used = 0;
      a = std::stoi(tok, &used);
      if (used != tok.size()) a = -1;
    } catch (const std::exception&) {
      a = -1;
    }
    if (a < 0 || a >= kNumPrimitives) {
      out << "not a primitive index: '" << tok << "'\n";
      continue;
    }
    const env::StepOutcome o = env::step(task.state, a, task.goal);
    if (o.infeasible) {
      out << "warning: " << env::kPrimitiveNames[a] << " is infeasible here; state unchanged\n";
      continue;
    }
    ds.records.push_back({env::encode(task.state), a, env::encode(o.next)});
    task.state = o.next;
    if (++t % env::kHorizon == 0)
      task = env::reset(rng, uniform_index(rng, 2) == 0 ? env::Band::Medium : env::Band::Hard);
  }
  out << "\nrecorded " << ds.records.size() << " primitives\n";
  return ds;
}

}  // namespace playprior::play
