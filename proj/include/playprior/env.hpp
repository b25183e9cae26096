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

// Symbolic desk environment: a robot end-effector, one block, three stacked
// drawers and a sliding cabinet door. Ten object-centric primitives act as
// macro-actions; an infeasible primitive leaves the state untouched.
//
// Geometry (normalized workspace):
//   door handle (0.90, 0.50, 0.50)      shelf behind the door (0.90, 0.50, 0.30)
//   drawer handles (0.10, 0.70|0.50|0.30, 0.40), interiors at z = 0.35
//   center (0.50, 0.50, 0.60)           table sites: 3x3 grid at z = 0.25
// Reaches may only cross between zones (table, door, shelf, cabinet) through
// the center anchor. A reach to where the end-effector already is changes
// nothing, so it counts as infeasible.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <mutex>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "playprior/common.hpp"

namespace playprior::env {

using Vec3 = std::array<double, 3>;

enum class Primitive : int {
  GoDoorHandle = 0,
  GoDrawer1Handle,
  GoDrawer2Handle,
  GoDrawer3Handle,
  GoCenter,
  GoBlock,
  GoGoal,
  GraspRelease,
  PullPush,
  Slide,
};

inline constexpr std::array<const char*, kNumPrimitives> kPrimitiveNames = {
    "GoDoorHandle", "GoDrawer1Handle", "GoDrawer2Handle", "GoDrawer3Handle", "GoCenter",
    "GoBlock",      "GoGoal",          "GraspRelease",    "PullPush",        "Slide"};

inline constexpr int index_of(Primitive p) { return static_cast<int>(p); }

inline constexpr int kStateDim = 11;
inline constexpr int kGoalDim = 3;
inline constexpr double kSuccessThreshold = 0.1;  // l1 distance, strict
inline constexpr double kAttachRadius = 0.05;     // l-infinity, strict
inline constexpr double kHoverHeight = 0.12;      // GoGoal stops this far above the site
inline constexpr int kHorizon = 100;
inline constexpr const char* kRuleTableVersion = "desk-rules-1";

inline constexpr Vec3 kDoorHandle{0.90, 0.50, 0.50};
inline constexpr Vec3 kCenter{0.50, 0.50, 0.60};
inline constexpr Vec3 kShelf{0.90, 0.50, 0.30};
inline constexpr std::array<double, 3> kDrawerY{0.70, 0.50, 0.30};
inline constexpr double kDrawerHandleZ = 0.40;
inline constexpr double kDrawerInteriorZ = 0.35;
inline constexpr double kTableZ = 0.25;
inline constexpr std::array<double, 3> kTableGrid{0.35, 0.50, 0.65};

inline constexpr Vec3 drawer_handle(int i) { return {0.10, kDrawerY[i], kDrawerHandleZ}; }

/// Placement sites: 0-8 table grid (row-major in x then y), 9 shelf, 10-12 drawer interiors.
inline constexpr int kNumSites = 13;
inline constexpr int kShelfSite = 9;
inline constexpr int kFirstDrawerSite = 10;

inline constexpr Vec3 site_position(int site) {
  if (site < 9) return {kTableGrid[site / 3], kTableGrid[site % 3], kTableZ};
  if (site == kShelfSite) return kShelf;
  return {0.10, kDrawerY[site - kFirstDrawerSite], kDrawerInteriorZ};
}

struct EnvState {
  Vec3 ee{kCenter};
  double gripper = 0.0;  // 0 open, 1 closed
  Vec3 block{site_position(4)};
  std::array<double, 3> drawers{0.0, 0.0, 0.0};  // top to bottom; 0 closed, 1 open
  double door = 0.0;

  bool operator==(const EnvState&) const = default;
};

struct Goal {
  Vec3 target{site_position(0)};
  bool operator==(const Goal&) const = default;
};

struct StepOutcome {
  EnvState next;
  bool infeasible = false;
  int reward = 0;
  bool done = false;
};

enum class Band { Medium, Hard };

inline constexpr std::pair<int, int> band_range(Band b) {
  return b == Band::Medium ? std::pair{10, 16} : std::pair{17, 29};
}

inline const char* band_name(Band b) { return b == Band::Medium ? "medium" : "hard"; }

inline Band parse_band(const std::string& s) {
  if (s == "medium") return Band::Medium;
  if (s == "hard") return Band::Hard;
  throw ConfigError("unknown task band '" + s + "' (expected medium|hard)");
}

// ---------------------------------------------------------------------------
// Geometry

inline double linf(const Vec3& a, const Vec3& b) {
  return std::max({std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2])});
}

inline double l1(const Vec3& a, const Vec3& b) {
  return std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) + std::abs(a[2] - b[2]);
}

inline bool near(const Vec3& a, const Vec3& b) { return linf(a, b) < kAttachRadius; }

/// Site at `p` (within 1e-9), or -1.
inline int site_at(const Vec3& p) {
  for (int s = 0; s < kNumSites; ++s)
    if (linf(p, site_position(s)) < 1e-9) return s;
  return -1;
}

enum class Zone { Center, Table, Door, Shelf, Cabinet };

inline Zone zone_of(const Vec3& p) {
  if (linf(p, kCenter) < 1e-9) return Zone::Center;
  if (p[0] >= 0.85) return near(p, kDoorHandle) ? Zone::Door : Zone::Shelf;
  if (p[0] <= 0.15) return Zone::Cabinet;
  return Zone::Table;
}

inline bool path_clear(const Vec3& from, const Vec3& to) {
  const Zone a = zone_of(from), b = zone_of(to);
  return a == b || a == Zone::Center || b == Zone::Center;
}

inline bool attached(const EnvState& s) { return s.gripper >= 0.5 && near(s.ee, s.block); }

/// Drawer index (0-2) whose handle the gripper is closed on, -1 for the door, -2 for none.
inline int held_fixture(const EnvState& s) {
  if (s.gripper < 0.5 || attached(s)) return -2;
  if (near(s.ee, kDoorHandle)) return -1;
  for (int i = 0; i < 3; ++i)
    if (near(s.ee, drawer_handle(i))) return i;
  return -2;
}

inline bool holding_fixture(const EnvState& s) { return held_fixture(s) != -2; }

/// Whether a block placed at `p` can be reached: shelf needs the door open,
/// drawer interiors need their drawer open.
inline bool exposed(const EnvState& s, const Vec3& p) {
  if (p[0] >= 0.85) return s.door >= 0.5;
  if (p[0] <= 0.15) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(p[1] - kDrawerY[i]) < std::abs(p[1] - kDrawerY[best])) best = i;
    return s.drawers[best] >= 0.5;
  }
  return true;
}

inline Vec3 hover_over(const Vec3& site) { return {site[0], site[1], site[2] + kHoverHeight}; }

/// Where a released block comes to rest: the site under the end-effector,
/// falling back to the nearest table cell.
inline Vec3 drop_site(const Vec3& ee) {
  for (int s = 0; s < kNumSites; ++s) {
    const Vec3 p = site_position(s);
    if (std::abs(p[0] - ee[0]) < kAttachRadius && std::abs(p[1] - ee[1]) < kAttachRadius) return p;
  }
  int best = 0;
  double best_d = 1e9;
  for (int s = 0; s < 9; ++s) {
    const Vec3 p = site_position(s);
    const double d = std::abs(p[0] - ee[0]) + std::abs(p[1] - ee[1]);
    if (d < best_d) best_d = d, best = s;
  }
  return site_position(best);
}

// ---------------------------------------------------------------------------
// Reward and dynamics

inline int reward(const EnvState& s, const Goal& g) { return l1(s.block, g.target) < kSuccessThreshold ? 1 : 0; }

namespace detail {

inline StepOutcome reject(const EnvState& s, const Goal& g) {
  const int r = reward(s, g);
  return {s, true, r, r == 1};
}

inline StepOutcome accept(const EnvState& s, const Goal& g) {
  const int r = reward(s, g);
  return {s, false, r, r == 1};
}

inline StepOutcome reach(const EnvState& s, const Goal& g, const Vec3& dest, bool needs_open_gripper) {
  if (holding_fixture(s) && linf(dest, kCenter) > 1e-9) return reject(s, g);
  if (needs_open_gripper && s.gripper >= 0.5) return reject(s, g);
  if (!path_clear(s.ee, dest) || linf(s.ee, dest) < 1e-9) return reject(s, g);
  EnvState n = s;
  const bool carrying = attached(s);
  n.ee = dest;
  if (carrying) n.block = dest;
  return accept(n, g);
}

}  // namespace detail

/// Applies one primitive. Infeasible primitives return the input state with infeasible=true.
inline StepOutcome step(const EnvState& s, Primitive action, const Goal& g) {
  using detail::accept;
  using detail::reach;
  using detail::reject;
  switch (action) {
    case Primitive::GoDoorHandle:
      return reach(s, g, kDoorHandle, true);
    case Primitive::GoDrawer1Handle:
      return reach(s, g, drawer_handle(0), true);
    case Primitive::GoDrawer2Handle:
      if (s.drawers[0] >= 0.5) return reject(s, g);  // blocked by the drawer above
      return reach(s, g, drawer_handle(1), true);
    case Primitive::GoDrawer3Handle:
      if (s.drawers[1] >= 0.5) return reject(s, g);
      return reach(s, g, drawer_handle(2), true);
    case Primitive::GoCenter: {
      // Executable from anywhere else, even while holding a fixture handle (the gripper stays closed).
      if (linf(s.ee, kCenter) < 1e-9) return reject(s, g);
      EnvState n = s;
      if (attached(s)) n.block = kCenter;
      n.ee = kCenter;
      return accept(n, g);
    }
    case Primitive::GoBlock:
      if (!exposed(s, s.block)) return reject(s, g);
      return reach(s, g, s.block, true);
    case Primitive::GoGoal:
      if (!exposed(s, g.target)) return reject(s, g);
      return reach(s, g, hover_over(g.target), false);
    case Primitive::GraspRelease: {
      EnvState n = s;
      if (s.gripper >= 0.5) {
        if (attached(s)) n.block = drop_site(s.ee);
        n.gripper = 0.0;
        return accept(n, g);
      }
      bool graspable = near(s.ee, s.block) || near(s.ee, kDoorHandle);
      for (int i = 0; i < 3; ++i) graspable = graspable || near(s.ee, drawer_handle(i));
      if (!graspable) return reject(s, g);
      n.gripper = 1.0;
      return accept(n, g);
    }
    case Primitive::PullPush: {
      const int i = held_fixture(s);
      if (i < 0) return reject(s, g);
      EnvState n = s;
      n.drawers[i] = s.drawers[i] >= 0.5 ? 0.0 : 1.0;
      return accept(n, g);
    }
    case Primitive::Slide: {
      if (held_fixture(s) != -1) return reject(s, g);
      EnvState n = s;
      n.door = s.door >= 0.5 ? 0.0 : 1.0;
      return accept(n, g);
    }
  }
  throw InvalidInput("unknown primitive");
}

inline StepOutcome step(const EnvState& s, int action, const Goal& g) {
  if (action < 0 || action >= kNumPrimitives) throw InvalidInput("primitive index out of range");
  return step(s, static_cast<Primitive>(action), g);
}

/// Ground-truth feasible set, written directly from the rule table (independently
/// of step()'s control flow so the two can be cross-checked).
inline ActionSet feasible_oracle(const EnvState& s, const Goal& g) {
  ActionSet out;
  const bool open = s.gripper < 0.5;
  const bool free_to_move = !holding_fixture(s);
  auto reachable = [&](const Vec3& dest) {
    return free_to_move && path_clear(s.ee, dest) && linf(s.ee, dest) >= 1e-9;
  };

  if (open && reachable(kDoorHandle)) out.insert(index_of(Primitive::GoDoorHandle));
  if (open && reachable(drawer_handle(0))) out.insert(index_of(Primitive::GoDrawer1Handle));
  if (open && s.drawers[0] < 0.5 && reachable(drawer_handle(1))) out.insert(index_of(Primitive::GoDrawer2Handle));
  if (open && s.drawers[1] < 0.5 && reachable(drawer_handle(2))) out.insert(index_of(Primitive::GoDrawer3Handle));
  if (linf(s.ee, kCenter) >= 1e-9) out.insert(index_of(Primitive::GoCenter));
  if (open && exposed(s, s.block) && reachable(s.block)) out.insert(index_of(Primitive::GoBlock));
  if (exposed(s, g.target) && reachable(hover_over(g.target))) out.insert(index_of(Primitive::GoGoal));

  const bool near_handle = near(s.ee, kDoorHandle) || near(s.ee, drawer_handle(0)) ||
                           near(s.ee, drawer_handle(1)) || near(s.ee, drawer_handle(2));
  if (!open || near(s.ee, s.block) || near_handle) out.insert(index_of(Primitive::GraspRelease));
  if (held_fixture(s) >= 0) out.insert(index_of(Primitive::PullPush));
  if (held_fixture(s) == -1) out.insert(index_of(Primitive::Slide));
  return out;
}

// ---------------------------------------------------------------------------
// Encoding

inline std::array<double, kStateDim> encode(const EnvState& s) {
  return {s.ee[0],        s.ee[1],        s.ee[2],        s.gripper, s.block[0], s.block[1],
          s.block[2],     s.drawers[0],   s.drawers[1],   s.drawers[2], s.door};
}

inline EnvState decode(std::span<const double> v) {
  if (v.size() != kStateDim)
    throw InvalidInput("state vector must have 11 components, got " + std::to_string(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!(v[i] >= 0.0 && v[i] <= 1.0))
      throw InvalidInput("state component " + std::to_string(i) + " out of range [0,1]");
  if (v[3] != 0.0 && v[3] != 1.0) throw InvalidInput("gripper must be 0 or 1");
  EnvState s;
  s.ee = {v[0], v[1], v[2]};
  s.gripper = v[3];
  s.block = {v[4], v[5], v[6]};
  s.drawers = {v[7], v[8], v[9]};
  s.door = v[10];
  return s;
}

inline Goal decode_goal(std::span<const double> v) {
  if (v.size() != kGoalDim) throw InvalidInput("goal vector must have 3 components");
  for (double x : v)
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput("goal component out of range [0,1]");
  return Goal{{v[0], v[1], v[2]}};
}

// ---------------------------------------------------------------------------
// Expert planner: breadth-first search over the (finite) reachable state graph.

namespace detail {

struct StateKey {
  std::array<std::uint64_t, kStateDim> bits;
  bool operator==(const StateKey&) const = default;
};

inline StateKey key_of(const EnvState& s) {
  StateKey k;
  const auto v = encode(s);
  for (int i = 0; i < kStateDim; ++i) std::memcpy(&k.bits[i], &v[i], sizeof(double));
  return k;
}

struct StateKeyHash {
  std::size_t operator()(const StateKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (auto b : k.bits) h = (h ^ b) * 1099511628211ull;
    return static_cast<std::size_t>(h);
  }
};

}  // namespace detail

/// Minimal number of primitives until reward 1, or nullopt if the goal is unreachable.
inline std::optional<int> plan_length(const EnvState& start, const Goal& g) {
  if (reward(start, g) == 1) return 0;
  std::unordered_map<detail::StateKey, int, detail::StateKeyHash> dist;
  std::queue<EnvState> frontier;
  dist.emplace(detail::key_of(start), 0);
  frontier.push(start);
  while (!frontier.empty()) {
    const EnvState s = frontier.front();
    frontier.pop();
    const int d = dist.at(detail::key_of(s));
    for (int a = 0; a < kNumPrimitives; ++a) {
      const StepOutcome o = step(s, a, g);
      if (o.infeasible) continue;
      if (o.reward == 1) return d + 1;
      if (dist.emplace(detail::key_of(o.next), d + 1).second) frontier.push(o.next);
    }
  }
  return std::nullopt;
}

/// Canonical initial configuration: EE at center, gripper open, joints from `joint_bits`
/// (bit i = drawer i open, bit 3 = door open), block at `block_site`.
inline EnvState initial_state(int joint_bits, int block_site) {
  EnvState s;
  s.ee = kCenter;
  s.gripper = 0.0;
  s.block = site_position(block_site);
  for (int i = 0; i < 3; ++i) s.drawers[i] = (joint_bits >> i) & 1 ? 1.0 : 0.0;
  s.door = (joint_bits >> 3) & 1 ? 1.0 : 0.0;
  return s;
}

/// Memoized plan lengths for canonical initial configurations (-1 = unreachable).
inline int initial_plan_length(int joint_bits, int block_site, int goal_site) {
  static std::mutex mu;
  static std::unordered_map<int, int> cache;
  const int key = (joint_bits * kNumSites + block_site) * kNumSites + goal_site;
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const auto len = plan_length(initial_state(joint_bits, block_site), Goal{site_position(goal_site)});
  std::lock_guard lock(mu);
  cache[key] = len ? *len : -1;
  return cache[key];
}

struct Task {
  EnvState state;
  Goal goal;
};

inline constexpr int kMaxResetRejections = 10000;

/// Rejection-samples a start configuration and goal site whose expert plan length lies in `band`.
inline Task reset(Rng& rng, Band band) {
  const auto [lo, hi] = band_range(band);
  for (int attempt = 0; attempt < kMaxResetRejections; ++attempt) {
    const int joints = uniform_index(rng, 16);
    const int block = uniform_index(rng, kNumSites);
    int goal = uniform_index(rng, kNumSites - 1);
    if (goal >= block) ++goal;
    const int len = initial_plan_length(joints, block, goal);
    if (len >= lo && len <= hi) return {initial_state(joints, block), Goal{site_position(goal)}};
  }
  throw ConfigError("reset: no task in band after 10000 rejections (rule table bug?)");
}

inline Task reset(std::uint64_t seed, Band band) {
  Rng rng(seed);
  return reset(rng, band);
}

/// A state visited by uniform-feasible play: a random task of a random band followed by
/// 0-99 random feasible primitives. Used to probe feasibility models away from resets.
inline Task sample_visited(Rng& rng) {
  Task t = reset(rng, uniform_index(rng, 2) == 0 ? Band::Medium : Band::Hard);
  const int k = uniform_index(rng, kHorizon);
  for (int i = 0; i < k; ++i) {
    const ActionSet f = feasible_oracle(t.state, t.goal);
    t.state = step(t.state, f.nth(uniform_index(rng, f.size())), t.goal).next;
  }
  return t;
}

}  // namespace playprior::env
