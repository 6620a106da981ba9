#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "rollsim/config.hpp"
#include "rollsim/recovery.hpp"
#include "rollsim/runtime.hpp"
#include "rollsim/stencil.hpp"
#include "rollsim/tiling.hpp"

// Independent reference computations. They work on TaskIds and
// dependencies_of() directly, without the CSR graph or the kernel, so they
// can be used to check those.
namespace rollsim::oracle {

// reach[a][b]: b is reachable from a by following dependency edges forward
// (a is an ancestor of b), reflexive.
inline std::vector<std::vector<bool>> reachability(const GridSpec& grid) {
  const std::size_t n = grid.task_count();
  std::vector<std::vector<std::size_t>> succ(n);
  for (std::size_t i = 0; i < n; ++i) {
    const TaskId id = task_at(static_cast<TaskIndex>(i), grid);
    for (TaskId d : dependencies_of(id, grid)) succ[index_of(d, grid)].push_back(i);
  }
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::size_t> stack{s};
    reach[s][s] = true;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t w : succ[v]) {
        if (!reach[s][w]) {
          reach[s][w] = true;
          stack.push_back(w);
        }
      }
    }
  }
  return reach;
}

inline std::vector<TaskIndex> l3_brute_force(const std::vector<std::vector<bool>>& reach,
                                             const std::vector<TaskIndex>& l1,
                                             const std::vector<TaskIndex>& l2) {
  std::vector<TaskIndex> out;
  for (std::size_t t3 = 0; t3 < reach.size(); ++t3) {
    bool from_l2 = false;
    bool to_l1 = false;
    for (TaskIndex t2 : l2) from_l2 = from_l2 || reach[t2][t3];
    for (TaskIndex t1 : l1) to_l1 = to_l1 || reach[t3][t1];
    if (from_l2 && to_l1) out.push_back(static_cast<TaskIndex>(t3));
  }
  return out;
}

// Greedy list schedule in horizontal order: each task goes to the worker
// that frees up first and starts once it and the task's inputs are ready.
inline double list_schedule_makespan(const GridSpec& grid, int workers, double cost) {
  std::vector<double> free(static_cast<std::size_t>(workers), 0.0);
  std::vector<double> finish(grid.task_count(), 0.0);
  double makespan = 0.0;
  for (TaskId id : horizontal_order(grid)) {
    const auto w = std::min_element(free.begin(), free.end());
    double start = *w;
    for (TaskId d : dependencies_of(id, grid)) start = std::max(start, finish[index_of(d, grid)]);
    const double end = start + cost;
    finish[index_of(id, grid)] = end;
    *w = end;
    makespan = std::max(makespan, end);
  }
  return makespan;
}

}  // namespace rollsim::oracle

namespace rollsim {

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Tiling partition: triangles cover every task once with 4^(c-1) members,
/// the entry predicate matches, and the kernel's closed-form region lookup
/// agrees with the explicit construction.
inline VerifyCheck verify_tiling(const GridSpec& grid, int level) {
  VerifyCheck c{"tiling " + std::to_string(grid.space) + "x" + std::to_string(grid.time) +
                    " level " + std::to_string(level),
                true, ""};
  const auto tiles = tc_tiling(grid, level);
  const StencilKernel kernel(grid, level);
  std::vector<int> owner(grid.task_count(), -1);
  const std::size_t size = static_cast<std::size_t>(1) << (2 * (level - 1));
  std::vector<RegionIndex> kernel_region(tiles.size(), 0);
  for (std::size_t k = 0; k < tiles.size() && c.passed; ++k) {
    const auto& tri = tiles[k];
    if (tri.members.size() != size) {
      c = {c.name, false, "triangle with " + std::to_string(tri.members.size()) + " members"};
      break;
    }
    const RegionIndex region = kernel.region_of(index_of(tri.members.front(), grid));
    for (TaskId m : tri.members) {
      auto& o = owner[index_of(m, grid)];
      if (o != -1) {
        c = {c.name, false, to_string(m) + " in two triangles"};
        break;
      }
      o = static_cast<int>(k);
      if (kernel.region_of(index_of(m, grid)) != region) {
        c = {c.name, false, "kernel splits triangle at " + to_string(m)};
        break;
      }
    }
    if (!c.passed) break;
    std::vector<TaskIndex> expected;
    for (TaskId e : tri.entry_tasks) expected.push_back(index_of(e, grid));
    std::sort(expected.begin(), expected.end());
    std::vector<TaskIndex> got(kernel.entries(region).begin(), kernel.entries(region).end());
    std::sort(got.begin(), got.end());
    if (expected != got) c = {c.name, false, "entry sets differ for a triangle"};
    if (kernel.band_of_region(region) != tri.band) c = {c.name, false, "band mismatch"};
  }
  if (c.passed && std::count(owner.begin(), owner.end(), -1) != 0) {
    c = {c.name, false, "task not covered"};
  }
  if (c.passed && tiles.size() != kernel.region_count()) {
    c = {c.name, false, "region count mismatch"};
  }
  if (c.passed) c.detail = std::to_string(tiles.size()) + " triangles";
  return c;
}

inline VerifyCheck verify_table1() {
  const GridSpec grid{256, 256};
  const std::vector<std::size_t> expected{65536, 16384, 4096, 1024, 256, 64};
  std::string got;
  bool ok = true;
  for (int level = 1; level <= 6; ++level) {
    const auto n = tc_tiling(grid, level).size();
    ok = ok && n == expected[static_cast<std::size_t>(level - 1)];
    got += (level > 1 ? "," : "") + std::to_string(n);
  }
  return {"table-1 triangle counts 256x256", ok, got};
}

// Random-victim failure runs on a small grid; every recovery's L3 is compared
// with the brute-force path set and the run is checked for soundness.
inline VerifyCheck verify_l3_runs(const GridSpec& grid, int level, RecoveryStrategy strategy,
                                  const std::vector<std::vector<bool>>& reach,
                                  const std::vector<std::vector<ScriptedFailure>>& scenarios,
                                  int workers) {
  VerifyCheck c{"L3 oracle " + std::to_string(grid.space) + "x" + std::to_string(grid.time) +
                    " level " + std::to_string(level) + " " + to_string(strategy),
                true, ""};
  SimConfig cfg;
  cfg.worker_count = workers;
  cfg.checkpoint_level = level;
  cfg.checkpoint_enabled = true;
  cfg.recovery = strategy;
  cfg.fail_enabled = true;
  cfg.process_cost = 5.0;
  cfg.backup_cost = 0.1;
  cfg.stencil_size = grid.space;
  cfg.timesteps = grid.time;
  std::size_t recoveries = 0;
  for (const auto& scenario : scenarios) {
    SimOptions opts;
    opts.keep_plans = true;
    opts.scripted_failures = scenario;
    Simulator sim(cfg, opts);
    const SimResult r = sim.run();
    const auto bad = check_run(r, sim.kernel().graph());
    if (!bad.empty()) return {c.name, false, bad.front()};
    for (const auto& plan : r.plans) {
      ++recoveries;
      if (strategy == RecoveryStrategy::dependency_aware &&
          plan.l3 != oracle::l3_brute_force(reach, plan.l1, plan.l2)) {
        return {c.name, false, "L3 differs from brute force"};
      }
    }
  }
  c.detail = std::to_string(scenarios.size()) + " runs, " + std::to_string(recoveries) +
             " recoveries";
  return c;
}

// Failure instants: every distinct event time of the fault-free run, each
// paired with one victim (rotating over the workers).
inline std::vector<std::vector<ScriptedFailure>> boundary_scenarios(const GridSpec& grid, int level,
                                                                    int workers) {
  SimConfig cfg;
  cfg.worker_count = workers;
  cfg.checkpoint_level = level;
  cfg.process_cost = 5.0;
  cfg.backup_cost = 0.1;
  cfg.stencil_size = grid.space;
  cfg.timesteps = grid.time;
  SimOptions opts;
  opts.keep_trace = true;
  const SimResult base = run_simulation(cfg, opts);
  std::set<double> times;
  for (const auto& e : base.trace) {
    if (e.time < base.summary.makespan) times.insert(e.time);
  }
  std::vector<std::vector<ScriptedFailure>> out;
  int k = 0;
  for (double t : times) out.push_back({ScriptedFailure{t, k++ % workers}});
  return out;
}

inline std::vector<VerifyCheck> run_verify(int max_grid) {
  std::vector<VerifyCheck> checks;
  checks.push_back(verify_table1());
  for (int s = 2; s <= max_grid; s += 2) {
    for (int level = 1; level <= 3; ++level) {
      const int width = 1 << level;
      const int h = 1 << (level - 1);
      if (s % width != 0) continue;
      for (int t = h; t <= max_grid; t += h) checks.push_back(verify_tiling({s, t}, level));
    }
  }
  for (int s = 4; s <= max_grid; s *= 2) {
    const GridSpec grid{s, s};
    const auto reach = oracle::reachability(grid);
    for (int level = 1; level <= 3; ++level) {
      if (s % (1 << level) != 0) continue;
      const auto scenarios = boundary_scenarios(grid, level, 3);
      for (auto strategy : {RecoveryStrategy::default_rollback, RecoveryStrategy::dependency_aware}) {
        checks.push_back(verify_l3_runs(grid, level, strategy, reach, scenarios, 3));
      }
    }
  }
  return checks;
}

}  // namespace rollsim
