#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "rollsim/config.hpp"
#include "rollsim/kernel.hpp"
#include "rollsim/stencil.hpp"

namespace rollsim {

// L1/L2/L3 sets of one recovery, sorted by task index.
struct RecoveryPlan {
  RecoveryStrategy strategy = RecoveryStrategy::default_rollback;
  int secured_band = 0;
  std::vector<TaskIndex> l1;
  std::vector<TaskIndex> l2;
  std::vector<TaskIndex> l3;
};

namespace recovery_detail {

inline std::vector<TaskIndex> sorted_unique(std::vector<TaskIndex> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace recovery_detail

/// Checkpoint baseline for each task in `l1`: the entry tasks of its own
/// region from which it is reachable (itself included when it is an entry).
/// Paths that leave a region never come back, so the backward search stays
/// inside it. Without checkpoints the baseline is the initial data: the
/// dependency-free tasks that reach t1.
inline std::vector<TaskIndex> compute_l2(const Kernel& kernel, std::span<const TaskIndex> l1,
                                         bool checkpointing) {
  const TaskGraph& g = kernel.graph();
  std::vector<TaskIndex> out;
  std::vector<std::uint8_t> seen(g.size(), 0);
  std::vector<TaskIndex> stack;
  for (TaskIndex t1 : l1) {
    const RegionIndex region = kernel.region_of(t1);
    std::vector<TaskIndex> touched;
    stack.assign(1, t1);
    seen[t1] = 1;
    touched.push_back(t1);
    while (!stack.empty()) {
      const TaskIndex v = stack.back();
      stack.pop_back();
      const auto deps = g.dependencies(v);
      if (checkpointing ? kernel.is_entry(v) && kernel.region_of(v) == region : deps.empty()) {
        out.push_back(v);
      }
      for (TaskIndex u : deps) {
        if (seen[u] != 0) continue;
        if (checkpointing && kernel.region_of(u) != region) continue;
        seen[u] = 1;
        touched.push_back(u);
        stack.push_back(u);
      }
    }
    for (TaskIndex v : touched) seen[v] = 0;
  }
  return recovery_detail::sorted_unique(std::move(out));
}

/// Tasks on some dependency path from an L2 task to an L1 task, both ends
/// included: { t3 : t1 depends on t3 and t3 depends on t2 }, reflexively
/// and transitively.
inline std::vector<TaskIndex> compute_l3(const TaskGraph& g, std::span<const TaskIndex> l1,
                                         std::span<const TaskIndex> l2) {
  if (l1.empty() || l2.empty()) return {};
  std::vector<std::uint8_t> mark(g.size(), 0);
  constexpr std::uint8_t back = 1;
  constexpr std::uint8_t fwd = 2;
  std::vector<TaskIndex> stack(l1.begin(), l1.end());
  std::uint32_t max_rank = 0;
  for (TaskIndex v : l1) {
    mark[v] |= back;
    max_rank = std::max(max_rank, g.rank(v));
  }
  while (!stack.empty()) {
    const TaskIndex v = stack.back();
    stack.pop_back();
    for (TaskIndex u : g.dependencies(v)) {
      if ((mark[u] & back) == 0) {
        mark[u] |= back;
        stack.push_back(u);
      }
    }
  }
  // Nothing ranked after the last L1 task can be an ancestor of one.
  std::vector<TaskIndex> out;
  for (TaskIndex v : l2) {
    if ((mark[v] & fwd) == 0 && g.rank(v) <= max_rank) {
      mark[v] |= fwd;
      stack.push_back(v);
    }
  }
  while (!stack.empty()) {
    const TaskIndex v = stack.back();
    stack.pop_back();
    if ((mark[v] & back) != 0) out.push_back(v);
    for (TaskIndex w : g.successors(v)) {
      if ((mark[w] & fwd) == 0 && g.rank(w) <= max_rank) {
        mark[w] |= fwd;
        stack.push_back(w);
      }
    }
  }
  return recovery_detail::sorted_unique(std::move(out));
}

}  // namespace rollsim
