#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "rollsim/errors.hpp"
#include "rollsim/stencil.hpp"

namespace rollsim {

// A checkpoint-level (T_C) triangle: 4^(c-1) T_L tasks whose entry tasks'
// input data forms one local checkpoint.
struct TcTriangle {
  int level = 1;
  int band = 1;  // rows (band-1)*h+1 .. band*h, h = 2^(level-1)
  int slot = 0;  // spatial position within the band, left to right
  TaskShape orientation = TaskShape::up;
  std::vector<TaskId> members;
  std::vector<TaskId> entry_tasks;
};

inline int band_height(int level) { return 1 << (level - 1); }

/// Throws ConfigError unless `grid` can be tiled exactly at `level`.
inline void check_tiling(const GridSpec& grid, int level) {
  std::vector<std::string> problems;
  if (level < 1 || level > 30) {
    problems.push_back("CheckpointLevel must be >= 1 (got " +
                       std::to_string(level) + ")");
  }
  if (grid.space < 2 || grid.space % 2 != 0) {
    problems.push_back("StencilSize must be even and >= 2 (got " +
                       std::to_string(grid.space) + ")");
  }
  if (grid.time < 1) {
    problems.push_back("Timesteps must be >= 1 (got " +
                       std::to_string(grid.time) + ")");
  }
  if (problems.empty()) {
    const int width = 1 << level;
    const int h = band_height(level);
    if (grid.space % width != 0) {
      problems.push_back("StencilSize mod 2^CheckpointLevel == 0 violated: " +
                         std::to_string(grid.space) + " mod " +
                         std::to_string(width) + " = " +
                         std::to_string(grid.space % width));
    }
    if (grid.time % h != 0) {
      problems.push_back("Timesteps mod 2^(CheckpointLevel-1) == 0 violated: " +
                         std::to_string(grid.time) + " mod " + std::to_string(h) +
                         " = " + std::to_string(grid.time % h));
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid tiling:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
}

// Entry tasks: members with no dependencies or with a dependency outside the
// triangle. Computed from the membership alone.
inline std::vector<TaskId> entry_tasks(const TcTriangle& tri,
                                       const GridSpec& grid) {
  std::vector<TaskId> sorted = tri.members;
  std::sort(sorted.begin(), sorted.end());
  std::vector<TaskId> entries;
  for (TaskId m : tri.members) {
    const auto deps = dependencies_of(m, grid);
    const bool outside = deps.empty() || std::any_of(deps.begin(), deps.end(), [&](TaskId d) {
      return !std::binary_search(sorted.begin(), sorted.end(), d);
    });
    if (outside) entries.push_back(m);
  }
  return entries;
}

/// Builds the triangles of one checkpoint level band by band. Within band B
/// (local row tau in [1, h]) an UP triangle anchored at column a holds
/// columns [a+tau-1, a+2h-1-tau]; a DOWN triangle with bottom vertex b holds
/// [b-tau+1, b+tau-1], wrapped modulo S.
inline std::vector<TcTriangle> tc_tiling(const GridSpec& grid, int level) {
  check_tiling(grid, level);
  const int h = band_height(level);
  const int bands = grid.time / h;
  const int pairs = grid.space / (2 * h);
  std::vector<TcTriangle> tiles;
  tiles.reserve(static_cast<std::size_t>(bands) * pairs * 2);
  auto wrap = [&](int n) { return ((n - 1) % grid.space + grid.space) % grid.space + 1; };
  for (int band = 1; band <= bands; ++band) {
    const int t0 = (band - 1) * h;
    for (int j = 0; j < pairs; ++j) {
      TcTriangle up{level, band, 2 * j, TaskShape::up, {}, {}};
      const int a = 1 + 2 * h * j;
      for (int tau = 1; tau <= h; ++tau) {
        for (int n = a + tau - 1; n <= a + 2 * h - 1 - tau; ++n) {
          up.members.push_back(TaskId{t0 + tau, wrap(n)});
        }
      }
      up.entry_tasks = entry_tasks(up, grid);
      tiles.push_back(std::move(up));

      TcTriangle down{level, band, 2 * j + 1, TaskShape::down, {}, {}};
      const int b = 2 * h * (j + 1);
      for (int tau = 1; tau <= h; ++tau) {
        for (int n = b - tau + 1; n <= b + tau - 1; ++n) {
          down.members.push_back(TaskId{t0 + tau, wrap(n)});
        }
      }
      down.entry_tasks = entry_tasks(down, grid);
      tiles.push_back(std::move(down));
    }
  }
  return tiles;
}

}  // namespace rollsim
