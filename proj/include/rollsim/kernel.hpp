#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rollsim/stencil.hpp"
#include "rollsim/tiling.hpp"

namespace rollsim {

using RegionIndex = std::uint32_t;

/// What the runtime needs from an application kernel: the task DAG with its
/// scheduling order, and the checkpoint geometry. Regions are the kernel's
/// checkpoint units, grouped into bands that complete in order; a region's
/// entry tasks are the ones whose inputs are checkpointed.
class Kernel {
 public:
  virtual ~Kernel() = default;

  [[nodiscard]] virtual const TaskGraph& graph() const = 0;
  [[nodiscard]] virtual std::string label(TaskIndex task) const = 0;

  [[nodiscard]] virtual std::size_t region_count() const = 0;
  [[nodiscard]] virtual RegionIndex region_of(TaskIndex task) const = 0;
  [[nodiscard]] virtual int band_of_region(RegionIndex region) const = 0;  // 1-based
  [[nodiscard]] virtual int slot_of_region(RegionIndex region) const = 0;
  [[nodiscard]] virtual int band_count() const = 0;
  [[nodiscard]] virtual bool is_entry(TaskIndex task) const = 0;
  [[nodiscard]] virtual std::span<const TaskIndex> entries(RegionIndex region) const = 0;

  [[nodiscard]] int band_of(TaskIndex task) const {
    return band_of_region(region_of(task));
  }
};

/// 1-D stencil kernel at one checkpoint level.
///
/// Region lookup is closed-form: with h = 2^(c-1), local row tau and
/// r = (n-1) mod 2h, a task sits in UP triangle j = (n-1) div 2h when
/// tau-1 <= r <= 2h-1-tau, otherwise in the DOWN triangle to its left or
/// right. This is checked against tc_tiling() in the tests.
class StencilKernel final : public Kernel {
 public:
  StencilKernel(GridSpec grid, int level)
      : grid_(grid), level_(level), h_(band_height(level)) {
    check_tiling(grid, level);
    graph_ = build_stencil_graph(grid);
    slots_per_band_ = grid.space / h_;
    bands_ = grid.time / h_;
    const std::size_t n = grid.task_count();
    region_.resize(n);
    entry_.assign(n, 0);
    for (TaskIndex i = 0; i < n; ++i) region_[i] = locate(task_at(i, grid));
    entry_lists_.assign(region_count(), {});
    for (TaskIndex i = 0; i < n; ++i) {
      const auto deps = graph_.dependencies(i);
      bool outside = deps.empty();
      for (TaskIndex d : deps) outside = outside || region_[d] != region_[i];
      if (outside) {
        entry_[i] = 1;
        entry_lists_[region_[i]].push_back(i);
      }
    }
  }

  [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
  [[nodiscard]] int level() const noexcept { return level_; }

  [[nodiscard]] const TaskGraph& graph() const override { return graph_; }
  [[nodiscard]] std::string label(TaskIndex task) const override {
    return to_string(task_at(task, grid_));
  }
  [[nodiscard]] std::size_t region_count() const override {
    return static_cast<std::size_t>(bands_) * slots_per_band_;
  }
  [[nodiscard]] RegionIndex region_of(TaskIndex task) const override {
    return region_[task];
  }
  [[nodiscard]] int band_of_region(RegionIndex region) const override {
    return static_cast<int>(region) / slots_per_band_ + 1;
  }
  [[nodiscard]] int slot_of_region(RegionIndex region) const override {
    return static_cast<int>(region) % slots_per_band_;
  }
  [[nodiscard]] int band_count() const override { return bands_; }
  [[nodiscard]] bool is_entry(TaskIndex task) const override {
    return entry_[task] != 0;
  }
  [[nodiscard]] std::span<const TaskIndex> entries(RegionIndex region) const override {
    return entry_lists_[region];
  }

 private:
  [[nodiscard]] RegionIndex locate(TaskId id) const {
    const int band = (id.t - 1) / h_ + 1;
    const int tau = id.t - (band - 1) * h_;
    const int width = 2 * h_;
    const int pairs = grid_.space / width;
    const int r = (id.n - 1) % width;
    const int j = (id.n - 1) / width;
    int slot = 0;
    if (r >= tau - 1 && r <= width - 1 - tau) {
      slot = 2 * j;
    } else if (r < tau - 1) {
      slot = 2 * ((j - 1 + pairs) % pairs) + 1;
    } else {
      slot = 2 * j + 1;
    }
    return static_cast<RegionIndex>((band - 1) * slots_per_band_ + slot);
  }

  GridSpec grid_;
  int level_;
  int h_;
  int slots_per_band_ = 0;
  int bands_ = 0;
  TaskGraph graph_;
  std::vector<RegionIndex> region_;
  std::vector<std::uint8_t> entry_;
  std::vector<std::vector<TaskIndex>> entry_lists_;
};

}  // namespace rollsim
