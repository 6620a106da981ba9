#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rollsim {

// 1-D periodic stencil grid measured in T_L-level tasks.
struct GridSpec {
  int space = 0;  // tasks per time row (S)
  int time = 0;   // time rows (T)

  [[nodiscard]] std::size_t task_count() const noexcept {
    return static_cast<std::size_t>(space) * static_cast<std::size_t>(time);
  }
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// T(t, n): time row t in [1, T], space index n in [1, S].
struct TaskId {
  int t = 0;
  int n = 0;
  friend auto operator<=>(const TaskId&, const TaskId&) = default;
};

inline std::string to_string(TaskId id) {
  return "T(" + std::to_string(id.t) + "," + std::to_string(id.n) + ")";
}

enum class TaskShape : std::uint8_t { up, down };

inline const char* to_string(TaskShape s) {
  return s == TaskShape::up ? "UP" : "DOWN";
}

// Dense index of a task: (t-1)*S + (n-1).
using TaskIndex = std::uint32_t;

inline bool in_grid(TaskId id, const GridSpec& grid) noexcept {
  return id.t >= 1 && id.t <= grid.time && id.n >= 1 && id.n <= grid.space;
}

inline void require_in_grid(TaskId id, const GridSpec& grid) {
  if (!in_grid(id, grid)) {
    throw std::out_of_range(to_string(id) + " outside " +
                            std::to_string(grid.space) + "x" +
                            std::to_string(grid.time) + " grid");
  }
}

inline TaskIndex index_of(TaskId id, const GridSpec& grid) {
  return static_cast<TaskIndex>((id.t - 1) * grid.space + (id.n - 1));
}

inline TaskId task_at(TaskIndex index, const GridSpec& grid) {
  const int i = static_cast<int>(index);
  return TaskId{i / grid.space + 1, i % grid.space + 1};
}

// UP iff t + n is even; T(1,1) is UP and T(1,2) is DOWN.
inline TaskShape shape_of(TaskId id) noexcept {
  return (id.t + id.n) % 2 == 0 ? TaskShape::up : TaskShape::down;
}

inline TaskShape shape_of(TaskId id, const GridSpec& grid) {
  require_in_grid(id, grid);
  return shape_of(id);
}

/// UP tasks read the task below them (none on the first row); DOWN tasks
/// read both spatial neighbours of the same row, wrapped periodically.
inline std::vector<TaskId> dependencies_of(TaskId id, const GridSpec& grid) {
  require_in_grid(id, grid);
  std::vector<TaskId> deps;
  if (shape_of(id) == TaskShape::up) {
    if (id.t > 1) deps.push_back(TaskId{id.t - 1, id.n});
    return deps;
  }
  const int left = (id.n - 2 + grid.space) % grid.space + 1;
  const int right = id.n % grid.space + 1;
  deps.push_back(TaskId{id.t, left});
  if (right != left) deps.push_back(TaskId{id.t, right});
  return deps;
}

/// Row by row: the UP tasks of a row in ascending n, then its DOWN tasks.
/// Every dependency of a task precedes it in this order.
inline std::vector<TaskId> horizontal_order(const GridSpec& grid) {
  std::vector<TaskId> order;
  if (grid.time <= 0 || grid.space <= 0) return order;
  order.reserve(grid.task_count());
  for (int t = 1; t <= grid.time; ++t) {
    for (int parity : {0, 1}) {
      for (int n = 1; n <= grid.space; ++n) {
        if ((t + n) % 2 == parity) order.push_back(TaskId{t, n});
      }
    }
  }
  return order;
}

// Migratable task descriptor. The stencil data itself is never part of it.
struct TaskClosure {
  TaskId global_id;
  std::vector<TaskId> dependencies;
  std::array<int, 4> input_args{};  // (t_lo, t_hi, n_lo, n_hi)
};

inline TaskClosure make_closure(TaskId id, const GridSpec& grid) {
  return TaskClosure{id, dependencies_of(id, grid), {id.t, id.t, id.n, id.n}};
}

/// Index-based DAG with a fixed scheduling order. Kernels build one of these
/// once; the runtime and recovery code only ever see indices.
class TaskGraph {
 public:
  TaskGraph() = default;

  TaskGraph(std::vector<std::vector<TaskIndex>> deps,
            std::vector<TaskIndex> schedule)
      : schedule_(std::move(schedule)) {
    const std::size_t n = deps.size();
    rank_.assign(n, 0);
    for (std::size_t pos = 0; pos < schedule_.size(); ++pos) {
      rank_.at(schedule_[pos]) = static_cast<std::uint32_t>(pos);
    }
    dep_offsets_.reserve(n + 1);
    dep_offsets_.push_back(0);
    std::vector<std::size_t> succ_count(n, 0);
    for (const auto& d : deps) {
      for (TaskIndex u : d) {
        dep_data_.push_back(u);
        ++succ_count.at(u);
      }
      dep_offsets_.push_back(dep_data_.size());
    }
    succ_offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      succ_offsets_[i + 1] = succ_offsets_[i] + succ_count[i];
    }
    succ_data_.resize(succ_offsets_[n]);
    std::vector<std::size_t> fill(succ_offsets_.begin(), succ_offsets_.end() - 1);
    for (std::size_t v = 0; v < n; ++v) {
      for (TaskIndex u : deps[v]) succ_data_[fill[u]++] = static_cast<TaskIndex>(v);
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return rank_.size(); }

  [[nodiscard]] std::span<const TaskIndex> dependencies(TaskIndex v) const {
    return {dep_data_.data() + dep_offsets_[v],
            dep_offsets_[v + 1] - dep_offsets_[v]};
  }

  [[nodiscard]] std::span<const TaskIndex> successors(TaskIndex v) const {
    return {succ_data_.data() + succ_offsets_[v],
            succ_offsets_[v + 1] - succ_offsets_[v]};
  }

  [[nodiscard]] std::span<const TaskIndex> schedule() const noexcept {
    return schedule_;
  }

  // Position of a task in the scheduling order.
  [[nodiscard]] std::uint32_t rank(TaskIndex v) const { return rank_[v]; }

 private:
  std::vector<std::size_t> dep_offsets_;
  std::vector<TaskIndex> dep_data_;
  std::vector<std::size_t> succ_offsets_;
  std::vector<TaskIndex> succ_data_;
  std::vector<TaskIndex> schedule_;
  std::vector<std::uint32_t> rank_;
};

inline TaskGraph build_stencil_graph(const GridSpec& grid) {
  std::vector<std::vector<TaskIndex>> deps(grid.task_count());
  for (std::size_t i = 0; i < deps.size(); ++i) {
    const TaskId id = task_at(static_cast<TaskIndex>(i), grid);
    for (TaskId d : dependencies_of(id, grid)) deps[i].push_back(index_of(d, grid));
  }
  std::vector<TaskIndex> schedule;
  schedule.reserve(grid.task_count());
  for (TaskId id : horizontal_order(grid)) schedule.push_back(index_of(id, grid));
  return TaskGraph(std::move(deps), std::move(schedule));
}

}  // namespace rollsim
