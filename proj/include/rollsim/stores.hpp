#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "rollsim/engine.hpp"
#include "rollsim/kernel.hpp"
#include "rollsim/ring.hpp"

namespace rollsim {

using InstanceId = std::uint32_t;

struct LogRecord {
  InstanceId instance = 0;
  TaskIndex task = 0;
  VirtualTime time = 0.0;
};

// Task logs a guard holds for its protectee.
class TaskLogStore {
 public:
  void append(WorkerId guard, WorkerId protectee, LogRecord rec) {
    logs_[{guard, protectee}].push_back(rec);
  }

  [[nodiscard]] const std::vector<LogRecord>& logs(WorkerId guard, WorkerId protectee) const {
    static const std::vector<LogRecord> none;
    const auto it = logs_.find({guard, protectee});
    return it == logs_.end() ? none : it->second;
  }

  // A replacement node inherits everything the failed guard was holding.
  void transfer_guard(WorkerId from, WorkerId to) {
    std::vector<std::pair<WorkerId, std::vector<LogRecord>>> moved;
    for (auto it = logs_.begin(); it != logs_.end();) {
      if (it->first.first == from) {
        moved.emplace_back(it->first.second, std::move(it->second));
        it = logs_.erase(it);
      } else {
        ++it;
      }
    }
    for (auto& [protectee, recs] : moved) {
      auto& dst = logs_[{to, protectee}];
      dst.insert(dst.end(), recs.begin(), recs.end());
    }
  }

  [[nodiscard]] std::size_t total() const {
    std::size_t n = 0;
    for (const auto& [k, v] : logs_) n += v.size();
    return n;
  }

 private:
  std::map<std::pair<WorkerId, WorkerId>, std::vector<LogRecord>> logs_;
};

struct CheckpointRecord {
  RegionIndex region = 0;
  TaskIndex entry = 0;
  VirtualTime time = 0.0;
};

/// Entry-data checkpoints.
///
/// Two views are kept. The securedness ledger counts, per region, which
/// entry tasks have had their input data stored, and from it the deepest
/// prefix of fully secured bands (B*). The buffers hold the records
/// themselves per (guard, protectee, spatial slot), at most two band
/// generations each: a new band evicts the oldest once two are present.
class CheckpointStore {
 public:
  explicit CheckpointStore(const Kernel& kernel)
      : kernel_(&kernel),
        recorded_(kernel.graph().size(), 0),
        region_recorded_(kernel.region_count(), 0),
        band_secured_regions_(static_cast<std::size_t>(kernel.band_count()) + 1, 0) {
    regions_per_band_ = kernel.band_count() > 0
                            ? static_cast<int>(kernel.region_count()) / kernel.band_count()
                            : 0;
  }

  void record(WorkerId guard, WorkerId protectee, TaskIndex entry, VirtualTime time) {
    ++sends_;
    const RegionIndex region = kernel_->region_of(entry);
    const int band = kernel_->band_of_region(region);
    const int slot = kernel_->slot_of_region(region);

    auto& gens = buffers_[{guard, protectee, slot}];
    auto it = std::find_if(gens.begin(), gens.end(),
                           [band](const Generation& g) { return g.band == band; });
    if (it == gens.end()) {
      if (gens.size() == 2) gens.pop_front();
      gens.push_back(Generation{band, {}});
      it = gens.end() - 1;
    }
    it->records.push_back(CheckpointRecord{region, entry, time});
    max_generations_ = std::max(max_generations_, gens.size());

    if (recorded_[entry] != 0) return;
    recorded_[entry] = 1;
    if (++region_recorded_[region] == kernel_->entries(region).size()) {
      ++band_secured_regions_[static_cast<std::size_t>(band)];
      while (secured_band_ < kernel_->band_count() &&
             band_secured_regions_[static_cast<std::size_t>(secured_band_) + 1] ==
                 regions_per_band_) {
        ++secured_band_;
      }
    }
  }

  // B*: every region of every band <= B* has all entry records; 0 if none.
  [[nodiscard]] int secured_band() const noexcept { return secured_band_; }

  [[nodiscard]] bool is_recorded(TaskIndex entry) const { return recorded_[entry] != 0; }

  // Forgets every record beyond band `keep`; used when those bands re-run.
  void rollback_to(int keep) {
    for (TaskIndex v = 0; v < recorded_.size(); ++v) {
      if (recorded_[v] != 0 && kernel_->band_of(v) > keep) recorded_[v] = 0;
    }
    for (RegionIndex r = 0; r < region_recorded_.size(); ++r) {
      if (kernel_->band_of_region(r) > keep) region_recorded_[r] = 0;
    }
    for (std::size_t b = static_cast<std::size_t>(keep) + 1; b < band_secured_regions_.size(); ++b) {
      band_secured_regions_[b] = 0;
    }
    secured_band_ = std::min(secured_band_, keep);
    for (auto& [key, gens] : buffers_) {
      std::erase_if(gens, [keep](const Generation& g) { return g.band > keep; });
    }
  }

  void transfer_guard(WorkerId from, WorkerId to) {
    std::vector<std::pair<std::tuple<WorkerId, WorkerId, int>, std::deque<Generation>>> moved;
    for (auto it = buffers_.begin(); it != buffers_.end();) {
      if (std::get<0>(it->first) == from) {
        moved.emplace_back(std::tuple{to, std::get<1>(it->first), std::get<2>(it->first)},
                           std::move(it->second));
        it = buffers_.erase(it);
      } else {
        ++it;
      }
    }
    for (auto& [key, gens] : moved) buffers_[key] = std::move(gens);
  }

  [[nodiscard]] std::size_t generations(WorkerId guard, WorkerId protectee, int slot) const {
    const auto it = buffers_.find({guard, protectee, slot});
    return it == buffers_.end() ? 0 : it->second.size();
  }

  [[nodiscard]] std::size_t max_generations() const noexcept { return max_generations_; }
  [[nodiscard]] std::uint64_t sends() const noexcept { return sends_; }

 private:
  struct Generation {
    int band = 0;
    std::vector<CheckpointRecord> records;
  };

  const Kernel* kernel_;
  std::vector<std::uint8_t> recorded_;
  std::vector<std::size_t> region_recorded_;
  std::vector<int> band_secured_regions_;
  int regions_per_band_ = 0;
  int secured_band_ = 0;
  std::map<std::tuple<WorkerId, WorkerId, int>, std::deque<Generation>> buffers_;
  std::size_t max_generations_ = 0;
  std::uint64_t sends_ = 0;
};

}  // namespace rollsim
