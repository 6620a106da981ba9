#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rollsim/errors.hpp"

namespace rollsim {

// Simulated seconds.
using VirtualTime = double;

enum class EventKind : std::uint8_t { timeout, signal, interrupt };

enum class ProcessState : std::uint8_t { runnable, waiting, terminated };

struct ProcessHandle {
  std::uint32_t id = 0;
  friend bool operator==(ProcessHandle, ProcessHandle) = default;
};

struct Event {
  VirtualTime time = 0.0;
  std::uint64_t sequence = 0;
  ProcessHandle target;
  EventKind kind = EventKind::timeout;
};

// What a process is told when it is resumed.
struct Wakeup {
  EventKind kind = EventKind::timeout;
  std::string reason;  // interrupt reason, empty otherwise
};

class Engine;

// A resumable simulation process. Each resume() must end by scheduling a
// timeout, waiting for a signal, or terminating the process.
class Process {
 public:
  virtual ~Process() = default;
  virtual void resume(Engine& engine, const Wakeup& wake) = 0;
};

/// Single-threaded discrete-event kernel.
///
/// Events dispatch in lexicographic (time, sequence) order, so events at
/// equal times run in the order they were scheduled. A process has at most
/// one live pending wait; re-scheduling or interrupting it invalidates the
/// previous wait, and stale events are dropped without touching the clock.
class Engine {
 public:
  Engine() = default;
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  [[nodiscard]] VirtualTime now() const noexcept { return now_; }

  // Registers a process; it is first resumed (as a signal) at now().
  ProcessHandle spawn(Process& process, std::string name) {
    ProcessHandle h{static_cast<std::uint32_t>(slots_.size())};
    Slot s;
    s.process = &process;
    s.name = std::move(name);
    slots_.push_back(std::move(s));
    push(h, EventKind::signal, now_, {});
    return h;
  }

  Event schedule_timeout(ProcessHandle h, VirtualTime delay) {
    if (!(delay >= 0.0)) {
      throw ConfigError("negative timeout delay " + std::to_string(delay) +
                        " for process '" + slot(h).name + "'");
    }
    Slot& s = slot(h);
    if (s.state == ProcessState::terminated) {
      throw std::logic_error("timeout scheduled for terminated process '" +
                             s.name + "'");
    }
    ++s.token;
    s.state = ProcessState::waiting;
    s.signal_armed = false;
    s.waiting_on = "timeout";
    return push(h, EventKind::timeout, now_ + delay, {});
  }

  // Blocks the process until signal() or interrupt() targets it.
  void wait_signal(ProcessHandle h, std::string waiting_on) {
    Slot& s = slot(h);
    if (s.state == ProcessState::terminated) {
      throw std::logic_error("wait on terminated process '" + s.name + "'");
    }
    ++s.token;
    s.state = ProcessState::waiting;
    s.signal_armed = true;
    s.waiting_on = std::move(waiting_on);
  }

  // Wakes a process blocked in wait_signal(); ignored otherwise. Multiple
  // signals before the wakeup dispatches collapse into one.
  void signal(ProcessHandle h) {
    Slot& s = slot(h);
    if (s.state != ProcessState::waiting || !s.signal_armed) return;
    s.signal_armed = false;
    push(h, EventKind::signal, now_, {});
  }

  // Aborts the pending wait and resumes the process at now() with an
  // interrupt. Returns false (and records a warning) for terminated targets.
  bool interrupt(ProcessHandle h, std::string reason) {
    Slot& s = slot(h);
    if (s.state == ProcessState::terminated) {
      warnings_.push_back("interrupt of terminated process '" + s.name +
                          "' ignored (" + reason + ")");
      return false;
    }
    ++s.token;
    s.state = ProcessState::runnable;
    s.signal_armed = false;
    push(h, EventKind::interrupt, now_, std::move(reason));
    return true;
  }

  void terminate(ProcessHandle h) {
    Slot& s = slot(h);
    ++s.token;
    s.state = ProcessState::terminated;
    s.signal_armed = false;
  }

  [[nodiscard]] ProcessState state(ProcessHandle h) const {
    return slot(h).state;
  }

  /// Dispatches until no live events remain and returns the final clock.
  /// Throws DeadlockError listing every process still blocked.
  VirtualTime run_until_idle() {
    while (!queue_.empty()) {
      Pending p = queue_.top();
      queue_.pop();
      Slot& s = slot(p.event.target);
      if (s.state == ProcessState::terminated || p.token != s.token) continue;
      now_ = p.event.time;
      s.state = ProcessState::runnable;
      s.signal_armed = false;
      ++dispatched_;
      if (observer_) observer_(p.event);
      // resume() may spawn processes, so `s` is not used past this point.
      s.process->resume(*this, Wakeup{p.event.kind, std::move(p.reason)});
      const Slot& after = slot(p.event.target);
      if (after.state == ProcessState::runnable && after.token == p.token) {
        throw std::logic_error("process '" + after.name +
                               "' returned without waiting or terminating");
      }
    }
    std::vector<std::string> blocked;
    for (const auto& s : slots_) {
      if (s.state != ProcessState::terminated) {
        blocked.push_back(s.name + " -> " + s.waiting_on);
      }
    }
    if (!blocked.empty()) throw DeadlockError(std::move(blocked));
    return now_;
  }

  [[nodiscard]] const std::vector<std::string>& warnings() const noexcept {
    return warnings_;
  }

  [[nodiscard]] std::uint64_t dispatched() const noexcept {
    return dispatched_;
  }

  // Called for every dispatched (non-stale) event, before the resume.
  void set_observer(std::function<void(const Event&)> observer) {
    observer_ = std::move(observer);
  }

 private:
  struct Slot {
    Process* process = nullptr;
    std::string name;
    ProcessState state = ProcessState::runnable;
    std::uint64_t token = 0;
    bool signal_armed = false;
    std::string waiting_on;
  };

  struct Pending {
    Event event;
    std::uint64_t token = 0;
    std::string reason;
  };

  struct Later {
    bool operator()(const Pending& a, const Pending& b) const noexcept {
      if (a.event.time != b.event.time) return a.event.time > b.event.time;
      return a.event.sequence > b.event.sequence;
    }
  };

  Slot& slot(ProcessHandle h) { return slots_.at(h.id); }
  const Slot& slot(ProcessHandle h) const { return slots_.at(h.id); }

  Event push(ProcessHandle h, EventKind kind, VirtualTime at,
             std::string reason) {
    Event ev{at, next_sequence_++, h, kind};
    queue_.push(Pending{ev, slot(h).token, std::move(reason)});
    return ev;
  }

  VirtualTime now_ = 0.0;
  std::uint64_t next_sequence_ = 0;
  std::uint64_t dispatched_ = 0;
  std::vector<Slot> slots_;
  std::priority_queue<Pending, std::vector<Pending>, Later> queue_;
  std::vector<std::string> warnings_;
  std::function<void(const Event&)> observer_;
};

}  // namespace rollsim
