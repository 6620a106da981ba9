#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "rollsim/engine.hpp"
#include "rollsim/stencil.hpp"

namespace rollsim {

enum class TraceKind : std::uint8_t {
  join,            // worker enters the run
  enqueue,         // instance added to the global queue
  replay_enqueue,  // replay instance added during recovery
  pop,             // worker takes the queue head
  release,         // held instance handed back to the queue by recovery
  wait_begin,      // dependencies not yet complete
  wait_end,
  fetch,           // value = number of remote inputs
  log,             // task log sent to the guard
  checkpoint,      // entry data sent to the guard
  run_begin,
  run_end,
  abandon,         // running instance dropped (failure or run end)
  cancel,          // started instance superseded by a new attempt
  failure,         // worker = victim, value = replacement id
  recovery_begin,  // value = secured band
  recovery_end,
  leave,
  run_complete,
};

inline const char* to_string(TraceKind k) {
  switch (k) {
    case TraceKind::join: return "join";
    case TraceKind::enqueue: return "enqueue";
    case TraceKind::replay_enqueue: return "replay_enqueue";
    case TraceKind::pop: return "pop";
    case TraceKind::release: return "release";
    case TraceKind::wait_begin: return "wait_begin";
    case TraceKind::wait_end: return "wait_end";
    case TraceKind::fetch: return "fetch";
    case TraceKind::log: return "log";
    case TraceKind::checkpoint: return "checkpoint";
    case TraceKind::run_begin: return "run_begin";
    case TraceKind::run_end: return "run_end";
    case TraceKind::abandon: return "abandon";
    case TraceKind::cancel: return "cancel";
    case TraceKind::failure: return "failure";
    case TraceKind::recovery_begin: return "recovery_begin";
    case TraceKind::recovery_end: return "recovery_end";
    case TraceKind::leave: return "leave";
    case TraceKind::run_complete: return "run_complete";
  }
  return "?";
}

inline constexpr TaskIndex no_task = std::numeric_limits<TaskIndex>::max();

struct TraceEvent {
  VirtualTime time = 0.0;
  std::uint64_t sequence = 0;
  TraceKind kind = TraceKind::join;
  int worker = -1;
  TaskIndex task = no_task;
  int attempt = 0;
  bool replay = false;
  double value = 0.0;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

inline void write_trace_csv(std::ostream& os, const std::vector<TraceEvent>& trace,
                            const std::function<std::string(TaskIndex)>& label) {
  os << "seq,time,kind,worker,task,attempt,replay,value\n";
  const auto prec = os.precision(17);
  for (const auto& e : trace) {
    os << e.sequence << ',' << e.time << ',' << to_string(e.kind) << ',';
    if (e.worker >= 0) os << e.worker;
    os << ',';
    if (e.task != no_task) os << '"' << label(e.task) << '"';
    os << ',' << e.attempt << ',' << (e.replay ? 1 : 0) << ',' << e.value << '\n';
  }
  os.precision(prec);
}

}  // namespace rollsim
