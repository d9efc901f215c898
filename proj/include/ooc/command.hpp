#pragma once

#include <array>
#include <string>
#include <vector>

#include "ooc/dataset.hpp"
#include "ooc/device_config.hpp"

namespace ooc {

enum class CmdKind { h2d, d2h, d2d, kernel, wait };

inline const char* cmd_kind_name(CmdKind k) {
  switch (k) {
    case CmdKind::h2d:
      return "h2d";
    case CmdKind::d2h:
      return "d2h";
    case CmdKind::d2d:
      return "d2d";
    case CmdKind::kernel:
      return "kernel";
    default:
      return "wait";
  }
}

/// One operation on one of three device queues. Commands in a queue run in
/// issue order; a wait holds its queue until the awaited queues have
/// completed everything issued to them before the wait.
struct Command {
  CmdKind kind = CmdKind::wait;
  int queue = 0;
  index_t bytes = 0;
  DatasetId dataset = -1;
  int tile = -1;
  int loop = -1;                         // kernel: loop id
  double extra_seconds = 0.0;            // kernel: serialized fault stalls
  bool prefetch_rate = false;            // transfer billed at prefetch bandwidth
  std::array<int, 3> wait_marks{0, 0, 0};  // wait: per-queue counts to drain past
};

/// Device queues persist across chains: completion history and busy times
/// carry over so a later program's commands and waits compose with earlier
/// work exactly like events on long-lived streams.
struct QueueCarry {
  std::array<double, 3> avail{0.0, 0.0, 0.0};
  std::array<std::vector<double>, 3> prefix_end;  // end of the first n commands, globally

  QueueCarry() {
    for (auto& v : prefix_end) v.push_back(0.0);
  }
  int completed(int q) const { return static_cast<int>(prefix_end[q].size()) - 1; }
};

struct CommandQueueProgram {
  std::vector<Command> commands;       // program (issue) order
  std::array<int, 3> base{0, 0, 0};    // commands already on each queue before this program

  explicit CommandQueueProgram(const QueueCarry* carry = nullptr) {
    if (carry)
      for (int q = 0; q < 3; ++q) base[q] = carry->completed(q);
  }

  int issued_to(int queue) const {
    int n = 0;
    for (const auto& c : commands)
      if (c.queue == queue && c.kind != CmdKind::wait) ++n;
    return n;
  }

  Command& push(Command c) {
    commands.push_back(c);
    return commands.back();
  }

  /// wait on `queue` until `awaited` queues drain everything issued so far
  /// (including work carried over from earlier programs).
  void push_wait(int queue, std::initializer_list<int> awaited) {
    Command w;
    w.kind = CmdKind::wait;
    w.queue = queue;
    w.wait_marks = {0, 0, 0};
    std::array<int, 3> counts = base;
    for (const auto& c : commands)
      if (c.kind != CmdKind::wait) ++counts[c.queue];
    for (int q : awaited) w.wait_marks[q] = counts[q];
    commands.push_back(w);
  }
};

struct TimelineEntry {
  int command_id;
  CmdKind kind;
  int queue;
  index_t bytes;
  double issue, start, end;
  DatasetId dataset;
  int tile;
  int loop;
};

struct Timeline {
  std::vector<TimelineEntry> entries;  // program order
  double makespan = 0.0;
  index_t uploaded = 0, downloaded = 0, d2d_bytes = 0, kernel_bytes = 0;
};

/// Deterministic evaluation of the queue semantics: per-queue in-order
/// execution, waits as cross-queue barriers, concurrent queues otherwise.
/// With a carry, queues start from (and extend) the carried state, so
/// consecutive programs overlap across their seam. Throws DeadlockError
/// when waits form a cycle.
Timeline simulate_timeline(const CommandQueueProgram& program, const DeviceConfig& cfg,
                           QueueCarry* carry = nullptr);

/// Checks a computed timeline against the queue rules (no overlap within a
/// queue, all waits respected). Returns human-readable violations.
std::vector<std::string> audit_timeline(const CommandQueueProgram& program, const Timeline& tl);

/// CSV with columns command_id,kind,queue,bytes,issue,start,end.
std::string timeline_csv(const Timeline& tl);

}  // namespace ooc
