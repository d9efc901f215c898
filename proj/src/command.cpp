#include "ooc/command.hpp"

#include <algorithm>
#include <sstream>

#include "ooc/errors.hpp"

namespace ooc {

namespace {

double command_duration(const Command& c, const DeviceConfig& cfg) {
  switch (c.kind) {
    case CmdKind::h2d: {
      double bw = c.prefetch_rate ? cfg.prefetch_bandwidth * cfg.prefetch_degradation
                                  : cfg.h2d_bandwidth;
      return cfg.transfer_latency + static_cast<double>(c.bytes) / bw;
    }
    case CmdKind::d2h: {
      double bw = c.prefetch_rate ? cfg.prefetch_bandwidth * cfg.prefetch_degradation
                                  : cfg.d2h_bandwidth;
      return cfg.transfer_latency + static_cast<double>(c.bytes) / bw;
    }
    case CmdKind::d2d:
      return cfg.transfer_latency + static_cast<double>(c.bytes) / cfg.d2d_bandwidth;
    case CmdKind::kernel:
      return static_cast<double>(c.bytes) / cfg.device_kernel_bandwidth + c.extra_seconds;
    default:
      return 0.0;
  }
}

}  // namespace

Timeline simulate_timeline(const CommandQueueProgram& program, const DeviceConfig& cfg,
                           QueueCarry* carry) {
  Timeline tl;
  tl.entries.resize(program.commands.size());

  QueueCarry local;
  QueueCarry& qc = carry ? *carry : local;

  // Per queue: ordered command indices and progress.
  std::array<std::vector<int>, 3> queue_cmds;
  for (size_t i = 0; i < program.commands.size(); ++i) {
    int q = program.commands[i].queue;
    if (q < 0 || q > 2) throw ValidationError("command queue out of range");
    queue_cmds[q].push_back(static_cast<int>(i));
  }
  std::array<size_t, 3> next{0, 0, 0};
  std::array<int, 3> completed{qc.completed(0), qc.completed(1), qc.completed(2)};
  std::array<double, 3>& avail = qc.avail;
  std::array<std::vector<double>, 3>& prefix_end = qc.prefix_end;

  bool progress = true;
  size_t remaining = program.commands.size();
  while (remaining > 0) {
    if (!progress) {
      std::ostringstream os;
      os << "deadlocked waits:";
      for (int q = 0; q < 3; ++q)
        if (next[q] < queue_cmds[q].size()) {
          const Command& c = program.commands[queue_cmds[q][next[q]]];
          os << " queue " << q << " blocked at command " << queue_cmds[q][next[q]];
          if (c.kind == CmdKind::wait)
            os << " (wait for " << c.wait_marks[0] << "," << c.wait_marks[1] << ","
               << c.wait_marks[2] << ")";
        }
      throw DeadlockError(os.str());
    }
    progress = false;
    for (int q = 0; q < 3; ++q) {
      while (next[q] < queue_cmds[q].size()) {
        int idx = queue_cmds[q][next[q]];
        const Command& c = program.commands[idx];
        double start;
        if (c.kind == CmdKind::wait) {
          bool ready = true;
          double barrier = avail[q];
          for (int a = 0; a < 3; ++a) {
            if (c.wait_marks[a] <= 0) continue;
            if (completed[a] < c.wait_marks[a]) {
              ready = false;
              break;
            }
            barrier = std::max(barrier, prefix_end[a][c.wait_marks[a]]);
          }
          if (!ready) break;
          start = barrier;
          tl.entries[idx] = {idx, c.kind, q, 0, 0.0, start, start, -1, c.tile, -1};
          avail[q] = start;
        } else {
          start = avail[q];
          double dur = command_duration(c, cfg);
          double end = start + dur;
          tl.entries[idx] = {idx,   c.kind, q,   c.bytes, 0.0,
                             start, end,    c.dataset, c.tile, c.loop};
          avail[q] = end;
          ++completed[q];
          prefix_end[q].push_back(end);
          tl.makespan = std::max(tl.makespan, end);
          switch (c.kind) {
            case CmdKind::h2d:
              tl.uploaded += c.bytes;
              break;
            case CmdKind::d2h:
              tl.downloaded += c.bytes;
              break;
            case CmdKind::d2d:
              tl.d2d_bytes += c.bytes;
              break;
            case CmdKind::kernel:
              tl.kernel_bytes += c.bytes;
              break;
            default:
              break;
          }
        }
        ++next[q];
        --remaining;
        progress = true;
      }
    }
  }
  return tl;
}

std::vector<std::string> audit_timeline(const CommandQueueProgram& program, const Timeline& tl) {
  std::vector<std::string> violations;
  std::array<double, 3> last_end{0.0, 0.0, 0.0};
  std::array<std::vector<double>, 3> prefix_end;
  for (int q = 0; q < 3; ++q) prefix_end[q].push_back(0.0);

  for (size_t i = 0; i < program.commands.size(); ++i) {
    const Command& c = program.commands[i];
    const TimelineEntry& e = tl.entries[i];
    if (e.start < last_end[c.queue] - 1e-12)
      violations.push_back("command " + std::to_string(i) + " overlaps its queue " +
                           std::to_string(c.queue));
    if (c.kind == CmdKind::wait) {
      for (int a = 0; a < 3; ++a) {
        int mark = c.wait_marks[a] - program.base[a];  // carried work precedes this program
        if (mark <= 0) continue;
        if (mark >= static_cast<int>(prefix_end[a].size())) {
          violations.push_back("command " + std::to_string(i) + " waits on work issued later");
          continue;
        }
        if (e.end < prefix_end[a][mark] - 1e-12)
          violations.push_back("command " + std::to_string(i) + " ends before queue " +
                               std::to_string(a) + " drained");
      }
    } else {
      prefix_end[c.queue].push_back(e.end);
    }
    last_end[c.queue] = e.end;
  }
  return violations;
}

std::string timeline_csv(const Timeline& tl) {
  std::ostringstream os;
  os << "command_id,kind,queue,bytes,issue,start,end\n";
  os.precision(12);
  for (const auto& e : tl.entries)
    os << e.command_id << "," << cmd_kind_name(e.kind) << "," << e.queue << "," << e.bytes << ","
       << e.issue << "," << e.start << "," << e.end << "\n";
  return os.str();
}

}  // namespace ooc
