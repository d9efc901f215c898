#pragma once

#include <map>
#include <string>
#include <vector>

#include "ooc/command.hpp"
#include "ooc/explicit_exec.hpp"
#include "ooc/loop.hpp"

namespace ooc {

/// Useful bytes a loop moves: points × elem_bytes, once per argument,
/// twice for read-write arguments. Stencil offsets never multiply the
/// count — a dataset read at five offsets still counts once per point.
index_t loop_metric_bytes(const Mesh& mesh, const ParLoop& loop);

struct LoopMetric {
  int loop_id = -1;
  index_t points = 0;
  index_t bytes = 0;
  double time_s = 0.0;
  double bandwidth = 0.0;
};

/// Attributes device time to loops: each kernel command owns the timeline
/// interval from the previous kernel's end to its own end, so stalls spent
/// waiting on transfers or faults land on the loop that suffered them.
/// `prev_end` carries the last kernel end across chains of one run.
std::map<int, double> attribute_loop_times(const Timeline& tl, double* prev_end = nullptr);

struct RunReport {
  std::string mode;
  int tiles = 1;
  double average_bandwidth = 0.0;  // sum(bytes)/sum(time), time-weighted
  index_t total_bytes = 0;
  double total_time = 0.0;
  double makespan = 0.0;
  index_t uploaded = 0, downloaded = 0, d2d = 0;
  double efficiency = 0.0;  // vs in-memory baseline; 0 when not computed
  double hit_rate = -1.0;   // cache mode
  index_t faults = -1;      // unified mode
  std::string app, size;
  int iters = 0;
  index_t capacity = 0;
  std::string error;  // sweep rows record failures instead of aborting
};

/// Weighted aggregation over per-loop metrics. Throws when no loop ran.
RunReport aggregate(const std::vector<LoopMetric>& loops);

std::string report_csv_header();
std::string report_csv_row(const RunReport& r);
std::string loops_csv(const std::vector<LoopMetric>& loops);
std::string audit_csv(const Mesh& mesh, const std::vector<AuditRow>& rows);

}  // namespace ooc
