#include "ooc/metrics.hpp"

#include <algorithm>
#include <sstream>

#include "ooc/errors.hpp"

namespace ooc {

index_t loop_metric_bytes(const Mesh& mesh, const ParLoop& loop) {
  return loop.range.size() * loop_bytes_per_point(mesh, loop);
}

std::map<int, double> attribute_loop_times(const Timeline& tl, double* prev_end_io) {
  std::vector<const TimelineEntry*> kernels;
  for (const auto& e : tl.entries)
    if (e.kind == CmdKind::kernel) kernels.push_back(&e);
  std::sort(kernels.begin(), kernels.end(),
            [](const TimelineEntry* a, const TimelineEntry* b) {
              if (a->start != b->start) return a->start < b->start;
              return a->command_id < b->command_id;
            });
  std::map<int, double> times;
  double prev_end = prev_end_io ? *prev_end_io : 0.0;
  for (const TimelineEntry* e : kernels) {
    double span = std::max(0.0, e->end - prev_end);
    if (e->end > prev_end) prev_end = e->end;
    times[e->loop] += span;
  }
  if (prev_end_io) *prev_end_io = prev_end;
  return times;
}

RunReport aggregate(const std::vector<LoopMetric>& loops) {
  if (loops.empty()) throw ValidationError("no executed loops to aggregate");
  RunReport r;
  for (const auto& l : loops) {
    r.total_bytes += l.bytes;
    r.total_time += l.time_s;
  }
  if (r.total_time <= 0.0) throw ValidationError("aggregate over zero total loop time");
  r.average_bandwidth = static_cast<double>(r.total_bytes) / r.total_time;
  return r;
}

std::string report_csv_header() {
  return "#oocstencil-report-v1\n"
         "app,size,iters,mode,tiles,capacity,average_bandwidth,total_bytes,total_time,"
         "makespan,uploaded,downloaded,d2d,efficiency,hit_rate,faults,error\n";
}

std::string report_csv_row(const RunReport& r) {
  std::ostringstream os;
  os.precision(12);
  os << r.app << "," << r.size << "," << r.iters << "," << r.mode << "," << r.tiles << ","
     << r.capacity << "," << r.average_bandwidth << "," << r.total_bytes << "," << r.total_time
     << "," << r.makespan << "," << r.uploaded << "," << r.downloaded << "," << r.d2d << ","
     << r.efficiency << "," << r.hit_rate << "," << r.faults << "," << r.error << "\n";
  return os.str();
}

std::string loops_csv(const std::vector<LoopMetric>& loops) {
  std::ostringstream os;
  os << "#oocstencil-report-v1\nloop,points,bytes,time,bandwidth\n";
  os.precision(12);
  for (const auto& l : loops)
    os << l.loop_id << "," << l.points << "," << l.bytes << "," << l.time_s << "," << l.bandwidth
       << "\n";
  return os.str();
}

std::string audit_csv(const Mesh& mesh, const std::vector<AuditRow>& rows) {
  std::ostringstream os;
  os << "dataset,tile,uploaded,downloaded,d2d\n";
  for (const auto& r : rows)
    os << mesh[r.dataset].name << "," << r.tile << "," << r.uploaded << "," << r.downloaded << ","
       << r.d2d << "\n";
  return os.str();
}

}  // namespace ooc
