#pragma once

#include <vector>

#include "ooc/loop.hpp"

namespace ooc {

enum class FlushReason { reduction_fetch, data_fetch, explicit_flush, program_end };

inline const char* flush_reason_name(FlushReason r) {
  switch (r) {
    case FlushReason::reduction_fetch:
      return "REDUCTION_FETCH";
    case FlushReason::data_fetch:
      return "DATA_FETCH";
    case FlushReason::explicit_flush:
      return "EXPLICIT_FLUSH";
    default:
      return "PROGRAM_END";
  }
}

/// A maximal run of queued loops bounded by API calls that return data.
struct LoopChain {
  int chain_id = 0;
  std::vector<ParLoop> loops;
  FlushReason reason = FlushReason::program_end;
};

}  // namespace ooc
