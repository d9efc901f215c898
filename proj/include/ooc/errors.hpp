#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ooc {

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Fetch of a dataset whose values were discarded by the cyclic optimisation.
struct StaleDataError : std::runtime_error {
  std::string dataset;
  int discarded_by_chain;
  StaleDataError(std::string name, int chain)
      : std::runtime_error("stale data: dataset '" + name + "' was discarded by chain " +
                           std::to_string(chain) + " (cyclic execution); host values are invalid"),
        dataset(std::move(name)),
        discarded_by_chain(chain) {}
};

/// No tile count can satisfy the memory budget.
struct InfeasibleError : std::runtime_error {
  std::int64_t min_achievable_bytes;
  InfeasibleError(std::int64_t min_bytes, std::int64_t budget)
      : std::runtime_error("infeasible tiling: minimum achievable 3-slot size is " +
                           std::to_string(min_bytes) + " bytes, budget is " +
                           std::to_string(budget) + " bytes"),
        min_achievable_bytes(min_bytes) {}
};

/// A fixed tile count whose slots exceed the configured device capacity.
struct CapacityError : std::runtime_error {
  std::int64_t required_bytes;
  CapacityError(std::int64_t required, std::int64_t capacity)
      : std::runtime_error("device capacity exceeded: 3-slot working set needs " +
                           std::to_string(required) + " bytes, capacity is " +
                           std::to_string(capacity) + " bytes"),
        required_bytes(required) {}
};

/// Cyclic WAITs in a command-queue program.
struct DeadlockError : std::runtime_error {
  explicit DeadlockError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ooc
