#pragma once

#include <cstdint>

#include "ooc/extent.hpp"

namespace ooc {

/// Cost model of the simulated two-tier memory system. Bandwidths are
/// bytes/s, latencies seconds. The PCIe profile mirrors a 16 GB/s
/// interconnect, the NVLink profile a 40 GB/s one; kernel and
/// device-internal bandwidth default to the measured 510 GB/s streaming
/// rate of the device class being modelled.
struct DeviceConfig {
  index_t capacity_bytes = 16000000000;
  double h2d_bandwidth = 16e9;
  double d2h_bandwidth = 16e9;
  double d2d_bandwidth = 510e9;
  double device_kernel_bandwidth = 510e9;
  double transfer_latency = 1e-6;

  // cache / unified modes
  index_t cache_page_bytes = 65536;
  double fault_latency = 50e-6;
  double prefetch_bandwidth = 16e9;
  double prefetch_degradation = 1.0;  // multiplier applied when oversubscribed

  static DeviceConfig pcie() { return DeviceConfig{}; }
  static DeviceConfig nvlink() {
    DeviceConfig c;
    c.h2d_bandwidth = 40e9;
    c.d2h_bandwidth = 40e9;
    c.prefetch_bandwidth = 40e9;
    return c;
  }
};

}  // namespace ooc
