// Data-capacity-only view of a cell: compares offered uplink load against
// raw data capacity and ignores the access reservation protocol entirely.
#pragma once

#include "cellm2m/traffic.hpp"

namespace cellm2m::capacity {

struct LoadSummary {
  double offered_load = 0.0;  // bytes per second
  double capacity = 0.0;      // bytes per second
};

/// Long-run mean uplink bytes per second of the whole population.
double offered_load(const traffic::DevicePopulation& population);

/// 0 while the load fits, otherwise 1 - capacity / load.
double d_only_outage(const LoadSummary& load);

}  // namespace cellm2m::capacity
