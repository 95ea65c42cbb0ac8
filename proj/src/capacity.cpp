#include "cellm2m/capacity.hpp"

#include <stdexcept>

namespace cellm2m::capacity {

double offered_load(const traffic::DevicePopulation& population) {
  double bytes_per_day = 0.0;
  for (const auto& d : population.devices) {
    for (const auto& p : d.profiles) bytes_per_day += p.bytes_per_day();
  }
  return bytes_per_day / traffic::kSecondsPerDay;
}

double d_only_outage(const LoadSummary& load) {
  if (load.offered_load < 0.0 || load.capacity < 0.0) {
    throw std::invalid_argument("load and capacity must be non-negative");
  }
  if (load.offered_load <= load.capacity) return 0.0;
  return 1.0 - load.capacity / load.offered_load;
}

}  // namespace cellm2m::capacity
