// Event-driven simulation of one cell: every device's report goes through
// random access, granting and the data phase of the chosen technology.
#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cellm2m/access.hpp"
#include "cellm2m/gprs.hpp"
#include "cellm2m/lte.hpp"
#include "cellm2m/metrics.hpp"
#include "cellm2m/traffic.hpp"

namespace cellm2m {

enum class Technology : std::uint8_t { gprs, lte };

std::string_view to_string(Technology t);

enum class SimMode : std::uint8_t {
  arp_plus_data,  // full access reservation protocol, then data
  data_only,      // reports go straight to the data scheduler
};

struct SimulationSetup {
  Technology technology = Technology::gprs;
  gprs::GprsConfig gprs;
  lte::LteConfig lte;
  SimMode mode = SimMode::arp_plus_data;
  sim::Seconds horizon = 7200.0;
  sim::Seconds warmup = 720.0;
  bool record_reports = false;
  bool record_grants = false;

  access::CellModel cell() const;
};

struct SimStats {
  std::uint64_t events_executed = 0;
  std::uint64_t events_scheduled = 0;
  std::uint64_t reports_created = 0;
  std::uint64_t reports_terminal = 0;
  std::uint64_t grants_issued = 0;
  std::uint32_t max_active_identifiers = 0;
  std::uint32_t max_tbfs_per_pdch = 0;
  std::uint32_t max_blocks_per_period = 0;
  double max_bits_per_tti = 0.0;
  std::uint32_t max_rar_per_window = 0;
  sim::Seconds end_time = 0.0;
};

struct SimulationResult {
  metrics::OutcomeTally tally;
  SimStats stats;
  std::vector<access::Report> reports;  // terminal reports, when recorded
  std::vector<sim::Seconds> grant_times;
  std::uint64_t trace_digest = 0;       // FNV-1a over terminal report records
};

/// Runs one replication. Arrivals stop at the horizon; the run then drains
/// until every created report is terminal.
SimulationResult run_simulation(const SimulationSetup& setup,
                                const traffic::DevicePopulation& population, std::uint64_t seed);

/// Largest number of grants inside any half-open window of `window` seconds.
std::size_t max_in_sliding_window(std::span<const sim::Seconds> sorted_times, sim::Seconds window);

}  // namespace cellm2m
