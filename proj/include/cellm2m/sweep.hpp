// Sweep execution: every (point, mode, replication) of a scenario is an
// independent work item. The serial runner is the reference; the OpenMP
// runner must produce identical rows.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cellm2m/capacity.hpp"
#include "cellm2m/scenario.hpp"

namespace cellm2m {

struct SweepPoint {
  std::size_t index = 0;
  std::int64_t n_sm = 0;
  traffic::ReportingInterval ri = traffic::ReportingInterval::standard();
  double esm_penetration = 0.0;
  std::uint32_t rs = 0;
};

/// Cartesian product n_sm x ri x esm_penetration x rs, in that nesting order.
std::vector<SweepPoint> sweep_points(const Scenario& scenario);

struct ReplicationRow {
  std::size_t point = 0;
  SimMode mode = SimMode::arp_plus_data;
  std::uint32_t replication = 0;
  std::uint64_t seed = 0;
  std::optional<double> outage;
  bool analytic = false;  // analytic D-only row: no report counts
  metrics::OutcomeCounts counts;
  std::uint64_t trace_digest = 0;
};

struct PointSummary {
  std::size_t point = 0;
  SimMode mode = SimMode::arp_plus_data;
  std::optional<metrics::OutageEstimate> estimate;  // absent when no replication had reports
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<ReplicationRow> rows;  // sorted by point, mode, replication
  std::vector<PointSummary> summaries;

  const PointSummary* summary(std::size_t point, SimMode mode) const;
};

/// Worker count after applying the CELLM2M_THREADS cap; requested 0 means
/// all available cores.
int worker_count(int requested = 0);

traffic::DevicePopulation scenario_population(const Scenario& scenario, const SweepPoint& point,
                                              std::uint64_t seed);
ReplicationRow run_replication(const Scenario& scenario, const SweepPoint& point, SimMode mode,
                               std::uint32_t replication);

SweepResult run_sweep_serial(const Scenario& scenario);
SweepResult run_sweep_parallel(const Scenario& scenario, int threads = 0);
/// Serial when the effective worker count is 1.
SweepResult run_sweep(const Scenario& scenario, int threads = 0);

std::string results_csv(const Scenario& scenario, const SweepResult& result);

/// Daily uplink volume per use case, one block of rows per configured RI.
std::string traffic_validation_csv(const Scenario& scenario, int threads = 0);

/// Offered load, raw capacity and analytic D-only outage per sweep point.
std::string capacity_csv(const Scenario& scenario);

double cell_bandwidth_hz(const Scenario& scenario);

}  // namespace cellm2m
