// Outage and reliability estimation.
//
// Outage is the fraction of reports created inside the measurement window
// [warmup, horizon) that were not delivered before their deadline, counting
// both deadline expiry and exhausted access retries as failures.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cellm2m/access.hpp"
#include "cellm2m/traffic.hpp"

namespace cellm2m::metrics {

using sim::Seconds;

struct OutcomeCounts {
  std::uint64_t total = 0;
  std::uint64_t delivered = 0;
  std::uint64_t failed_deadline = 0;
  std::uint64_t failed_retries = 0;

  std::uint64_t failed() const { return failed_deadline + failed_retries; }
  OutcomeCounts& operator+=(const OutcomeCounts& o);
  friend bool operator==(const OutcomeCounts&, const OutcomeCounts&) = default;
};

/// Which reports an outage figure is computed over.
enum class Scope : std::uint8_t { all, sm, esm };

class OutcomeTally {
 public:
  OutcomeTally() = default;
  OutcomeTally(Seconds warmup, Seconds horizon) : warmup_(warmup), horizon_(horizon) {}

  /// Counts a terminal report if it was created inside the window.
  void add(const access::Report& report);
  OutcomeCounts counts(Scope scope) const;
  OutcomeCounts counts(traffic::UseCase use_case) const;
  OutcomeCounts counts(traffic::DeviceClass c, traffic::UseCase use_case) const;
  OutcomeTally& operator+=(const OutcomeTally& other);

 private:
  Seconds warmup_ = 0.0;
  Seconds horizon_ = sim::kNever;
  std::array<std::array<OutcomeCounts, traffic::kUseCaseCount>, traffic::kDeviceClassCount> cells_{};
};

struct OutageEstimate {
  double mean = 0.0;
  std::optional<double> ci95_halfwidth;
  std::uint64_t n_reports = 0;
  std::uint64_t n_replications = 0;
};

/// nullopt when no report fell inside the window.
std::optional<double> outage_fraction(const OutcomeCounts& counts);

/// Single-replication outage over reports created in [warmup, horizon).
/// Throws std::invalid_argument unless horizon > warmup.
std::optional<OutageEstimate> outage(std::span<const access::Report> outcomes, Seconds warmup,
                                     Seconds horizon);

/// Mean over replication outages with a normal-approximation 95% interval.
/// The interval is absent with fewer than two replications.
OutageEstimate aggregate(std::span<const double> replication_outages,
                         std::uint64_t n_reports = 0);

/// Failures over reports across replications (report-weighted).
std::optional<double> pooled_outage(std::span<const OutcomeCounts> replications);

struct UseCaseReliability {
  traffic::UseCase use_case = traffic::UseCase::meter_reading;
  std::uint64_t delivered = 0;
  std::uint64_t total = 0;
  double ratio = 0.0;
  double target = 0.0;
  bool pass = false;
};

/// Per use case delivered/total against its reliability target. Use cases
/// without reports are omitted.
std::vector<UseCaseReliability> reliability_by_usecase(std::span<const access::Report> outcomes);
std::vector<UseCaseReliability> reliability_by_usecase(const OutcomeTally& tally);

}  // namespace cellm2m::metrics
