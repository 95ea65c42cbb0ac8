// Three-stage access reservation: random access in a slotted contention
// channel, a rate-limited grant stage, then the data phase. The primitives
// here are technology agnostic; gprs.hpp and lte.hpp parameterize them.
#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cellm2m/sim_core.hpp"
#include "cellm2m/traffic.hpp"

namespace cellm2m::access {

using sim::Seconds;

struct CellModel {
  Seconds rao_slot_spacing = 0.0;
  std::uint32_t opportunities_per_slot = 1;
  double grant_budget = 0.0;          // grants per second
  Seconds grant_slot = 0.0;           // spacing of grant-issuing instants
  std::uint32_t grant_queue_capacity = 0;
  std::uint32_t identifier_limit = 0; // simultaneously active uplink transfers
  double p_control_error = 0.0;
  double p_data_error = 0.0;
  double data_capacity = 0.0;         // bytes per second, error free
  std::uint32_t max_retransmissions = 0;
  Seconds backoff_window = 0.0;
  Seconds grant_timeout = 0.0;

  double rao_rate() const { return opportunities_per_slot / rao_slot_spacing; }
  std::uint32_t grants_per_slot() const;
  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

enum class Outcome : std::uint8_t { pending, delivered, failed_max_retries, failed_deadline };

std::string_view to_string(Outcome o);

struct Report {
  std::uint32_t owner = 0;
  traffic::UseCase use_case = traffic::UseCase::meter_reading;
  traffic::DeviceClass device_class = traffic::DeviceClass::residential;
  Seconds created_at = 0.0;
  std::uint32_t size = 0;
  Seconds deadline_at = 0.0;
  Outcome outcome = Outcome::pending;
  Seconds delivered_at = sim::kNever;

  bool terminal() const noexcept { return outcome != Outcome::pending; }
  bool failed() const noexcept {
    return outcome == Outcome::failed_deadline || outcome == Outcome::failed_max_retries;
  }
  /// Throws std::logic_error if the report is terminal or `at` is past the deadline.
  void mark_delivered(Seconds at);
  void mark_failed(Outcome why);
};

enum class AttemptState : std::uint8_t {
  backlogged,
  contending,
  awaiting_grant,
  connected,
  transmitting,
  done,
};

struct AccessAttempt {
  Report report;
  AttemptState state = AttemptState::backlogged;
  std::uint32_t retries_used = 0;
};

enum class ContentionResult : std::uint8_t { singleton_success, collision, control_error };

std::uint32_t choose_opportunity(const CellModel& cell, sim::RngStream& rng);

/// Resolves one contention slot. `chosen[i]` is the opportunity picked by
/// attempt i. Singletons survive the control channel with 1 - p_control_error.
std::vector<ContentionResult> contend(const CellModel& cell,
                                      std::span<const std::uint32_t> chosen,
                                      sim::RngStream& rng);

struct GrantRequest {
  std::uint32_t attempt = 0;
  std::uint32_t epoch = 0;
  Seconds enqueued_at = 0.0;
};

/// Pops at most floor(grant_budget * window) live requests in FIFO order while
/// active transfers stay below the identifier limit. Dead requests (rejected
/// by `is_live`) are discarded without using budget.
std::vector<GrantRequest> issue_grants(
    const CellModel& cell, std::deque<GrantRequest>& queue, Seconds window,
    std::size_t active_transfers,
    const std::function<bool(const GrantRequest&)>& is_live = {});

/// Uniform(0, backoff_window) and one more retry used, or nullopt when the
/// retry budget is spent (the report then becomes failed-max-retries).
std::optional<Seconds> backoff_delay(const CellModel& cell, AccessAttempt& attempt,
                                     sim::RngStream& rng);

/// Marks every pending report with deadline_at <= now as failed-deadline and
/// returns their indices.
std::vector<std::size_t> expire_deadlines(std::span<Report> reports, Seconds now);

}  // namespace cellm2m::access
