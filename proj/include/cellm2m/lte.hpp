// LTE: PRACH contention, RAR granting limited by PDCCH capacity, the
// four-message handshake and a FIFO PUSCH scheduler on a 1 ms TTI grid.
#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <string_view>
#include <vector>

#include "cellm2m/access.hpp"

namespace cellm2m::lte {

using sim::Seconds;

enum class Bandwidth : std::uint8_t { mhz1_4, mhz10 };

Bandwidth parse_bandwidth(std::string_view text);
double bandwidth_hz(Bandwidth b);
std::uint32_t prb_count(Bandwidth b);

/// Highest uplink transport block size for 6 PRBs; other allocations scale
/// linearly per PRB.
inline constexpr std::uint32_t kTbs6Prb = 4392;

struct LteConfig {
  Bandwidth bandwidth = Bandwidth::mhz1_4;
  std::uint32_t n_prb = 6;
  Seconds prach_period = 0.005;
  std::uint32_t n_preambles = 54;
  double rar_grant_budget = 3000.0;  // per second
  std::uint32_t tbs_per_tti = kTbs6Prb;
  double p_control_error = 1e-2;
  double p_data_error = 1e-1;
  std::uint32_t max_retransmissions = 10;
  Seconds backoff_window = 0.020;
  Seconds grant_timeout = 0.040;
  Seconds rar_window = 0.005;
  Seconds msg3_delay = 0.005;
  Seconds msg4_delay = 0.005;
  Seconds contention_resolution_timeout = 0.048;
  std::uint32_t msg3_max_transmissions = 5;
  Seconds harq_rtt = 0.008;
  Seconds tti = 0.001;
  std::uint32_t identifier_limit = 1000;

  double bits_per_prb() const { return static_cast<double>(tbs_per_tti) / n_prb; }
  Seconds handshake_duration() const { return rar_window + msg3_delay + msg4_delay; }
  void validate() const;
};

/// Defaults for the given bandwidth (PRB count and scaled TBS filled in).
LteConfig lte_config(Bandwidth bandwidth);

access::CellModel lte_cell(const LteConfig& config);

enum class HandshakeStep : std::uint8_t { msg1, msg2_rar, msg3, msg4, connected, failed };

/// RAR budget left in the current response window.
struct RarWindow {
  std::uint32_t remaining = 0;
};

struct RrcProcedure {
  std::uint32_t attempt = 0;
  HandshakeStep step = HandshakeStep::msg1;
  std::uint32_t msg3_transmissions = 0;

  /// Issues the RAR (uses one unit of budget) and draws its reception.
  /// Returns false when the window has no budget left or msg2 is lost.
  bool receive_rar(RarWindow& window, double p_control_error, sim::RngStream& rng);
  /// One msg3 transmission. Returns true once msg3 got through.
  bool transmit_msg3(double p_data_error, sim::RngStream& rng);
  bool msg3_exhausted(std::uint32_t max_transmissions) const {
    return msg3_transmissions >= max_transmissions;
  }
  bool receive_msg4(double p_control_error, sim::RngStream& rng);
};

enum class HandshakeResult : std::uint8_t { connected, returned_to_backoff };

struct HandshakeOutcome {
  HandshakeResult result = HandshakeResult::returned_to_backoff;
  Seconds latency = 0.0;  // from the preamble slot to connection or failure notice
};

/// Runs the whole handshake for a singleton preamble winner.
HandshakeOutcome rrc_handshake(RrcProcedure& procedure, RarWindow& window,
                               const LteConfig& config, sim::RngStream& rng);

struct PuschAllocation {
  std::uint32_t transfer = 0;
  std::uint32_t epoch = 0;
  double bits = 0.0;
  bool ok = false;
  bool completed = false;
};

struct Msg3Slot {
  std::uint32_t transfer = 0;
  std::uint32_t epoch = 0;
};

struct TtiResult {
  std::vector<Msg3Slot> msg3;  // msg3 transmitted in this TTI
  std::vector<PuschAllocation> data;
  double signaling_bits = 0.0;
  double data_bits = 0.0;
};

/// Per-TTI uplink shared-channel scheduler. Msg3 transmissions take one PRB
/// each (at most n_prb per TTI); the rest of the TTI goes to connected
/// transfers in FIFO order.
class PuschScheduler {
 public:
  using LivePredicate = std::function<bool(std::uint32_t transfer, std::uint32_t epoch)>;

  explicit PuschScheduler(const LteConfig& config) : config_(config) {}

  /// Books msg3 in the first TTI >= earliest with a free PRB; returns that TTI.
  std::int64_t reserve_msg3(std::int64_t earliest_tti, std::uint32_t transfer, std::uint32_t epoch);
  void enqueue(std::uint32_t transfer, std::uint32_t epoch, double bits);

  TtiResult tick(std::int64_t tti, sim::RngStream& rng, const LivePredicate& is_live = {});

  /// Earliest TTI >= from that has queued data or a booked msg3, or -1.
  std::int64_t next_work_tti(std::int64_t from) const;
  std::size_t queued() const { return fifo_.size(); }

 private:
  struct Pending {
    std::uint32_t transfer;
    std::uint32_t epoch;
    double remaining;
  };
  LteConfig config_;
  std::deque<Pending> fifo_;
  std::map<std::int64_t, std::vector<Msg3Slot>> msg3_;
};

inline TtiResult schedule_pusch(PuschScheduler& scheduler, std::int64_t tti, sim::RngStream& rng,
                                const PuschScheduler::LivePredicate& is_live = {}) {
  return scheduler.tick(tti, rng, is_live);
}

}  // namespace cellm2m::lte
