// GPRS: one 200 kHz carrier, timeslot 0 carrying CCCH (RACH + AGCH) and the
// remaining timeslots configured as PDCHs shared by uplink TBFs via USFs.
#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "cellm2m/access.hpp"

namespace cellm2m::gprs {

using sim::Seconds;

struct GprsConfig {
  double rao_rate = 217.0;          // RACH bursts per second
  double agch_rate = 28.0;          // immediate assignments per second
  std::uint32_t n_pdch = 7;
  std::uint32_t usf_per_pdch = 7;   // 3-bit USF, one value reserved
  double per_pdch_rate = 21400.0;   // bit/s at CS-4
  Seconds block_period = 0.020;
  double p_control_error = 1e-2;
  double p_data_error = 1e-1;
  std::uint32_t max_retransmissions = 7;
  Seconds backoff_window = 1.0;
  Seconds grant_timeout = 1.0;
  std::uint32_t grant_queue_capacity = 28;

  std::uint32_t identifier_limit() const { return n_pdch * usf_per_pdch; }
  double block_bytes() const { return per_pdch_rate * block_period / 8.0; }
  void validate() const;
};

/// Theoretical AGCH ceiling of a single carrier; the simulated default is 28/s.
inline constexpr double kAgchCeiling = 32.0;

access::CellModel gprs_cell(const GprsConfig& config);

inline constexpr std::uint8_t kNoUsf = 0xff;

struct UplinkTbf {
  std::uint32_t transfer = 0;
  std::uint32_t epoch = 0;
  double remaining = 0.0;  // bytes
  std::uint8_t pdch = 0;
  std::uint8_t usf = kNoUsf;
};

struct BlockOutcome {
  enum class Kind : std::uint8_t { idle, signaling, data_ok, data_error };
  Kind kind = Kind::idle;
  std::uint32_t pdch = 0;
  std::uint32_t transfer = 0;
  std::uint32_t epoch = 0;
  bool completed = false;
};

/// Round-robin RLC block scheduler over the PDCHs of one carrier.
class PdchScheduler {
 public:
  using LivePredicate = std::function<bool(std::uint32_t transfer, std::uint32_t epoch)>;

  /// With enforce_usf = false every PDCH accepts any number of TBFs.
  PdchScheduler(const GprsConfig& config, bool enforce_usf = true);

  /// Places a TBF on the least-loaded PDCH holding a free USF.
  std::optional<UplinkTbf> assign(std::uint32_t transfer, std::uint32_t epoch, double bytes);
  /// Frees the USF of a withdrawn TBF; its queue entry is dropped lazily.
  void release(std::uint8_t pdch, std::uint8_t usf);
  /// Reserves the next block on `pdch` for access signaling.
  void add_signaling_block(std::uint8_t pdch) { ++signaling_[pdch]; }

  /// Serves one block period: at most one RLC block per PDCH.
  std::vector<BlockOutcome> tick(sim::RngStream& rng, const LivePredicate& is_live = {});

  bool has_work() const;
  std::uint32_t active_tbfs(std::uint32_t pdch) const { return active_[pdch]; }
  std::uint32_t total_active() const;
  std::uint32_t max_tbfs_seen() const { return max_tbfs_seen_; }

 private:
  GprsConfig config_;
  bool enforce_usf_;
  std::vector<std::deque<UplinkTbf>> queues_;
  std::vector<std::uint32_t> active_;
  std::vector<std::uint32_t> usf_in_use_;  // bit mask per PDCH
  std::vector<std::uint32_t> signaling_;
  std::uint32_t max_tbfs_seen_ = 0;
};

/// One block period of the PDCH scheduler.
inline std::vector<BlockOutcome> schedule_pdch(PdchScheduler& scheduler, sim::RngStream& rng,
                                               const PdchScheduler::LivePredicate& is_live = {}) {
  return scheduler.tick(rng, is_live);
}

}  // namespace cellm2m::gprs
