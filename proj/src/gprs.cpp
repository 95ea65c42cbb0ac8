#include "cellm2m/gprs.hpp"

#include <algorithm>
#include <stdexcept>

namespace cellm2m::gprs {

void GprsConfig::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("invalid GPRS config: ") + what); };
  if (n_pdch < 1 || n_pdch > 7) fail("n_pdch must lie in [1, 7] on a single carrier");
  if (usf_per_pdch < 1 || usf_per_pdch > 7) fail("usf_per_pdch must lie in [1, 7]");
  if (!(rao_rate > 0.0)) fail("RACH rate must be positive");
  if (!(agch_rate > 0.0)) fail("AGCH rate must be positive");
  if (!(per_pdch_rate > 0.0)) fail("PDCH rate must be positive");
  if (!(block_period > 0.0)) fail("block period must be positive");
  if (!(p_control_error >= 0.0 && p_control_error < 1.0)) fail("p_control_error outside [0, 1)");
  if (!(p_data_error >= 0.0 && p_data_error < 1.0)) fail("p_data_error outside [0, 1)");
  if (grant_queue_capacity == 0) fail("grant queue capacity must be positive");
}

access::CellModel gprs_cell(const GprsConfig& config) {
  config.validate();
  access::CellModel cell;
  cell.rao_slot_spacing = 1.0 / config.rao_rate;
  cell.opportunities_per_slot = 1;
  cell.grant_budget = config.agch_rate;
  cell.grant_slot = 1.0 / config.agch_rate;
  cell.grant_queue_capacity = config.grant_queue_capacity;
  cell.identifier_limit = config.identifier_limit();
  cell.p_control_error = config.p_control_error;
  cell.p_data_error = config.p_data_error;
  cell.data_capacity = config.n_pdch * config.per_pdch_rate / 8.0;
  cell.max_retransmissions = config.max_retransmissions;
  cell.backoff_window = config.backoff_window;
  cell.grant_timeout = config.grant_timeout;
  cell.validate();
  return cell;
}

PdchScheduler::PdchScheduler(const GprsConfig& config, bool enforce_usf)
    : config_(config),
      enforce_usf_(enforce_usf),
      queues_(config.n_pdch),
      active_(config.n_pdch, 0),
      usf_in_use_(config.n_pdch, 0),
      signaling_(config.n_pdch, 0) {}

std::optional<UplinkTbf> PdchScheduler::assign(std::uint32_t transfer, std::uint32_t epoch,
                                               double bytes) {
  std::uint32_t best = config_.n_pdch;
  for (std::uint32_t p = 0; p < config_.n_pdch; ++p) {
    if (enforce_usf_ && active_[p] >= config_.usf_per_pdch) continue;
    if (best == config_.n_pdch || active_[p] < active_[best]) best = p;
  }
  if (best == config_.n_pdch) return std::nullopt;

  UplinkTbf tbf;
  tbf.transfer = transfer;
  tbf.epoch = epoch;
  tbf.remaining = bytes;
  tbf.pdch = static_cast<std::uint8_t>(best);
  if (enforce_usf_) {
    std::uint8_t usf = 0;
    while (usf_in_use_[best] & (1U << usf)) ++usf;
    usf_in_use_[best] |= 1U << usf;
    tbf.usf = usf;
  }
  ++active_[best];
  max_tbfs_seen_ = std::max(max_tbfs_seen_, active_[best]);
  queues_[best].push_back(tbf);
  return tbf;
}

void PdchScheduler::release(std::uint8_t pdch, std::uint8_t usf) {
  if (active_[pdch] == 0) throw std::logic_error("release on an idle PDCH");
  --active_[pdch];
  if (usf != kNoUsf) usf_in_use_[pdch] &= ~(1U << usf);
}

std::vector<BlockOutcome> PdchScheduler::tick(sim::RngStream& rng, const LivePredicate& is_live) {
  std::vector<BlockOutcome> out(config_.n_pdch);
  const double block = config_.block_bytes();
  for (std::uint32_t p = 0; p < config_.n_pdch; ++p) {
    auto& o = out[p];
    o.pdch = p;
    if (signaling_[p] > 0) {
      --signaling_[p];
      o.kind = BlockOutcome::Kind::signaling;
      continue;
    }
    auto& q = queues_[p];
    while (!q.empty() && is_live && !is_live(q.front().transfer, q.front().epoch)) q.pop_front();
    if (q.empty()) continue;

    UplinkTbf tbf = q.front();
    q.pop_front();
    o.transfer = tbf.transfer;
    o.epoch = tbf.epoch;
    if (rng.bernoulli(config_.p_data_error)) {
      o.kind = BlockOutcome::Kind::data_error;
    } else {
      o.kind = BlockOutcome::Kind::data_ok;
      tbf.remaining -= block;
    }
    if (tbf.remaining <= 1e-9) {
      o.completed = true;
      release(tbf.pdch, tbf.usf);
    } else {
      q.push_back(tbf);
    }
  }
  return out;
}

bool PdchScheduler::has_work() const {
  for (std::uint32_t p = 0; p < config_.n_pdch; ++p) {
    if (signaling_[p] > 0 || !queues_[p].empty()) return true;
  }
  return false;
}

std::uint32_t PdchScheduler::total_active() const {
  std::uint32_t n = 0;
  for (auto a : active_) n += a;
  return n;
}

}  // namespace cellm2m::gprs
