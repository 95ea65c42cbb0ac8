#include "cellm2m/lte.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cellm2m::lte {

Bandwidth parse_bandwidth(std::string_view text) {
  if (text == "1.4MHz" || text == "1.4" || text == "1400000" || text == "1.4e6") return Bandwidth::mhz1_4;
  if (text == "10MHz" || text == "10" || text == "10000000" || text == "10e6") return Bandwidth::mhz10;
  throw std::invalid_argument("unsupported LTE bandwidth '" + std::string(text) +
                              "' (expected 1.4MHz or 10MHz)");
}

double bandwidth_hz(Bandwidth b) { return b == Bandwidth::mhz1_4 ? 1.4e6 : 10e6; }

std::uint32_t prb_count(Bandwidth b) { return b == Bandwidth::mhz1_4 ? 6 : 50; }

void LteConfig::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("invalid LTE config: ") + what); };
  if (n_prb == 0) fail("n_prb must be positive");
  if (n_prb != prb_count(bandwidth)) fail("n_prb does not match the bandwidth");
  if (n_preambles == 0) fail("need at least one preamble");
  if (!(prach_period > 0.0)) fail("PRACH period must be positive");
  if (!(rar_grant_budget > 0.0)) fail("RAR budget must be positive");
  if (tbs_per_tti == 0) fail("TBS must be positive");
  if (!(p_control_error >= 0.0 && p_control_error < 1.0)) fail("p_control_error outside [0, 1)");
  if (!(p_data_error >= 0.0 && p_data_error < 1.0)) fail("p_data_error outside [0, 1)");
  if (msg3_max_transmissions == 0) fail("msg3 needs at least one transmission");
  if (!(tti > 0.0)) fail("TTI must be positive");
  if (identifier_limit == 0) fail("identifier limit must be positive");
}

LteConfig lte_config(Bandwidth bandwidth) {
  LteConfig c;
  c.bandwidth = bandwidth;
  c.n_prb = prb_count(bandwidth);
  c.tbs_per_tti = kTbs6Prb / 6 * c.n_prb;
  return c;
}

access::CellModel lte_cell(const LteConfig& config) {
  config.validate();
  access::CellModel cell;
  cell.rao_slot_spacing = config.prach_period;
  cell.opportunities_per_slot = config.n_preambles;
  cell.grant_budget = config.rar_grant_budget;
  cell.grant_slot = config.prach_period;
  cell.grant_queue_capacity = cell.grants_per_slot();
  cell.identifier_limit = config.identifier_limit;
  cell.p_control_error = config.p_control_error;
  cell.p_data_error = config.p_data_error;
  cell.data_capacity = config.tbs_per_tti / config.tti / 8.0;
  cell.max_retransmissions = config.max_retransmissions;
  cell.backoff_window = config.backoff_window;
  cell.grant_timeout = config.grant_timeout;
  cell.validate();
  return cell;
}

bool RrcProcedure::receive_rar(RarWindow& window, double p_control_error, sim::RngStream& rng) {
  if (step != HandshakeStep::msg1) throw std::logic_error("RAR out of order");
  if (window.remaining == 0) {
    step = HandshakeStep::failed;
    return false;
  }
  --window.remaining;
  if (rng.bernoulli(p_control_error)) {
    step = HandshakeStep::failed;
    return false;
  }
  step = HandshakeStep::msg3;
  return true;
}

bool RrcProcedure::transmit_msg3(double p_data_error, sim::RngStream& rng) {
  if (step != HandshakeStep::msg3) throw std::logic_error("msg3 out of order");
  ++msg3_transmissions;
  if (rng.bernoulli(p_data_error)) return false;
  step = HandshakeStep::msg4;
  return true;
}

bool RrcProcedure::receive_msg4(double p_control_error, sim::RngStream& rng) {
  if (step != HandshakeStep::msg4) throw std::logic_error("msg4 out of order");
  if (rng.bernoulli(p_control_error)) {
    step = HandshakeStep::failed;
    return false;
  }
  step = HandshakeStep::connected;
  return true;
}

HandshakeOutcome rrc_handshake(RrcProcedure& procedure, RarWindow& window, const LteConfig& config,
                               sim::RngStream& rng) {
  HandshakeOutcome out;
  if (!procedure.receive_rar(window, config.p_control_error, rng)) {
    out.latency = config.rar_window;
    return out;
  }
  const Seconds msg3_first = config.rar_window + config.msg3_delay;
  Seconds msg3_at = msg3_first;
  while (!procedure.transmit_msg3(config.p_data_error, rng)) {
    if (procedure.msg3_exhausted(config.msg3_max_transmissions)) {
      procedure.step = HandshakeStep::failed;
      out.latency = msg3_at + config.contention_resolution_timeout;
      return out;
    }
    msg3_at += config.harq_rtt;
  }
  if (!procedure.receive_msg4(config.p_control_error, rng)) {
    out.latency = msg3_at + config.contention_resolution_timeout;
    return out;
  }
  out.result = HandshakeResult::connected;
  out.latency = msg3_at + config.msg4_delay;
  return out;
}

std::int64_t PuschScheduler::reserve_msg3(std::int64_t earliest_tti, std::uint32_t transfer,
                                          std::uint32_t epoch) {
  std::int64_t tti = earliest_tti;
  for (;;) {
    auto& slots = msg3_[tti];
    if (slots.size() < config_.n_prb) {
      slots.push_back(Msg3Slot{transfer, epoch});
      return tti;
    }
    ++tti;
  }
}

void PuschScheduler::enqueue(std::uint32_t transfer, std::uint32_t epoch, double bits) {
  fifo_.push_back(Pending{transfer, epoch, bits});
}

TtiResult PuschScheduler::tick(std::int64_t tti, sim::RngStream& rng, const LivePredicate& is_live) {
  TtiResult out;
  double budget = config_.tbs_per_tti;

  if (auto it = msg3_.find(tti); it != msg3_.end()) {
    for (const auto& s : it->second) {
      if (is_live && !is_live(s.transfer, s.epoch)) continue;
      budget -= config_.bits_per_prb();
      out.signaling_bits += config_.bits_per_prb();
      out.msg3.push_back(s);
    }
    msg3_.erase(it);
  }

  auto pos = fifo_.begin();
  while (budget > 1e-9 && pos != fifo_.end()) {
    if (is_live && !is_live(pos->transfer, pos->epoch)) {
      pos = fifo_.erase(pos);
      continue;
    }
    const double bits = std::min(pos->remaining, budget);
    budget -= bits;
    out.data_bits += bits;
    PuschAllocation a{pos->transfer, pos->epoch, bits, !rng.bernoulli(config_.p_data_error), false};
    if (a.ok) pos->remaining -= bits;
    if (pos->remaining <= 1e-9) {
      a.completed = true;
      pos = fifo_.erase(pos);
    } else {
      ++pos;
    }
    out.data.push_back(a);
  }
  return out;
}

std::int64_t PuschScheduler::next_work_tti(std::int64_t from) const {
  if (!fifo_.empty()) return from;
  auto it = msg3_.lower_bound(from);
  return it == msg3_.end() ? -1 : it->first;
}

}  // namespace cellm2m::lte
