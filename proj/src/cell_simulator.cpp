#include "cellm2m/cell_simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace cellm2m {

using access::AttemptState;
using access::Outcome;
using sim::Seconds;

std::string_view to_string(Technology t) {
  return t == Technology::gprs ? "GPRS" : "LTE";
}

access::CellModel SimulationSetup::cell() const {
  return technology == Technology::gprs ? gprs::gprs_cell(gprs) : lte::lte_cell(lte);
}

std::size_t max_in_sliding_window(std::span<const Seconds> sorted_times, Seconds window) {
  std::size_t best = 0;
  std::size_t lo = 0;
  for (std::size_t hi = 0; hi < sorted_times.size(); ++hi) {
    while (sorted_times[hi] - sorted_times[lo] >= window - 1e-12) ++lo;
    best = std::max(best, hi - lo + 1);
  }
  return best;
}

namespace {

constexpr std::uint64_t kControlStream = 1;
constexpr std::uint64_t kDataStream = 2;
constexpr std::uint64_t kDeviceStreamBase = 1000;

// Index of the first grid point k * step that is >= t (tolerant to rounding).
std::int64_t grid_at_or_after(Seconds t, Seconds step) {
  return static_cast<std::int64_t>(std::ceil(t / step - 1e-9));
}

class CellSimulator {
 public:
  CellSimulator(const SimulationSetup& setup, const traffic::DevicePopulation& population,
                std::uint64_t seed)
      : setup_(setup),
        population_(population),
        cell_(setup.cell()),
        lte_(setup.lte),
        control_rng_(seed, kControlStream),
        data_rng_(seed, kDataStream),
        pdch_(setup.gprs),
        pusch_(setup.lte),
        tally_(setup.warmup, setup.horizon) {
    if (!(setup.horizon > setup.warmup) || setup.warmup < 0.0) {
      throw std::invalid_argument("need 0 <= warmup < horizon");
    }
    device_rng_.reserve(population.devices.size());
    for (const auto& d : population.devices) device_rng_.emplace_back(seed, kDeviceStreamBase + d.id);
    tti_ = setup.lte.tti;
    block_period_ = setup.gprs.block_period;
  }

  SimulationResult run() {
    for (std::uint32_t d = 0; d < population_.devices.size(); ++d) {
      const auto& dev = population_.devices[d];
      for (std::uint32_t p = 0; p < dev.profiles.size(); ++p) {
        const auto& prof = dev.profiles[p];
        Seconds t = 0.0;
        if (prof.arrival.kind == traffic::ArrivalProcess::Kind::periodic) {
          t = prof.arrival.phase_offset;
        } else {
          t = traffic::next_arrival(prof, device_rng_[d], 0.0);
        }
        if (t < setup_.horizon) schedule_arrival(t, d, p);
      }
    }

    calendar_.run_until(setup_.horizon);
    while (live_reports_ > 0) {
      if (!calendar_.step()) throw std::logic_error("calendar drained with pending reports");
    }

    SimulationResult out;
    out.tally = tally_;
    out.reports = std::move(recorded_);
    out.grant_times = std::move(grant_times_);
    out.trace_digest = digest_;
    stats_.events_executed = calendar_.executed();
    stats_.events_scheduled = calendar_.scheduled();
    stats_.max_tbfs_per_pdch = pdch_.max_tbfs_seen();
    stats_.end_time = calendar_.now();
    out.stats = stats_;
    return out;
  }

 private:
  struct Txn {
    access::AccessAttempt attempt;
    std::uint32_t device = 0;
    std::uint32_t gen = 0;    // lifetime token, bumped when the slot is freed
    std::uint32_t epoch = 0;  // stage token, bumped on every stage change
    bool live = false;
    bool holds_identifier = false;
    bool holds_tbf = false;
    bool in_grant_queue = false;
    std::uint8_t pdch = 0;
    std::uint8_t usf = gprs::kNoUsf;
    lte::RrcProcedure rrc;
    std::int64_t msg3_tti = 0;
  };

  bool gprs() const { return setup_.technology == Technology::gprs; }
  bool live(std::uint32_t i, std::uint32_t epoch) const {
    return txns_[i].live && txns_[i].epoch == epoch;
  }

  // ---- traffic ----

  void schedule_arrival(Seconds t, std::uint32_t device, std::uint32_t profile) {
    calendar_.schedule(t, [this, device, profile] { on_arrival(device, profile); });
  }

  std::uint32_t alloc_txn() {
    if (!free_.empty()) {
      const auto i = free_.back();
      free_.pop_back();
      return i;
    }
    txns_.emplace_back();
    return static_cast<std::uint32_t>(txns_.size() - 1);
  }

  void on_arrival(std::uint32_t device, std::uint32_t profile) {
    const Seconds now = calendar_.now();
    const auto& dev = population_.devices[device];
    const auto& prof = dev.profiles[profile];

    const auto i = alloc_txn();
    auto& t = txns_[i];
    const auto gen = t.gen;
    t.attempt = access::AccessAttempt{};
    t.attempt.report.owner = dev.id;
    t.attempt.report.use_case = prof.use_case;
    t.attempt.report.device_class = dev.device_class;
    t.attempt.report.created_at = now;
    t.attempt.report.size = prof.message_size;
    t.attempt.report.deadline_at = now + prof.deadline;
    t.device = device;
    t.live = true;
    t.holds_identifier = t.holds_tbf = t.in_grant_queue = false;
    t.usf = gprs::kNoUsf;
    t.rrc = lte::RrcProcedure{};
    ++live_reports_;
    ++stats_.reports_created;

    calendar_.schedule(t.attempt.report.deadline_at, [this, i, gen] { on_deadline(i, gen); });
    const Seconds next = traffic::next_arrival(prof, device_rng_[device], now);
    if (next < setup_.horizon) schedule_arrival(next, device, profile);

    if (setup_.mode == SimMode::arp_plus_data) {
      start_contention(i, now);
    } else {
      start_data_only(i);
    }
  }

  void start_data_only(std::uint32_t i) {
    auto& t = txns_[i];
    t.attempt.state = AttemptState::transmitting;
    if (gprs()) {
      // No access protocol, but a transfer still needs a free USF.
      usf_wait_.emplace_back(i, t.epoch);
      admit_waiting();
    } else {
      pusch_.enqueue(i, t.epoch, 8.0 * t.attempt.report.size);
      request_tti(grid_at_or_after(calendar_.now(), tti_));
    }
  }

  void admit_waiting() {
    while (!usf_wait_.empty()) {
      const auto [i, epoch] = usf_wait_.front();
      if (!live(i, epoch)) {
        usf_wait_.pop_front();
        continue;
      }
      auto& t = txns_[i];
      const auto tbf = pdch_.assign(i, epoch, t.attempt.report.size);
      if (!tbf) return;
      usf_wait_.pop_front();
      t.holds_tbf = true;
      t.pdch = tbf->pdch;
      t.usf = tbf->usf;
      request_block(grid_at_or_after(calendar_.now(), block_period_));
    }
  }

  // ---- random access ----

  void start_contention(std::uint32_t i, Seconds at) {
    auto& t = txns_[i];
    t.attempt.state = AttemptState::contending;
    const std::int64_t k = std::max(grid_at_or_after(at, cell_.rao_slot_spacing), last_rao_slot_ + 1);
    auto [it, fresh] = rao_bins_.try_emplace(k);
    it->second.push_back({i, t.epoch});
    if (fresh) {
      const Seconds when = std::max(k * cell_.rao_slot_spacing, calendar_.now());
      calendar_.schedule(when, [this, k] { on_rao_slot(k); });
    }
  }

  void on_rao_slot(std::int64_t k) {
    last_rao_slot_ = k;
    auto node = rao_bins_.extract(k);
    std::vector<std::uint32_t> who;
    std::vector<std::uint32_t> chosen;
    for (const auto& [i, epoch] : node.mapped()) {
      if (!live(i, epoch) || txns_[i].attempt.state != AttemptState::contending) continue;
      who.push_back(i);
      chosen.push_back(access::choose_opportunity(cell_, device_rng_[txns_[i].device]));
    }
    if (who.empty()) return;
    const auto results = access::contend(cell_, chosen, control_rng_);

    std::vector<std::uint32_t> winners;
    for (std::size_t n = 0; n < who.size(); ++n) {
      if (results[n] == access::ContentionResult::singleton_success) {
        winners.push_back(who[n]);
      } else {
        fail_after(who[n], cell_.grant_timeout);
      }
    }
    if (gprs()) {
      for (auto i : winners) enqueue_grant(i);
    } else {
      lte_random_access_response(winners, k);
    }
  }

  void fail_after(std::uint32_t i, Seconds delay) {
    auto& t = txns_[i];
    const auto epoch = ++t.epoch;
    t.attempt.state = AttemptState::backlogged;
    calendar_.schedule(calendar_.now() + delay, [this, i, epoch] {
      if (live(i, epoch)) retry(i);
    });
  }

  void retry(std::uint32_t i) {
    auto& t = txns_[i];
    release_identifier(i);
    const auto delay = access::backoff_delay(cell_, t.attempt, device_rng_[t.device]);
    if (!delay) {
      finalize(i);
      return;
    }
    ++t.epoch;
    start_contention(i, calendar_.now() + *delay);
  }

  void take_identifier(std::uint32_t i) {
    txns_[i].holds_identifier = true;
    ++active_ids_;
    stats_.max_active_identifiers = std::max(stats_.max_active_identifiers, active_ids_);
    ++stats_.grants_issued;
    if (setup_.record_grants) grant_times_.push_back(calendar_.now());
  }

  void release_identifier(std::uint32_t i) {
    auto& t = txns_[i];
    if (t.holds_identifier) {
      t.holds_identifier = false;
      --active_ids_;
    }
  }

  // ---- GPRS ----

  void enqueue_grant(std::uint32_t i) {
    auto& t = txns_[i];
    if (queued_grants_ >= cell_.grant_queue_capacity) {
      fail_after(i, cell_.grant_timeout);
      return;
    }
    const auto epoch = ++t.epoch;
    t.attempt.state = AttemptState::awaiting_grant;
    t.in_grant_queue = true;
    ++queued_grants_;
    grant_queue_.push_back(access::GrantRequest{i, epoch, calendar_.now()});
    calendar_.schedule(calendar_.now() + cell_.grant_timeout, [this, i, epoch] {
      if (!live(i, epoch)) return;
      leave_grant_queue(i);
      ++txns_[i].epoch;
      retry(i);
    });
    request_grant_slot();
  }

  void leave_grant_queue(std::uint32_t i) {
    auto& t = txns_[i];
    if (t.in_grant_queue) {
      t.in_grant_queue = false;
      --queued_grants_;
    }
  }

  void request_grant_slot() {
    if (grant_slot_pending_) return;
    grant_slot_pending_ = true;
    const std::int64_t k =
        std::max(grid_at_or_after(calendar_.now(), cell_.grant_slot), last_grant_slot_ + 1);
    const Seconds when = std::max(k * cell_.grant_slot, calendar_.now());
    calendar_.schedule(when, [this, k] { on_grant_slot(k); });
  }

  void on_grant_slot(std::int64_t k) {
    last_grant_slot_ = k;
    grant_slot_pending_ = false;
    const auto granted = access::issue_grants(
        cell_, grant_queue_, cell_.grant_slot, active_ids_,
        [this](const access::GrantRequest& r) { return live(r.attempt, r.epoch); });
    for (const auto& g : granted) gprs_connect(g.attempt);
    if (queued_grants_ > 0) request_grant_slot();
  }

  void gprs_connect(std::uint32_t i) {
    auto& t = txns_[i];
    leave_grant_queue(i);
    const auto epoch = ++t.epoch;
    take_identifier(i);
    const auto tbf = pdch_.assign(i, epoch, t.attempt.report.size);
    if (!tbf) throw std::logic_error("granted TBF found no free USF");
    t.holds_tbf = true;
    t.pdch = tbf->pdch;
    t.usf = tbf->usf;
    t.attempt.state = AttemptState::transmitting;
    pdch_.add_signaling_block(tbf->pdch);
    request_block(grid_at_or_after(calendar_.now(), block_period_));
  }

  // Block k occupies [k, k+1) block periods and is resolved at its end.
  void request_block(std::int64_t k) {
    k = std::max(k, last_block_ + 1);
    if (!block_ticks_.insert(k).second) return;
    calendar_.schedule((k + 1) * block_period_, [this, k] { on_block(k); });
  }

  void on_block(std::int64_t k) {
    block_ticks_.erase(k);
    last_block_ = k;
    const auto outcomes =
        pdch_.tick(data_rng_, [this](std::uint32_t i, std::uint32_t epoch) { return live(i, epoch); });
    std::uint32_t busy = 0;
    for (const auto& o : outcomes) {
      if (o.kind == gprs::BlockOutcome::Kind::idle) continue;
      ++busy;
      if (o.completed) {
        txns_[o.transfer].holds_tbf = false;
        deliver(o.transfer);
      }
    }
    stats_.max_blocks_per_period = std::max(stats_.max_blocks_per_period, busy);
    admit_waiting();
    if (pdch_.has_work()) request_block(k + 1);
  }

  // ---- LTE ----

  void lte_random_access_response(const std::vector<std::uint32_t>& winners, std::int64_t slot) {
    lte::RarWindow window{cell_.grants_per_slot()};
    std::uint32_t issued = 0;
    const Seconds slot_time = slot * cell_.rao_slot_spacing;
    const std::int64_t msg3_tti =
        grid_at_or_after(slot_time + lte_.rar_window + lte_.msg3_delay, tti_);
    for (auto i : winners) {
      auto& t = txns_[i];
      t.rrc = lte::RrcProcedure{};
      if (active_ids_ >= cell_.identifier_limit || window.remaining == 0) {
        fail_after(i, lte_.rar_window);
        continue;
      }
      ++issued;
      if (!t.rrc.receive_rar(window, lte_.p_control_error, control_rng_)) {
        fail_after(i, lte_.rar_window);
        continue;
      }
      take_identifier(i);
      const auto epoch = ++t.epoch;
      t.attempt.state = AttemptState::awaiting_grant;
      t.msg3_tti = pusch_.reserve_msg3(msg3_tti, i, epoch);
      request_tti(t.msg3_tti);
    }
    stats_.max_rar_per_window = std::max(stats_.max_rar_per_window, issued);
  }

  // TTI k occupies [k, k+1) TTIs and is resolved at its end.
  void request_tti(std::int64_t k) {
    k = std::max(k, last_tti_ + 1);
    if (!tti_ticks_.insert(k).second) return;
    calendar_.schedule((k + 1) * tti_, [this, k] { on_tti(k); });
  }

  void on_tti(std::int64_t k) {
    tti_ticks_.erase(k);
    last_tti_ = k;
    const auto res =
        pusch_.tick(k, data_rng_, [this](std::uint32_t i, std::uint32_t epoch) { return live(i, epoch); });
    stats_.max_bits_per_tti = std::max(stats_.max_bits_per_tti, res.signaling_bits + res.data_bits);

    for (const auto& m : res.msg3) on_msg3(m.transfer, k);
    for (const auto& a : res.data) {
      if (a.completed) deliver(a.transfer);
    }
    if (const auto next = pusch_.next_work_tti(k + 1); next >= 0) request_tti(next);
  }

  void on_msg3(std::uint32_t i, std::int64_t tti) {
    auto& t = txns_[i];
    t.msg3_tti = tti;
    const Seconds sent = tti * tti_;
    if (t.rrc.transmit_msg3(lte_.p_data_error, data_rng_)) {
      const auto epoch = ++t.epoch;
      calendar_.schedule(std::max(sent + lte_.msg4_delay, calendar_.now()),
                         [this, i, epoch] { on_msg4(i, epoch); });
      return;
    }
    if (t.rrc.msg3_exhausted(lte_.msg3_max_transmissions)) {
      release_identifier(i);
      fail_after(i, std::max(0.0, sent + lte_.contention_resolution_timeout - calendar_.now()));
      return;
    }
    const auto retx = tti + static_cast<std::int64_t>(std::llround(lte_.harq_rtt / tti_));
    const auto booked = pusch_.reserve_msg3(retx, i, t.epoch);
    request_tti(booked);
  }

  void on_msg4(std::uint32_t i, std::uint32_t epoch) {
    if (!live(i, epoch)) return;
    auto& t = txns_[i];
    if (!t.rrc.receive_msg4(lte_.p_control_error, control_rng_)) {
      release_identifier(i);
      const Seconds notice = t.msg3_tti * tti_ + lte_.contention_resolution_timeout;
      fail_after(i, std::max(0.0, notice - calendar_.now()));
      return;
    }
    const auto e = ++t.epoch;
    t.attempt.state = AttemptState::transmitting;
    pusch_.enqueue(i, e, 8.0 * t.attempt.report.size);
    request_tti(grid_at_or_after(calendar_.now(), tti_));
  }

  // ---- completion ----

  void on_deadline(std::uint32_t i, std::uint32_t gen) {
    auto& t = txns_[i];
    if (!t.live || t.gen != gen) return;
    t.attempt.report.mark_failed(Outcome::failed_deadline);
    leave_grant_queue(i);
    release_identifier(i);
    if (t.holds_tbf) {
      pdch_.release(t.pdch, t.usf);
      t.holds_tbf = false;
      finalize(i);
      admit_waiting();
      return;
    }
    finalize(i);
  }

  void deliver(std::uint32_t i) {
    auto& t = txns_[i];
    t.attempt.report.mark_delivered(calendar_.now());
    release_identifier(i);
    finalize(i);
  }

  void finalize(std::uint32_t i) {
    auto& t = txns_[i];
    const auto& r = t.attempt.report;
    t.attempt.state = AttemptState::done;
    tally_.add(r);
    mix(r.owner);
    mix(static_cast<std::uint64_t>(r.use_case));
    mix(std::bit_cast<std::uint64_t>(r.created_at));
    mix(static_cast<std::uint64_t>(r.outcome));
    mix(std::bit_cast<std::uint64_t>(r.delivered_at));
    if (setup_.record_reports) recorded_.push_back(r);
    ++stats_.reports_terminal;
    t.live = false;
    ++t.gen;
    ++t.epoch;
    free_.push_back(i);
    --live_reports_;
  }

  void mix(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      digest_ ^= (v >> (8 * b)) & 0xff;
      digest_ *= 0x100000001b3ULL;
    }
  }

  const SimulationSetup& setup_;
  const traffic::DevicePopulation& population_;
  access::CellModel cell_;
  lte::LteConfig lte_;
  sim::EventCalendar calendar_;
  sim::RngStream control_rng_;
  sim::RngStream data_rng_;
  std::vector<sim::RngStream> device_rng_;
  gprs::PdchScheduler pdch_;
  lte::PuschScheduler pusch_;
  metrics::OutcomeTally tally_;

  std::vector<Txn> txns_;
  std::vector<std::uint32_t> free_;
  std::uint64_t live_reports_ = 0;
  std::uint32_t active_ids_ = 0;

  std::map<std::int64_t, std::vector<std::pair<std::uint32_t, std::uint32_t>>> rao_bins_;
  std::int64_t last_rao_slot_ = -1;

  std::deque<access::GrantRequest> grant_queue_;
  std::deque<std::pair<std::uint32_t, std::uint32_t>> usf_wait_;  // D-only GPRS
  std::uint32_t queued_grants_ = 0;
  bool grant_slot_pending_ = false;
  std::int64_t last_grant_slot_ = -1;

  Seconds block_period_ = 0.02;
  std::set<std::int64_t> block_ticks_;
  std::int64_t last_block_ = -1;

  Seconds tti_ = 0.001;
  std::set<std::int64_t> tti_ticks_;
  std::int64_t last_tti_ = -1;

  std::vector<access::Report> recorded_;
  std::vector<Seconds> grant_times_;
  SimStats stats_;
  std::uint64_t digest_ = 0xcbf29ce484222325ULL;
};

}  // namespace

SimulationResult run_simulation(const SimulationSetup& setup,
                                const traffic::DevicePopulation& population, std::uint64_t seed) {
  CellSimulator simulator(setup, population, seed);
  return simulator.run();
}

}  // namespace cellm2m
