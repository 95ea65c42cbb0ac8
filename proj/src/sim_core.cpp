#include "cellm2m/sim_core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace cellm2m::sim {

void SimClock::advance_to(Seconds t) {
  if (t < now_) {
    throw std::logic_error("clock cannot move backwards: " + std::to_string(t) +
                           " < " + std::to_string(now_));
  }
  now_ = t;
}

EventCalendar::Handle EventCalendar::schedule(Seconds t, Action action) {
  if (!(t >= clock_.now())) {
    throw std::logic_error("event scheduled in the past: t=" + std::to_string(t) +
                           " now=" + std::to_string(clock_.now()));
  }
  if (!action) throw std::invalid_argument("cannot schedule an empty action");
  std::uint32_t slot;
  if (!free_slots_.empty()) {
    slot = free_slots_.back();
    free_slots_.pop_back();
    actions_[slot] = std::move(action);
  } else {
    slot = static_cast<std::uint32_t>(actions_.size());
    actions_.push_back(std::move(action));
    slot_seq_.push_back(0);
  }
  const std::uint64_t seq = next_seq_++;
  slot_seq_[slot] = seq;
  heap_.push(Entry{t, seq, slot});
  ++live_;
  return Handle{slot, seq};
}

bool EventCalendar::cancel(Handle handle) {
  if (handle.slot >= actions_.size() || slot_seq_[handle.slot] != handle.seq ||
      !actions_[handle.slot]) {
    return false;
  }
  // The heap entry stays behind and is discarded when it reaches the top.
  actions_[handle.slot] = nullptr;
  --live_;
  return true;
}

void EventCalendar::drop_cancelled_head() {
  while (!heap_.empty()) {
    const Entry& top = heap_.top();
    if (slot_seq_[top.slot] == top.seq && actions_[top.slot]) return;
    if (slot_seq_[top.slot] == top.seq) free_slots_.push_back(top.slot);
    heap_.pop();
  }
}

Seconds EventCalendar::next_time() const {
  auto& self = const_cast<EventCalendar&>(*this);
  self.drop_cancelled_head();
  return heap_.empty() ? kNever : heap_.top().t;
}

bool EventCalendar::step() {
  drop_cancelled_head();
  if (heap_.empty()) return false;
  const Entry top = heap_.top();
  heap_.pop();
  clock_.advance_to(top.t);
  Action action = std::move(actions_[top.slot]);
  actions_[top.slot] = nullptr;
  free_slots_.push_back(top.slot);
  --live_;
  ++executed_;
  action();
  return true;
}

std::size_t EventCalendar::run_until(Seconds t_end) {
  if (t_end < clock_.now()) {
    throw std::logic_error("run_until target lies in the past");
  }
  std::size_t count = 0;
  while (next_time() <= t_end) {
    step();
    ++count;
  }
  clock_.advance_to(t_end);
  return count;
}

namespace {

std::seed_seq make_seed_seq(std::uint64_t seed, std::uint64_t stream_id) {
  return std::seed_seq{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(stream_id),
      static_cast<std::uint32_t>(stream_id >> 32), 0x6d326dU};
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  auto seq = make_seed_seq(seed, stream_id);
  engine_.seed(seq);
}

double RngStream::uniform() {
  // 53 random mantissa bits; never returns 1.0.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint32_t RngStream::uniform_index(std::uint32_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index requires n > 0");
  if (n == 1) return 0;
  std::uniform_int_distribution<std::uint32_t> dist(0, n - 1);
  return dist(engine_);
}

double RngStream::exponential(double mean) {
  // 1 - U lies in (0, 1], so the log is finite.
  return -mean * std::log1p(-uniform());
}

bool RngStream::bernoulli(double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform() < p;
}

RngStream derive_stream(std::uint64_t seed, std::uint64_t stream_id) {
  return RngStream(seed, stream_id);
}

}  // namespace cellm2m::sim
