// Discrete-event engine: event calendar, simulation clock and seeded
// random-number streams. One calendar per simulation run; nothing here is
// shared between runs.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <vector>

namespace cellm2m::sim {

using Seconds = double;

inline constexpr Seconds kNever = std::numeric_limits<Seconds>::infinity();

/// Simulated time. Only ever moves forward.
class SimClock {
 public:
  Seconds now() const noexcept { return now_; }
  /// Throws std::logic_error if `t` lies in the past.
  void advance_to(Seconds t);

 private:
  Seconds now_ = 0.0;
};

class EventCalendar {
 public:
  using Action = std::function<void()>;

  struct Handle {
    std::uint32_t slot = 0;
    std::uint64_t seq = 0;
  };

  /// Schedules `action` at absolute time `t`. Events at equal times run in
  /// insertion order. Throws std::logic_error when t < now().
  Handle schedule(Seconds t, Action action);

  /// Returns false if the event already ran or was cancelled.
  bool cancel(Handle handle);

  /// Executes every event with timestamp <= t_end, then sets now() to t_end.
  std::size_t run_until(Seconds t_end);

  /// Executes the earliest pending event. Returns false on an empty calendar.
  bool step();

  Seconds now() const noexcept { return clock_.now(); }
  Seconds next_time() const;
  std::size_t pending() const noexcept { return live_; }
  std::uint64_t executed() const noexcept { return executed_; }
  std::uint64_t scheduled() const noexcept { return next_seq_; }

 private:
  struct Entry {
    Seconds t;
    std::uint64_t seq;
    std::uint32_t slot;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const noexcept {
      return a.t > b.t || (a.t == b.t && a.seq > b.seq);
    }
  };

  void drop_cancelled_head();

  SimClock clock_;
  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
  std::vector<Action> actions_;
  std::vector<std::uint64_t> slot_seq_;
  std::vector<std::uint32_t> free_slots_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t executed_ = 0;
  std::size_t live_ = 0;
};

/// A reproducible pseudo-random stream keyed by (seed, stream id).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer on [0, n). n must be positive.
  std::uint32_t uniform_index(std::uint32_t n);
  double exponential(double mean);
  bool bernoulli(double p);
  std::uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

RngStream derive_stream(std::uint64_t seed, std::uint64_t stream_id);

}  // namespace cellm2m::sim
