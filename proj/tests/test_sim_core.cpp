#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cellm2m/sim_core.hpp"

using namespace cellm2m::sim;

TEST_CASE("event at the current time runs before later events") {
  EventCalendar cal;
  std::vector<int> order;
  cal.schedule(1.0, [&] { order.push_back(2); });
  cal.schedule(0.0, [&] { order.push_back(1); });
  cal.run_until(5.0);
  CHECK(order == std::vector<int>{1, 2});
}

TEST_CASE("equal timestamps execute in insertion order") {
  EventCalendar cal;
  std::vector<int> order;
  for (int i = 0; i < 10; ++i) cal.schedule(3.0, [&order, i] { order.push_back(i); });
  cal.run_until(3.0);
  CHECK(order == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}

TEST_CASE("scheduling in the past is rejected") {
  EventCalendar cal;
  cal.run_until(10.0);
  CHECK_THROWS_AS(cal.schedule(9.0, [] {}), std::logic_error);
  CHECK_THROWS_AS(cal.schedule(10.0, {}), std::invalid_argument);
  CHECK_NOTHROW(cal.schedule(10.0, [] {}));
}

TEST_CASE("run_until semantics") {
  SUBCASE("empty calendar") {
    EventCalendar cal;
    CHECK(cal.run_until(100.0) == 0);
    CHECK(cal.now() == 100.0);
  }
  SUBCASE("stops at the horizon, inclusive") {
    EventCalendar cal;
    int n = 0;
    for (double t : {1.0, 2.0, 3.0}) cal.schedule(t, [&] { ++n; });
    CHECK(cal.run_until(2.0) == 2);
    CHECK(n == 2);
    CHECK(cal.now() == 2.0);
    CHECK(cal.pending() == 1);
    CHECK(cal.next_time() == 3.0);
  }
}

TEST_CASE("actions may schedule further events, including at the same instant") {
  EventCalendar cal;
  std::vector<double> seen;
  cal.schedule(1.0, [&] {
    seen.push_back(cal.now());
    cal.schedule(cal.now(), [&] { seen.push_back(cal.now() + 0.5); });
  });
  cal.run_until(2.0);
  CHECK(seen == std::vector<double>{1.0, 1.5});
}

TEST_CASE("cancelled events never run; all others run exactly once") {
  EventCalendar cal;
  RngStream rng(5, 1);
  std::vector<int> runs(2000, 0);
  std::vector<EventCalendar::Handle> handles;
  for (int i = 0; i < 2000; ++i) {
    handles.push_back(cal.schedule(rng.uniform(0.0, 50.0), [&runs, i] { ++runs[i]; }));
  }
  std::vector<bool> cancelled(2000, false);
  for (int i = 0; i < 2000; i += 3) {
    CHECK(cal.cancel(handles[i]));
    cancelled[i] = true;
  }
  CHECK_FALSE(cal.cancel(handles[0]));

  double last = -1.0;
  std::uint64_t executed = 0;
  while (cal.pending() > 0) {
    CHECK(cal.step());
    CHECK(cal.now() >= last);
    last = cal.now();
    ++executed;
  }
  for (int i = 0; i < 2000; ++i) CHECK(runs[i] == (cancelled[i] ? 0 : 1));
  CHECK(executed <= cal.scheduled());
  CHECK_FALSE(cal.step());
}

TEST_CASE("clock refuses to move backwards") {
  SimClock c;
  c.advance_to(2.0);
  CHECK_THROWS_AS(c.advance_to(1.0), std::logic_error);
  CHECK(c.now() == 2.0);
}

TEST_CASE("rng streams are keyed by seed and stream id") {
  auto a = derive_stream(42, 7);
  auto b = derive_stream(42, 7);
  auto c = derive_stream(42, 8);
  auto d = derive_stream(43, 7);
  int same_ab = 0, same_ac = 0, same_ad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64(), y = b.next_u64(), z = c.next_u64(), w = d.next_u64();
    same_ab += x == y;
    same_ac += x == z;
    same_ad += x == w;
  }
  CHECK(same_ab == 1000);
  CHECK(same_ac == 0);
  CHECK(same_ad == 0);
}

TEST_CASE("uniform draws have mean 0.5 and stay in [0, 1)") {
  RngStream r(42, 7);
  double sum = 0.0;
  double lo = 1.0, hi = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    sum += u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.004));
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
}

TEST_CASE("exponential, bernoulli and index draws") {
  RngStream r(9, 3);
  const int n = 200'000;
  double sum = 0.0;
  int hits = 0;
  std::vector<int> bins(7, 0);
  for (int i = 0; i < n; ++i) {
    sum += r.exponential(900.0);
    hits += r.bernoulli(0.1);
    ++bins[r.uniform_index(7)];
  }
  CHECK(sum / n == doctest::Approx(900.0).epsilon(0.01));
  CHECK(static_cast<double>(hits) / n == doctest::Approx(0.1).epsilon(0.03));
  for (int b : bins) CHECK(static_cast<double>(b) / n == doctest::Approx(1.0 / 7).epsilon(0.02));
  CHECK_THROWS(r.uniform_index(0));
}
