#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <random>

#include "cellm2m/access.hpp"
#include "cellm2m/gprs.hpp"
#include "cellm2m/lte.hpp"

using namespace cellm2m;
using namespace cellm2m::access;

namespace {

CellModel simple_cell(std::uint32_t opportunities, double p_control = 0.0) {
  CellModel c;
  c.rao_slot_spacing = 0.005;
  c.opportunities_per_slot = opportunities;
  c.grant_budget = 28.0;
  c.grant_slot = 1.0;
  c.grant_queue_capacity = 100;
  c.identifier_limit = 49;
  c.p_control_error = p_control;
  c.max_retransmissions = 3;
  c.backoff_window = 1.0;
  c.grant_timeout = 1.0;
  return c;
}

}  // namespace

TEST_CASE("contention outcomes") {
  sim::RngStream rng(1, 1);
  SUBCASE("lone attempt succeeds without control errors") {
    const std::uint32_t chosen[] = {0};
    CHECK(contend(simple_cell(1), chosen, rng) == std::vector{ContentionResult::singleton_success});
  }
  SUBCASE("two attempts on one opportunity both collide") {
    const std::uint32_t chosen[] = {3, 3, 5};
    const auto r = contend(simple_cell(54), chosen, rng);
    CHECK(r[0] == ContentionResult::collision);
    CHECK(r[1] == ContentionResult::collision);
    CHECK(r[2] == ContentionResult::singleton_success);
  }
  SUBCASE("control errors hit singletons only") {
    const auto cell = simple_cell(54, 0.3);
    int errors = 0, singles = 0;
    for (int t = 0; t < 20000; ++t) {
      const std::uint32_t chosen[] = {1, 2, 2};
      const auto r = contend(cell, chosen, rng);
      CHECK(r[1] == ContentionResult::collision);
      errors += r[0] == ContentionResult::control_error;
      singles += r[0] == ContentionResult::singleton_success;
    }
    CHECK(errors + singles == 20000);
    CHECK(errors / 20000.0 == doctest::Approx(0.3).epsilon(0.05));
  }
  SUBCASE("out-of-range opportunity is rejected") {
    const std::uint32_t chosen[] = {54};
    CHECK_THROWS_AS(contend(simple_cell(54), chosen, rng), std::out_of_range);
  }
}

TEST_CASE("singleton count matches the balls-into-bins oracle") {
  const std::uint32_t k = 54, n = 54;
  const int trials = 10000;
  const double analytic = n * std::pow((k - 1.0) / k, n - 1.0);
  CHECK(analytic == doctest::Approx(20.2).epsilon(0.01));

  // Brute force with an unrelated generator.
  std::mt19937 ref(12345);
  std::uniform_int_distribution<std::uint32_t> pick(0, k - 1);
  double brute = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<int> load(k, 0);
    std::vector<std::uint32_t> c(n);
    for (auto& x : c) ++load[x = pick(ref)];
    for (auto x : c) brute += load[x] == 1;
  }
  brute /= trials;

  const auto cell = simple_cell(k);
  sim::RngStream rng(2024, 9);
  double simulated = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<std::uint32_t> c(n);
    for (auto& x : c) x = choose_opportunity(cell, rng);
    const auto r = contend(cell, c, rng);
    simulated += std::count(r.begin(), r.end(), ContentionResult::singleton_success);
  }
  simulated /= trials;

  CHECK(brute == doctest::Approx(analytic).epsilon(0.02));
  CHECK(simulated == doctest::Approx(analytic).epsilon(0.02));
  CHECK(simulated == doctest::Approx(brute).epsilon(0.02));
}

TEST_CASE("grant issuing") {
  const auto cell = simple_cell(1);
  std::deque<GrantRequest> q;
  for (std::uint32_t i = 0; i < 100; ++i) q.push_back({i, 0, 0.0});

  SUBCASE("budget caps a window") {
    const auto g = issue_grants(cell, q, 1.0, 0);
    CHECK(g.size() == 28);
    CHECK(g.front().attempt == 0);
    CHECK(g.back().attempt == 27);
    CHECK(q.size() == 72);
  }
  SUBCASE("identifier limit gates grants") {
    CHECK(issue_grants(cell, q, 1.0, 49).empty());
    CHECK(issue_grants(cell, q, 1.0, 45).size() == 4);
  }
  SUBCASE("empty queue") {
    std::deque<GrantRequest> none;
    CHECK(issue_grants(cell, none, 1.0, 0).empty());
  }
  SUBCASE("dead requests do not consume budget") {
    const auto g = issue_grants(cell, q, 1.0, 0, [](const GrantRequest& r) { return r.attempt % 2 == 1; });
    CHECK(g.size() == 28);
    for (const auto& r : g) CHECK(r.attempt % 2 == 1);
  }
  SUBCASE("GPRS grant slot carries one grant, LTE window fifteen") {
    CHECK(gprs::gprs_cell({}).grants_per_slot() == 1);
    CHECK(lte::lte_cell(lte::lte_config(lte::Bandwidth::mhz1_4)).grants_per_slot() == 15);
  }
}

TEST_CASE("backoff delay") {
  auto cell = simple_cell(1);
  sim::RngStream rng(77, 1);

  SUBCASE("first failure uses one retry") {
    AccessAttempt a;
    const auto d = backoff_delay(cell, a, rng);
    REQUIRE(d.has_value());
    CHECK(a.retries_used == 1);
    CHECK(a.state == AttemptState::backlogged);
  }
  SUBCASE("exhausted retries fail the report") {
    AccessAttempt a;
    for (int i = 0; i < 3; ++i) CHECK(backoff_delay(cell, a, rng).has_value());
    CHECK_FALSE(backoff_delay(cell, a, rng).has_value());
    CHECK(a.retries_used == 3);
    CHECK(a.report.outcome == Outcome::failed_max_retries);
  }
  SUBCASE("delays are uniform on [0, window) (Kolmogorov-Smirnov)") {
    const int n = 10000;
    std::vector<double> xs;
    cell.max_retransmissions = n;
    AccessAttempt a;
    for (int i = 0; i < n; ++i) xs.push_back(*backoff_delay(cell, a, rng));
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
      d = std::max({d, (i + 1.0) / n - xs[i], xs[i] - static_cast<double>(i) / n});
    }
    CHECK(xs.front() >= 0.0);
    CHECK(xs.back() < 1.0);
    CHECK(d < 1.63 / std::sqrt(n));  // 1% critical value
  }
}

TEST_CASE("report terminal states") {
  Report r;
  r.created_at = 0.0;
  r.deadline_at = 1.0;
  CHECK_THROWS_AS(r.mark_delivered(1.5), std::logic_error);
  r.mark_delivered(0.9);
  CHECK(r.outcome == Outcome::delivered);
  CHECK_THROWS_AS(r.mark_failed(Outcome::failed_deadline), std::logic_error);
  CHECK_THROWS_AS(r.mark_delivered(0.95), std::logic_error);

  Report q;
  CHECK_THROWS_AS(q.mark_failed(Outcome::delivered), std::logic_error);
}

TEST_CASE("deadline expiry") {
  std::vector<Report> rs(3);
  for (auto& r : rs) r.deadline_at = 1.0;
  rs[1].mark_delivered(0.9);
  rs[2].deadline_at = 2.0;
  const auto expired = expire_deadlines(rs, 1.0);
  CHECK(expired == std::vector<std::size_t>{0});
  CHECK(rs[0].outcome == Outcome::failed_deadline);
  CHECK(rs[1].outcome == Outcome::delivered);
  CHECK(rs[1].delivered_at == 0.9);
  CHECK(rs[2].outcome == Outcome::pending);
  CHECK(expire_deadlines(rs, 1.5).empty());
}

TEST_CASE("cell model validation") {
  auto c = simple_cell(54);
  CHECK_NOTHROW(c.validate());
  CHECK(c.rao_rate() == doctest::Approx(10800.0));
  c.p_data_error = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = simple_cell(54);
  c.identifier_limit = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
