#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "cellm2m/sweep.hpp"

using namespace cellm2m;

namespace {

Scenario small_scenario() {
  return parse_config_text(
      "technology = gprs\n"
      "replications = 3\n"
      "horizon = 600\n"
      "mode = both\n"
      "[traffic]\n"
      "n_sm = 1500\n"
      "ri = default, 60\n");
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::ranges::count(s, '\n')); }

}  // namespace

TEST_CASE("parallel sweep reproduces the serial reference row for row") {
  const auto s = small_scenario();
  const auto serial = run_sweep_serial(s);
  const auto parallel = run_sweep_parallel(s, 4);
  REQUIRE(serial.rows.size() == 2 * 2 * 3);
  REQUIRE(parallel.rows.size() == serial.rows.size());
  for (std::size_t i = 0; i < serial.rows.size(); ++i) {
    CHECK(serial.rows[i].trace_digest == parallel.rows[i].trace_digest);
    CHECK(serial.rows[i].counts == parallel.rows[i].counts);
    CHECK(serial.rows[i].outage == parallel.rows[i].outage);
  }
  CHECK(results_csv(s, serial) == results_csv(s, parallel));
}

TEST_CASE("rows are ordered by point, mode, replication") {
  const auto s = small_scenario();
  const auto r = run_sweep(s);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    const auto& a = r.rows[i - 1];
    const auto& b = r.rows[i];
    CHECK(std::tuple(a.point, a.mode, a.replication) < std::tuple(b.point, b.mode, b.replication));
  }
  CHECK(r.rows[0].seed == s.seed);
  CHECK(r.rows[2].seed == s.seed + 2);
}

TEST_CASE("results csv layout") {
  const auto s = small_scenario();
  const auto r = run_sweep(s);
  const auto csv = results_csv(s, r);
  CHECK(line_count(csv) == 1 + r.rows.size());
  std::istringstream in(csv);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header ==
        "scenario_id,technology,bandwidth_hz,n_sm,ri_s,esm_penetration_pct,rs_bytes,mode,replication,"
        "seed,outage,ci95,reports_total,reports_failed_deadline,reports_failed_retries");
  CHECK(first.starts_with("scenario-000,GPRS,200000,1500,default,0,3848,ARP+D,0,1,"));
  CHECK(csv.find(",D,") != std::string::npos);
  CHECK(results_csv(s, run_sweep(s)) == csv);
}

TEST_CASE("analytic D-only rows carry no report counts") {
  auto s = small_scenario();
  const auto r = run_sweep(s);
  for (const auto& row : r.rows) {
    if (row.mode == SimMode::data_only) {
      CHECK(row.analytic);
      CHECK(row.outage == doctest::Approx(0.0));
    } else {
      CHECK_FALSE(row.analytic);
      CHECK(row.counts.total > 0);
    }
  }
}

TEST_CASE("analytic D-only stays below ARP+D on an overloaded carrier") {
  auto s = small_scenario();
  s.n_sm = {4500};
  s.ri = {traffic::ReportingInterval::reduced(30)};
  const auto r = run_sweep(s);
  const auto* arp = r.summary(0, SimMode::arp_plus_data);
  const auto* d = r.summary(0, SimMode::data_only);
  REQUIRE(arp);
  REQUIRE(d);
  CHECK(d->estimate->mean <= arp->estimate->mean);
  CHECK(d->estimate->mean > 0.3);
  CHECK(arp->estimate->mean > 0.5);
}

TEST_CASE("a different base seed stays inside the sampling noise") {
  auto s = small_scenario();
  s.n_sm = {4500};
  s.ri = {traffic::ReportingInterval::reduced(60)};
  s.mode = ModeSelection::arp_plus_data;
  s.replications = 4;
  const auto a = run_sweep(s).summaries.front().estimate.value();
  s.seed = 1001;
  const auto b = run_sweep(s).summaries.front().estimate.value();
  const double tol = 3.0 * std::hypot(a.ci95_halfwidth.value(), b.ci95_halfwidth.value()) + 0.01;
  CHECK(std::abs(a.mean - b.mean) <= tol);
}

TEST_CASE("LTE without background meters simulates only eSMs") {
  auto s = parse_config_text("technology = lte\nlte_background_sm = false\nesm_penetration = 10\n");
  const auto pop = scenario_population(s, sweep_points(s).front(), 1);
  CHECK(pop.devices.size() == 450);
  for (const auto& d : pop.devices) CHECK(d.device_class == traffic::DeviceClass::esm);
}

TEST_CASE("capacity table") {
  const auto s = parse_config_text("technology = lte\n[traffic]\nesm_penetration = 0, 100\nrs = 115\n");
  const auto csv = capacity_csv(s);
  CHECK(line_count(csv) == 3);
  CHECK(csv.find("LTE,1400000,4500,default,100,115,") != std::string::npos);
}

TEST_CASE("thread cap") {
  CHECK(worker_count(1) == 1);
  CHECK(worker_count(3) <= 3);
  CHECK(worker_count(0) >= 1);
}
