#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <set>

#include "cellm2m/traffic.hpp"

using namespace cellm2m;
using namespace cellm2m::traffic;

namespace {

const UseCaseProfile& reading(const std::vector<UseCaseProfile>& ps) {
  auto it = std::find_if(ps.begin(), ps.end(), [](const auto& p) {
    return p.arrival.kind == ArrivalProcess::Kind::periodic;
  });
  REQUIRE(it != ps.end());
  return *it;
}

// Hand-derived per-meter uplink bytes/day of every event stream: frequency
// per day times message size (size = daily bytes / frequency where a
// frequency exists, otherwise 50 B messages).
struct Oracle {
  UseCase use_case;
  double per_day;
  double size;
};
const Oracle kEventOracle[] = {
    {UseCase::meter_reading, 0.025, 50},                    // on-demand read
    {UseCase::service_switch, 5.0 / 365, 50},               // capped energy
    {UseCase::dr_dlc, 0.015, 33},                           // 0.5 / 0.015
    {UseCase::premise_network_admin, 5.0 / 365, 73},        // 1 / (5/365)
    {UseCase::price, 96, 25},                               // 2400 / 96
    {UseCase::firmware_program_update, 16.0 / 365, 114},    // 5 / (16/365)
    {UseCase::meter_events, 1, 50},
    {UseCase::service_switch, 0.12, 50},
    {UseCase::prepay, 0.16, 50},
    {UseCase::idcs, 0.1, 50},
};

double oracle_reading_bytes(ReportingInterval ri) {
  if (ri.is_standard()) return 0.9 * (86400.0 / 14400) * 1200 + 0.1 * (86400.0 / 3600) * 2400;
  return 86400.0 / ri.seconds() * (0.9 * 300 + 0.1 * 600);
}

double oracle_bytes(UseCase u, ReportingInterval ri) {
  double b = u == UseCase::meter_reading ? oracle_reading_bytes(ri) : 0.0;
  for (const auto& o : kEventOracle) {
    if (o.use_case == u) b += o.per_day * o.size;
  }
  return b;
}

}  // namespace

TEST_CASE("meter reading profiles") {
  const auto ci = sm_profiles(DeviceClass::commercial_industrial, ReportingInterval::standard());
  CHECK(reading(ci).message_size == 2400);
  CHECK(reading(ci).arrival.period == 3600.0);
  CHECK(reading(ci).deadline == 3600.0);

  const auto res = sm_profiles(DeviceClass::residential, ReportingInterval::standard());
  CHECK(reading(res).message_size == 1200);
  CHECK(reading(res).arrival.period == 14400.0);

  const auto res300 = sm_profiles(DeviceClass::residential, ReportingInterval::reduced(300));
  CHECK(reading(res300).message_size == 300);
  CHECK(reading(res300).arrival.period == 300.0);
  const auto ci15 = sm_profiles(DeviceClass::commercial_industrial, ReportingInterval::reduced(15));
  CHECK(reading(ci15).message_size == 600);
  CHECK(reading(ci15).arrival.period == 15.0);

  CHECK_THROWS_AS(sm_profiles(DeviceClass::esm, ReportingInterval::standard()), std::invalid_argument);
  CHECK_THROWS_AS(ReportingInterval::reduced(120), std::invalid_argument);
  CHECK_THROWS_AS(ReportingInterval::parse("abc"), std::invalid_argument);
  CHECK(ReportingInterval::parse("60") == ReportingInterval::reduced(60));
}

TEST_CASE("event-driven profiles carry the table rates, deadlines and targets") {
  const auto ps = sm_profiles(DeviceClass::residential, ReportingInterval::standard());
  for (const auto& p : ps) {
    CHECK(p.message_size > 0);
    CHECK(p.deadline > 0.0);
    CHECK(p.reliability_target > 0.0);
    CHECK(p.reliability_target <= 1.0);
    if (p.arrival.kind == ArrivalProcess::Kind::poisson) CHECK(p.deadline == 60.0);
    if (p.use_case == UseCase::idcs) CHECK(p.reliability_target == 0.99);
  }
  auto rate_of = [&](std::string_view name) {
    for (const auto& p : ps) {
      if (p.name == name) return p.arrival.rate_per_day;
    }
    FAIL("missing stream " << name);
    return 0.0;
  };
  CHECK(rate_of("on-demand-read") == 0.025);
  CHECK(rate_of("capped-energy") == doctest::Approx(5.0 / 365));
  CHECK(rate_of("dr-dlc") == 0.015);
  CHECK(rate_of("han-join-unjoin") == doctest::Approx(5.0 / 365));
  CHECK(rate_of("rtp-confirmation") == 96.0);
  CHECK(rate_of("nic-fw-update") == doctest::Approx(4.0 / 365));
}

TEST_CASE("profile byte rates agree with the hand-derived oracle") {
  for (auto ri : {ReportingInterval::standard(), ReportingInterval::reduced(300),
                  ReportingInterval::reduced(60), ReportingInterval::reduced(30),
                  ReportingInterval::reduced(15)}) {
    std::vector<double> model(kUseCaseCount, 0.0);
    for (auto c : {DeviceClass::residential, DeviceClass::commercial_industrial}) {
      const double w = c == DeviceClass::residential ? 0.9 : 0.1;
      for (const auto& p : sm_profiles(c, ri)) model[static_cast<std::size_t>(p.use_case)] += w * p.bytes_per_day();
    }
    for (std::size_t u = 0; u + 1 < kUseCaseCount; ++u) {
      const auto uc = static_cast<UseCase>(u);
      CHECK(model[u] == doctest::Approx(oracle_bytes(uc, ri)).epsilon(1e-9));
    }
  }
}

TEST_CASE("eSM report sizing") {
  EsmFrameSpec spec;
  CHECK(spec.frame_bytes() == 76);
  CHECK(esm_report_size(spec) == 3848);
  spec.samples_per_report = 0;
  CHECK(esm_report_size(spec) == 48);
  spec.samples_per_report = 1;
  CHECK(esm_report_size(spec) == 124);

  CHECK(esm_profile(3848).bytes_per_day() * 8 / kSecondsPerDay == doctest::Approx(30784.0));
  CHECK(esm_profile(400).bytes_per_day() * 8 / kSecondsPerDay == doctest::Approx(3200.0));
  CHECK(esm_profile(115).bytes_per_day() * 8 / kSecondsPerDay == doctest::Approx(920.0));
  CHECK(esm_profile(115).deadline == 1.0);
  CHECK(esm_profile(115).arrival.period == 1.0);
  CHECK_THROWS_AS(esm_profile(0), std::invalid_argument);
  CHECK_THROWS_AS(esm_profile(-5), std::invalid_argument);
}

TEST_CASE("population composition is exact") {
  sim::RngStream rng(1, 1);
  const auto p0 = build_population(4500, 0, 3848, ReportingInterval::standard(), rng);
  CHECK(p0.n_residential == 4050);
  CHECK(p0.n_ci == 450);
  CHECK(p0.n_esm == 0);
  CHECK(p0.devices.size() == 4500);

  const auto p2 = build_population(4500, 2, 3848, ReportingInterval::standard(), rng);
  CHECK(p2.n_esm == 90);
  CHECK(p2.devices.size() == 4590);
  std::set<std::uint32_t> locations;
  for (const auto& d : p2.devices) {
    CHECK_FALSE(d.profiles.empty());
    if (d.device_class == DeviceClass::esm) {
      CHECK(d.location < 4500);
      locations.insert(d.location);
    }
  }
  CHECK(locations.size() == 90);

  const auto empty = build_population(0, 0, 3848, ReportingInterval::standard(), rng);
  CHECK(empty.devices.empty());

  const auto odd = build_population(7, 50, 400, ReportingInterval::reduced(60), rng);
  CHECK(odd.n_residential + odd.n_ci == 7);
  CHECK(odd.n_esm == 4);  // round(3.5)

  CHECK_THROWS(build_population(-1, 0, 3848, ReportingInterval::standard(), rng));
  CHECK_THROWS(build_population(10, 101, 3848, ReportingInterval::standard(), rng));
}

TEST_CASE("phase offsets are uniform over the period") {
  sim::RngStream rng(3, 1);
  const auto pop = build_population(4000, 0, 3848, ReportingInterval::reduced(300), rng);
  double sum = 0.0;
  for (const auto& d : pop.devices) {
    const auto& p = reading(d.profiles);
    CHECK(p.arrival.phase_offset >= 0.0);
    CHECK(p.arrival.phase_offset < p.arrival.period);
    sum += p.arrival.phase_offset / p.arrival.period;
  }
  // mean of 4000 U(0,1): sd ~ 0.0046
  CHECK(sum / pop.devices.size() == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("next arrival") {
  sim::RngStream rng(1, 2);
  UseCaseProfile p;
  p.arrival = ArrivalProcess::periodic(14400.0, 0.0);
  CHECK(next_arrival(p, rng, 0.0) == 14400.0);
  CHECK(next_arrival(p, rng, 14399.0) == 14400.0);
  CHECK(next_arrival(p, rng, 14400.0) == 28800.0);
  p.arrival = ArrivalProcess::periodic(300.0, 17.5);
  CHECK(next_arrival(p, rng, 0.0) == 17.5);
  CHECK(next_arrival(p, rng, 17.5) == 317.5);

  p.arrival = ArrivalProcess::poisson(0.0);
  CHECK(next_arrival(p, rng, 5.0) == sim::kNever);

  p.arrival = ArrivalProcess::poisson(96.0);
  double t = 0.0;
  const int n = 100'000;
  for (int i = 0; i < n; ++i) {
    const double next = next_arrival(p, rng, t);
    CHECK_UNARY(next > t);
    t = next;
  }
  CHECK(t / n == doctest::Approx(900.0).epsilon(0.02));
}

TEST_CASE("poisson counts per window match the configured rate (chi-square)") {
  sim::RngStream rng(11, 4);
  UseCaseProfile p;
  p.arrival = ArrivalProcess::poisson(96.0);
  // 10^5 events binned into windows of 2 h (expected 8 per window).
  const double window = 7200.0;
  const int n_windows = 12500;
  std::vector<int> counts(n_windows, 0);
  double t = next_arrival(p, rng, 0.0);
  while (t < n_windows * window) {
    ++counts[static_cast<int>(t / window)];
    t = next_arrival(p, rng, t);
  }
  // Dispersion test: sum (x - m)^2 / m ~ chi-square(n-1); z-score within 4.
  double total = 0.0;
  for (int c : counts) total += c;
  const double m = total / n_windows;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - m) * (c - m) / m;
  const double z = (chi2 - (n_windows - 1)) / std::sqrt(2.0 * (n_windows - 1));
  CHECK(std::abs(z) < 4.0);
  CHECK(m == doctest::Approx(8.0).epsilon(0.02));
}

TEST_CASE("generated volumes match the oracle") {
  sim::RngStream rng(5, 1);
  for (auto ri : {ReportingInterval::standard(), ReportingInterval::reduced(300),
                  ReportingInterval::reduced(15)}) {
    const auto pop = build_population(4500, 0, 3848, ri, rng);
    const int days = 10;
    const auto tally = generate_volume_serial(pop, days, 99);
    CHECK(tally.meters == 4500);
    const double meter_days = 4500.0 * days;
    for (std::size_t u = 0; u + 1 < kUseCaseCount; ++u) {
      const auto uc = static_cast<UseCase>(u);
      const double expected = oracle_bytes(uc, ri);
      const double got = tally.bytes_by_use_case[u] / meter_days;
      // Poisson noise: relative sd ~ 1/sqrt(events); events >= expected/max size.
      const double events = expected * meter_days / 114.0;
      const double tol = std::max(5.0 / std::sqrt(events), 1e-6);
      INFO(to_string(uc), " ri ", ri.label());
      CHECK(got == doctest::Approx(expected).epsilon(tol));
    }
  }
}

TEST_CASE("reduced-RI meter reading volume is deterministic") {
  sim::RngStream rng(5, 1);
  for (int s : {300, 60, 30, 15}) {
    const auto ri = ReportingInterval::reduced(s);
    const auto pop = build_population(1000, 0, 3848, ri, rng);
    const auto tally = generate_volume_serial(pop, 2, 1);
    // every periodic stream produces exactly days*86400/period arrivals
    std::uint64_t expected = 0;
    for (const auto& d : pop.devices) {
      const auto& p = reading(d.profiles);
      expected += static_cast<std::uint64_t>(std::llround(2 * 86400.0 / p.arrival.period)) * p.message_size;
    }
    // on-demand reads share the row; subtract via a second run of only the periodic part
    const auto mr = tally.bytes_by_use_case[static_cast<std::size_t>(UseCase::meter_reading)];
    CHECK(mr >= expected);
    CHECK(mr - expected < 1000 * 2 * 50);  // on-demand reads: ~0.05 per meter over 2 days
  }
}

TEST_CASE("serial and parallel volume generation agree exactly") {
  sim::RngStream rng(8, 1);
  const auto pop = build_population(3000, 10, 3848, ReportingInterval::reduced(60), rng);
  const auto a = generate_volume_serial(pop, 3, 17);
  for (int threads : {1, 2, 4, 7}) {
    const auto b = generate_volume_parallel(pop, 3, 17, threads);
    CHECK(a.meters == b.meters);
    CHECK(a.bytes_by_use_case == b.bytes_by_use_case);
  }
}

TEST_CASE("daily volume table and csv") {
  sim::RngStream rng(5, 1);
  const auto pop = build_population(900, 0, 3848, ReportingInterval::reduced(30), rng);
  const auto rows = validate_daily_volume(pop, 3, 4, 2);
  REQUIRE(rows.size() == 10);
  CHECK(rows.back().use_case == "Total");
  CHECK(rows.back().reference_bytes.value() == 952000.0);
  CHECK(std::abs(rows.back().relative_error.value()) < 0.05);
  const auto csv = daily_volume_csv(rows);
  CHECK(csv.rfind("use_case,direction,bytes_per_meter_per_day_model,bytes_per_meter_per_day_paper,relative_error\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
  CHECK_THROWS(validate_daily_volume(pop, 0, 4));
}
