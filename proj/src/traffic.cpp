#include "cellm2m/traffic.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace cellm2m::traffic {

std::string_view to_string(DeviceClass c) {
  switch (c) {
    case DeviceClass::residential: return "residential";
    case DeviceClass::commercial_industrial: return "commercial-industrial";
    case DeviceClass::esm: return "esm";
  }
  return "?";
}

std::string_view to_string(UseCase u) {
  switch (u) {
    case UseCase::meter_reading: return "Meter Reading";
    case UseCase::service_switch: return "Service Switch";
    case UseCase::prepay: return "PrePay";
    case UseCase::meter_events: return "Meter Events";
    case UseCase::idcs: return "Islanded Distr. Cust. Storage";
    case UseCase::dr_dlc: return "DR-DLC";
    case UseCase::premise_network_admin: return "Premise Network Admin";
    case UseCase::price: return "Price";
    case UseCase::firmware_program_update: return "Firmware / Program Update";
    case UseCase::esm_report: return "eSM Report";
  }
  return "?";
}

double reliability_target(UseCase u) {
  switch (u) {
    case UseCase::meter_reading: return 0.995;
    case UseCase::idcs: return 0.99;
    default: return 0.98;
  }
}

ArrivalProcess ArrivalProcess::periodic(Seconds period, Seconds phase_offset) {
  if (!(period > 0.0)) throw std::invalid_argument("periodic arrivals need a positive period");
  ArrivalProcess a;
  a.kind = Kind::periodic;
  a.period = period;
  a.phase_offset = phase_offset;
  return a;
}

ArrivalProcess ArrivalProcess::poisson(double rate_per_day) {
  if (rate_per_day < 0.0) throw std::invalid_argument("negative Poisson rate");
  ArrivalProcess a;
  a.kind = Kind::poisson;
  a.rate_per_day = rate_per_day;
  return a;
}

double ArrivalProcess::messages_per_day() const {
  return kind == Kind::periodic ? kSecondsPerDay / period : rate_per_day;
}

ReportingInterval ReportingInterval::reduced(int seconds) {
  if (seconds != 300 && seconds != 60 && seconds != 30 && seconds != 15) {
    throw std::invalid_argument("unsupported reporting interval: " + std::to_string(seconds) +
                                " s (expected default, 300, 60, 30 or 15)");
  }
  return ReportingInterval(seconds);
}

ReportingInterval ReportingInterval::parse(std::string_view text) {
  if (text == "default") return standard();
  int value = 0;
  std::size_t used = 0;
  try {
    value = std::stoi(std::string(text), &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid reporting interval '" + std::string(text) + "'");
  }
  if (used != text.size()) {
    throw std::invalid_argument("invalid reporting interval '" + std::string(text) + "'");
  }
  return reduced(value);
}

Seconds ReportingInterval::period_for(DeviceClass c) const {
  if (c == DeviceClass::esm) return kEsmPeriod;
  if (!is_standard()) return seconds_;
  return c == DeviceClass::residential ? 4 * 3600.0 : 3600.0;
}

std::uint32_t ReportingInterval::report_size_for(DeviceClass c) const {
  const bool residential = c == DeviceClass::residential;
  if (is_standard()) return residential ? kResidentialDefaultSize : kCommercialDefaultSize;
  return residential ? kResidentialReducedSize : kCommercialReducedSize;
}

std::string ReportingInterval::label() const {
  return is_standard() ? std::string("default") : std::to_string(seconds_);
}

namespace {

struct EventStream {
  std::string_view name;
  UseCase use_case;
  double rate_per_day;
  std::uint32_t size;
};

// Streams with a known event frequency use size = daily bytes / frequency.
// Use cases with only a daily byte figure become 50 B messages at
// rate = daily bytes / 50.
constexpr EventStream kEventStreams[] = {
    {"on-demand-read", UseCase::meter_reading, 0.025, 50},
    {"capped-energy", UseCase::service_switch, 5.0 / 365.0, 50},
    {"dr-dlc", UseCase::dr_dlc, 0.015, 33},
    {"han-join-unjoin", UseCase::premise_network_admin, 5.0 / 365.0, 73},
    {"rtp-confirmation", UseCase::price, 96.0, 25},
    {"metrology-fw-update", UseCase::firmware_program_update, 4.0 / 365.0, 114},
    {"metrology-program-update", UseCase::firmware_program_update, 4.0 / 365.0, 114},
    {"nic-fw-update", UseCase::firmware_program_update, 4.0 / 365.0, 114},
    {"nic-program-update", UseCase::firmware_program_update, 4.0 / 365.0, 114},
    {"meter-events", UseCase::meter_events, 50.0 / 50.0, 50},
    {"service-switch", UseCase::service_switch, 6.0 / 50.0, 50},
    {"prepay", UseCase::prepay, 8.0 / 50.0, 50},
    {"idcs", UseCase::idcs, 5.0 / 50.0, 50},
};

}  // namespace

std::vector<UseCaseProfile> sm_profiles(DeviceClass c, ReportingInterval ri) {
  if (c == DeviceClass::esm) throw std::invalid_argument("eSM devices have no SM profiles");
  std::vector<UseCaseProfile> out;
  out.reserve(1 + std::size(kEventStreams));

  UseCaseProfile reading;
  reading.name = "meter-reading";
  reading.use_case = UseCase::meter_reading;
  reading.arrival = ArrivalProcess::periodic(ri.period_for(c));
  reading.message_size = ri.report_size_for(c);
  reading.deadline = ri.period_for(c);
  reading.reliability_target = reliability_target(UseCase::meter_reading);
  out.push_back(reading);

  for (const auto& s : kEventStreams) {
    UseCaseProfile p;
    p.name = s.name;
    p.use_case = s.use_case;
    p.arrival = ArrivalProcess::poisson(s.rate_per_day);
    p.message_size = s.size;
    p.deadline = kEventDeadline;
    p.reliability_target = reliability_target(s.use_case);
    out.push_back(p);
  }
  return out;
}

std::uint32_t esm_report_size(const EsmFrameSpec& spec) {
  return spec.samples_per_report * spec.frame_bytes() + spec.transport_header;
}

UseCaseProfile esm_profile(std::int64_t report_size) {
  if (report_size <= 0) throw std::invalid_argument("eSM report size must be positive");
  UseCaseProfile p;
  p.name = "esm-report";
  p.use_case = UseCase::esm_report;
  p.arrival = ArrivalProcess::periodic(kEsmPeriod);
  p.message_size = static_cast<std::uint32_t>(report_size);
  p.deadline = kEsmDeadline;
  p.reliability_target = reliability_target(UseCase::esm_report);
  return p;
}

DevicePopulation build_population(std::int64_t n_sm, double esm_penetration_pct,
                                  std::uint32_t esm_size, ReportingInterval ri,
                                  sim::RngStream& rng, double residential_share) {
  if (n_sm < 0) throw std::invalid_argument("negative SM count");
  if (!(esm_penetration_pct >= 0.0 && esm_penetration_pct <= 100.0)) {
    throw std::invalid_argument("eSM penetration must lie in [0, 100]");
  }
  if (!(residential_share >= 0.0 && residential_share <= 1.0)) {
    throw std::invalid_argument("residential share must lie in [0, 1]");
  }
  DevicePopulation pop;
  pop.ri = ri;
  pop.esm_report_size = esm_size;
  pop.n_residential = static_cast<std::uint32_t>(std::llround(residential_share * n_sm));
  pop.n_ci = static_cast<std::uint32_t>(n_sm) - pop.n_residential;
  pop.n_esm = static_cast<std::uint32_t>(std::llround(esm_penetration_pct / 100.0 * n_sm));

  const auto residential = sm_profiles(DeviceClass::residential, ri);
  const auto commercial = sm_profiles(DeviceClass::commercial_industrial, ri);
  std::vector<UseCaseProfile> esm;
  if (pop.n_esm > 0) esm.push_back(esm_profile(esm_size));

  pop.devices.reserve(pop.n_sm() + pop.n_esm);
  auto add = [&](DeviceClass c, std::uint32_t location, const std::vector<UseCaseProfile>& profiles) {
    DeviceSpec d;
    d.id = static_cast<std::uint32_t>(pop.devices.size());
    d.device_class = c;
    d.location = location;
    d.profiles = profiles;
    for (auto& p : d.profiles) {
      if (p.arrival.kind == ArrivalProcess::Kind::periodic) {
        p.arrival.phase_offset = rng.uniform(0.0, p.arrival.period);
      }
    }
    pop.devices.push_back(std::move(d));
  };

  for (std::uint32_t i = 0; i < pop.n_residential; ++i) add(DeviceClass::residential, i, residential);
  for (std::uint32_t i = 0; i < pop.n_ci; ++i) {
    add(DeviceClass::commercial_industrial, pop.n_residential + i, commercial);
  }

  // Partial Fisher-Yates: the first n_esm entries are distinct SM locations.
  std::vector<std::uint32_t> locations(pop.n_sm());
  std::iota(locations.begin(), locations.end(), 0U);
  for (std::uint32_t i = 0; i < pop.n_esm; ++i) {
    const auto j = i + rng.uniform_index(static_cast<std::uint32_t>(locations.size()) - i);
    std::swap(locations[i], locations[j]);
    add(DeviceClass::esm, locations[i], esm);
  }
  return pop;
}

Seconds next_arrival(const UseCaseProfile& profile, sim::RngStream& rng, Seconds now) {
  const auto& a = profile.arrival;
  if (a.kind == ArrivalProcess::Kind::periodic) {
    if (now < a.phase_offset) return a.phase_offset;
    const double k = std::floor((now - a.phase_offset) / a.period) + 1.0;
    Seconds t = a.phase_offset + k * a.period;
    while (t <= now) t += a.period;
    return t;
  }
  if (a.rate_per_day <= 0.0) return sim::kNever;
  return now + rng.exponential(kSecondsPerDay / a.rate_per_day);
}

namespace {

constexpr double kReferenceMeterReading[] = {11000.0, 95000.0, 475000.0, 950000.0, 1.9e6};
constexpr double kReferenceTotal[] = {13400.0, 97000.0, 477000.0, 952000.0, 1.9e6};

std::size_t ri_column(ReportingInterval ri) {
  if (ri.is_standard()) return 0;
  switch (ri.seconds()) {
    case 300: return 1;
    case 60: return 2;
    case 30: return 3;
    default: return 4;
  }
}

}  // namespace

std::optional<double> reference_daily_uplink(UseCase u, ReportingInterval ri) {
  switch (u) {
    case UseCase::meter_reading: return kReferenceMeterReading[ri_column(ri)];
    case UseCase::service_switch: return 6.0;
    case UseCase::prepay: return 8.0;
    case UseCase::meter_events: return 50.0;
    case UseCase::idcs: return 5.0;
    case UseCase::dr_dlc: return 0.5;
    case UseCase::premise_network_admin: return 1.0;
    case UseCase::price: return 2400.0;
    case UseCase::firmware_program_update: return 5.0;
    case UseCase::esm_report: return std::nullopt;
  }
  return std::nullopt;
}

double reference_daily_uplink_total(ReportingInterval ri) { return kReferenceTotal[ri_column(ri)]; }

std::vector<DailyVolumeRow> validate_daily_volume(const DevicePopulation& population, int days,
                                                  std::uint64_t seed, int threads) {
  if (days < 1) throw std::invalid_argument("validation needs at least one simulated day");
  const VolumeTally tally = generate_volume_parallel(population, days, seed, threads);
  const double meter_days = static_cast<double>(tally.meters) * days;

  auto make_row = [&](std::string name, double model, std::optional<double> reference) {
    DailyVolumeRow row;
    row.use_case = std::move(name);
    row.direction = "uplink";
    row.model_bytes = model;
    row.reference_bytes = reference;
    if (reference && *reference != 0.0) row.relative_error = (model - *reference) / *reference;
    return row;
  };

  std::vector<DailyVolumeRow> rows;
  double total = 0.0;
  for (std::size_t u = 0; u < kUseCaseCount; ++u) {
    const auto use_case = static_cast<UseCase>(u);
    if (use_case == UseCase::esm_report) continue;
    const double model =
        meter_days > 0 ? static_cast<double>(tally.bytes_by_use_case[u]) / meter_days : 0.0;
    total += model;
    rows.push_back(make_row(std::string(to_string(use_case)), model,
                            reference_daily_uplink(use_case, population.ri)));
  }
  rows.push_back(make_row("Total", total, reference_daily_uplink_total(population.ri)));
  return rows;
}

std::string daily_volume_csv(std::span<const DailyVolumeRow> rows) {
  std::string out =
      "use_case,direction,bytes_per_meter_per_day_model,bytes_per_meter_per_day_paper,"
      "relative_error\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{:.3f},{},{}\n", r.use_case, r.direction, r.model_bytes,
                       r.reference_bytes ? fmt::format("{:.1f}", *r.reference_bytes) : std::string(),
                       r.relative_error ? fmt::format("{:.6f}", *r.relative_error) : std::string());
  }
  return out;
}

}  // namespace cellm2m::traffic
