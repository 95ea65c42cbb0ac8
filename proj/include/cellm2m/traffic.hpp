// Uplink workload models for smart meters (SM) and PMU-equipped enhanced
// smart meters (eSM).
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cellm2m/sim_core.hpp"

namespace cellm2m::traffic {

using sim::Seconds;

inline constexpr Seconds kSecondsPerDay = 86400.0;

enum class DeviceClass : std::uint8_t { residential, commercial_industrial, esm };
inline constexpr std::size_t kDeviceClassCount = 3;

std::string_view to_string(DeviceClass c);

/// Use cases as grouped in the daily-volume table, plus the eSM report.
enum class UseCase : std::uint8_t {
  meter_reading,
  service_switch,
  prepay,
  meter_events,
  idcs,
  dr_dlc,
  premise_network_admin,
  price,
  firmware_program_update,
  esm_report,
};
inline constexpr std::size_t kUseCaseCount = 10;

std::string_view to_string(UseCase u);
double reliability_target(UseCase u);

struct ArrivalProcess {
  enum class Kind : std::uint8_t { periodic, poisson };
  Kind kind = Kind::periodic;
  Seconds period = 0.0;        // periodic only
  double rate_per_day = 0.0;   // poisson only
  Seconds phase_offset = 0.0;  // periodic only, in [0, period)

  static ArrivalProcess periodic(Seconds period, Seconds phase_offset = 0.0);
  static ArrivalProcess poisson(double rate_per_day);

  /// Long-run messages per day.
  double messages_per_day() const;
};

struct UseCaseProfile {
  std::string_view name;
  UseCase use_case = UseCase::meter_reading;
  ArrivalProcess arrival;
  std::uint32_t message_size = 0;  // bytes
  Seconds deadline = 0.0;
  double reliability_target = 0.98;

  double bytes_per_day() const { return arrival.messages_per_day() * message_size; }
};

/// Meter-reading interval. The standard setting is 4 h for residential and
/// 1 h for commercial/industrial meters; reduced settings apply to both.
class ReportingInterval {
 public:
  static ReportingInterval standard() { return ReportingInterval(0); }
  /// Throws std::invalid_argument unless seconds is 300, 60, 30 or 15.
  static ReportingInterval reduced(int seconds);
  /// Accepts "default" or one of the reduced values in seconds.
  static ReportingInterval parse(std::string_view text);

  bool is_standard() const noexcept { return seconds_ == 0; }
  int seconds() const noexcept { return seconds_; }
  Seconds period_for(DeviceClass c) const;
  std::uint32_t report_size_for(DeviceClass c) const;
  std::string label() const;

  friend bool operator==(ReportingInterval, ReportingInterval) = default;

 private:
  explicit ReportingInterval(int s) : seconds_(s) {}
  int seconds_;
};

inline constexpr std::uint32_t kResidentialDefaultSize = 1200;
inline constexpr std::uint32_t kCommercialDefaultSize = 2400;
inline constexpr std::uint32_t kResidentialReducedSize = 300;
inline constexpr std::uint32_t kCommercialReducedSize = 600;
inline constexpr Seconds kEventDeadline = 60.0;
inline constexpr Seconds kEsmPeriod = 1.0;
inline constexpr Seconds kEsmDeadline = 1.0;

/// Periodic meter reading plus every event-driven uplink stream of an SM.
/// Throws std::invalid_argument for the eSM class.
std::vector<UseCaseProfile> sm_profiles(DeviceClass c, ReportingInterval ri);

struct EsmFrameSpec {
  std::uint32_t n_phasors = 6;
  std::uint32_t n_analogs = 1;
  std::uint32_t n_digitals = 1;
  std::uint32_t samples_per_report = 50;
  std::uint32_t per_frame_overhead = 22;
  std::uint32_t transport_header = 48;  // UDP 8 + IPv6 40

  std::uint32_t frame_bytes() const {
    return per_frame_overhead + 8 * n_phasors + 4 * n_analogs + 2 * n_digitals;
  }
};

std::uint32_t esm_report_size(const EsmFrameSpec& spec);

/// One report per second with a one second deadline. Throws on size 0.
UseCaseProfile esm_profile(std::int64_t report_size);

struct DeviceSpec {
  std::uint32_t id = 0;
  DeviceClass device_class = DeviceClass::residential;
  std::uint32_t location = 0;  // SM location index the device sits at
  std::vector<UseCaseProfile> profiles;
};

struct DevicePopulation {
  std::vector<DeviceSpec> devices;
  std::uint32_t n_residential = 0;
  std::uint32_t n_ci = 0;
  std::uint32_t n_esm = 0;
  ReportingInterval ri = ReportingInterval::standard();
  std::uint32_t esm_report_size = 0;

  std::uint32_t n_sm() const { return n_residential + n_ci; }
};

inline constexpr double kResidentialShare = 0.9;

/// SMs first (residential, then commercial/industrial), eSMs appended at
/// randomly chosen SM locations. Each periodic profile gets a uniform phase.
DevicePopulation build_population(std::int64_t n_sm, double esm_penetration_pct,
                                  std::uint32_t esm_size, ReportingInterval ri,
                                  sim::RngStream& rng,
                                  double residential_share = kResidentialShare);

/// Next arrival strictly after `now`; sim::kNever for a zero-rate stream.
Seconds next_arrival(const UseCaseProfile& profile, sim::RngStream& rng, Seconds now);

/// Row of the daily-volume comparison table.
struct DailyVolumeRow {
  std::string use_case;
  std::string direction;
  double model_bytes = 0.0;                 // per meter per day
  std::optional<double> reference_bytes;        // reference figure, if any
  std::optional<double> relative_error;     // (model - reference) / reference
};

/// Reference uplink bytes/meter/day for each use case and reporting interval.
std::optional<double> reference_daily_uplink(UseCase u, ReportingInterval ri);
double reference_daily_uplink_total(ReportingInterval ri);

/// Generated uplink bytes per SM-class device over [0, days). eSMs count 0.
/// The serial path is the reference; the parallel path splits devices across
/// OpenMP threads and must return identical sums.
struct VolumeTally {
  std::vector<std::uint64_t> bytes_by_use_case = std::vector<std::uint64_t>(kUseCaseCount, 0);
  std::uint64_t meters = 0;
};
VolumeTally generate_volume_serial(const DevicePopulation& population, int days,
                                   std::uint64_t seed);
VolumeTally generate_volume_parallel(const DevicePopulation& population, int days,
                                     std::uint64_t seed, int threads = 0);

/// Arrival-only run of every SM stream for `days` days. Rows follow the
/// reference table order and end with the total.
std::vector<DailyVolumeRow> validate_daily_volume(const DevicePopulation& population,
                                                  int days, std::uint64_t seed,
                                                  int threads = 0);

std::string daily_volume_csv(std::span<const DailyVolumeRow> rows);

}  // namespace cellm2m::traffic
