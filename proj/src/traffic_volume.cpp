// Arrival-only volume generation. The per-device loop is the hot kernel of
// traffic validation; devices are independent, so the parallel path simply
// splits them across threads and reduces integer byte counts.
#include <omp.h>

#include "cellm2m/traffic.hpp"

namespace cellm2m::traffic {

namespace {

constexpr std::uint64_t kVolumeStreamBase = 1'000'000;

void accumulate_device(const DeviceSpec& device, Seconds horizon, std::uint64_t seed,
                       std::uint64_t* bytes_by_use_case) {
  auto rng = sim::derive_stream(seed, kVolumeStreamBase + device.id);
  for (const auto& profile : device.profiles) {
    std::uint64_t count = 0;
    if (profile.arrival.kind == ArrivalProcess::Kind::periodic) {
      // The first arrival of a periodic stream is its phase offset itself.
      for (Seconds t = profile.arrival.phase_offset; t < horizon; t += profile.arrival.period) ++count;
    } else {
      for (Seconds t = next_arrival(profile, rng, 0.0); t < horizon; t = next_arrival(profile, rng, t)) ++count;
    }
    bytes_by_use_case[static_cast<std::size_t>(profile.use_case)] += count * profile.message_size;
  }
}

}  // namespace

VolumeTally generate_volume_serial(const DevicePopulation& population, int days,
                                   std::uint64_t seed) {
  VolumeTally tally;
  const Seconds horizon = days * kSecondsPerDay;
  for (const auto& device : population.devices) {
    if (device.device_class == DeviceClass::esm) continue;
    ++tally.meters;
    accumulate_device(device, horizon, seed, tally.bytes_by_use_case.data());
  }
  return tally;
}

VolumeTally generate_volume_parallel(const DevicePopulation& population, int days,
                                     std::uint64_t seed, int threads) {
  VolumeTally tally;
  const Seconds horizon = days * kSecondsPerDay;
  const auto n = static_cast<std::int64_t>(population.devices.size());
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
  std::vector<VolumeTally> partial(static_cast<std::size_t>(nthreads));

#pragma omp parallel for num_threads(nthreads) schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& device = population.devices[static_cast<std::size_t>(i)];
    if (device.device_class == DeviceClass::esm) continue;
    auto& local = partial[static_cast<std::size_t>(omp_get_thread_num())];
    ++local.meters;
    accumulate_device(device, horizon, seed, local.bytes_by_use_case.data());
  }

  for (const auto& p : partial) {
    tally.meters += p.meters;
    for (std::size_t u = 0; u < kUseCaseCount; ++u) tally.bytes_by_use_case[u] += p.bytes_by_use_case[u];
  }
  return tally;
}

}  // namespace cellm2m::traffic
