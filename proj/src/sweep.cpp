#include "cellm2m/sweep.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <sstream>

#include <fmt/format.h>
#include <omp.h>

namespace cellm2m {

namespace {

constexpr std::uint64_t kPopulationStream = 3;

struct Task {
  std::size_t point;
  SimMode mode;
  std::uint32_t replication;
};

std::vector<SimMode> selected_modes(const Scenario& s) {
  switch (s.mode) {
    case ModeSelection::arp_plus_data: return {SimMode::arp_plus_data};
    case ModeSelection::data_only: return {SimMode::data_only};
    case ModeSelection::both: return {SimMode::arp_plus_data, SimMode::data_only};
  }
  return {};
}

std::vector<Task> make_tasks(const Scenario& s, std::size_t n_points) {
  std::vector<Task> tasks;
  const auto modes = selected_modes(s);
  for (std::size_t p = 0; p < n_points; ++p) {
    for (auto m : modes) {
      for (std::uint32_t r = 0; r < s.replications; ++r) tasks.push_back(Task{p, m, r});
    }
  }
  return tasks;
}

double raw_capacity(const Scenario& s) {
  return s.technology == Technology::gprs ? gprs::gprs_cell(s.gprs).data_capacity
                                          : lte::lte_cell(s.lte).data_capacity;
}

void summarize(const Scenario& s, SweepResult& result) {
  const auto modes = selected_modes(s);
  std::size_t row = 0;
  for (std::size_t p = 0; p < result.points.size(); ++p) {
    for (auto m : modes) {
      PointSummary summary{p, m, std::nullopt};
      std::vector<double> outages;
      std::uint64_t reports = 0;
      for (std::uint32_t r = 0; r < s.replications; ++r, ++row) {
        const auto& rr = result.rows[row];
        if (rr.outage) outages.push_back(*rr.outage);
        reports += rr.counts.total;
      }
      if (!outages.empty()) summary.estimate = metrics::aggregate(outages, reports);
      result.summaries.push_back(summary);
    }
  }
}

SweepResult run_tasks(const Scenario& scenario, int threads) {
  scenario.validate();
  SweepResult result;
  result.points = sweep_points(scenario);
  const auto tasks = make_tasks(scenario, result.points.size());
  result.rows.resize(tasks.size());

  if (threads <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const auto& t = tasks[i];
      result.rows[i] = run_replication(scenario, result.points[t.point], t.mode, t.replication);
    }
  } else {
    std::exception_ptr error;
    const auto n = static_cast<std::int64_t>(tasks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        const auto& t = tasks[static_cast<std::size_t>(i)];
        result.rows[static_cast<std::size_t>(i)] =
            run_replication(scenario, result.points[t.point], t.mode, t.replication);
      } catch (...) {
#pragma omp critical(cellm2m_sweep_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  }
  summarize(scenario, result);
  return result;
}

std::string fixed(std::optional<double> v) {
  return v ? fmt::format("{:.6f}", *v) : std::string();
}

}  // namespace

const PointSummary* SweepResult::summary(std::size_t point, SimMode mode) const {
  for (const auto& s : summaries) {
    if (s.point == point && s.mode == mode) return &s;
  }
  return nullptr;
}

std::vector<SweepPoint> sweep_points(const Scenario& s) {
  std::vector<SweepPoint> points;
  for (auto n : s.n_sm) {
    for (auto ri : s.ri) {
      for (auto pen : s.esm_penetration) {
        for (auto rs : s.rs) {
          points.push_back(SweepPoint{points.size(), n, ri, pen, rs});
        }
      }
    }
  }
  return points;
}

int worker_count(int requested) {
  int n = requested > 0 ? requested : omp_get_num_procs();
  if (const char* cap = std::getenv("CELLM2M_THREADS"); cap && *cap) {
    const int limit = std::atoi(cap);
    if (limit > 0) n = std::min(n, limit);
  }
  return std::max(n, 1);
}

traffic::DevicePopulation scenario_population(const Scenario& s, const SweepPoint& point,
                                              std::uint64_t seed) {
  sim::RngStream rng(seed, kPopulationStream);
  auto pop = traffic::build_population(point.n_sm, point.esm_penetration, point.rs, point.ri, rng,
                                       s.residential_fraction);
  if (s.technology == Technology::lte && !s.lte_background_sm) {
    std::erase_if(pop.devices, [](const traffic::DeviceSpec& d) {
      return d.device_class != traffic::DeviceClass::esm;
    });
  }
  return pop;
}

ReplicationRow run_replication(const Scenario& s, const SweepPoint& point, SimMode mode,
                               std::uint32_t replication) {
  ReplicationRow row;
  row.point = point.index;
  row.mode = mode;
  row.replication = replication;
  row.seed = s.seed + replication;

  const auto pop = scenario_population(s, point, row.seed);
  if (mode == SimMode::data_only && s.d_only_model == DOnlyModel::analytic) {
    row.analytic = true;
    row.outage = capacity::d_only_outage({capacity::offered_load(pop), raw_capacity(s)});
    return row;
  }
  const auto result = run_simulation(s.setup(mode), pop, row.seed);
  row.counts = result.tally.counts(s.effective_scope());
  row.outage = metrics::outage_fraction(row.counts);
  row.trace_digest = result.trace_digest;
  return row;
}

SweepResult run_sweep_serial(const Scenario& scenario) { return run_tasks(scenario, 1); }

SweepResult run_sweep_parallel(const Scenario& scenario, int threads) {
  return run_tasks(scenario, std::max(2, worker_count(threads)));
}

SweepResult run_sweep(const Scenario& scenario, int threads) {
  return run_tasks(scenario, worker_count(threads));
}

double cell_bandwidth_hz(const Scenario& s) {
  return s.technology == Technology::gprs ? 200e3 : lte::bandwidth_hz(s.bandwidth);
}

std::string results_csv(const Scenario& s, const SweepResult& result) {
  std::string out =
      "scenario_id,technology,bandwidth_hz,n_sm,ri_s,esm_penetration_pct,rs_bytes,mode,replication,"
      "seed,outage,ci95,reports_total,reports_failed_deadline,reports_failed_retries\n";
  const auto bw = cell_bandwidth_hz(s);
  for (const auto& row : result.rows) {
    const auto& p = result.points[row.point];
    const auto* summary = result.summary(row.point, row.mode);
    std::optional<double> ci;
    if (summary && summary->estimate) ci = summary->estimate->ci95_halfwidth;
    const auto counts =
        row.analytic ? std::string(",,")
                     : fmt::format("{},{},{}", row.counts.total, row.counts.failed_deadline,
                                   row.counts.failed_retries);
    out += fmt::format("{}-{:03},{},{:.0f},{},{},{:g},{},{},{},{},{},{},{}\n", s.name, p.index,
                       to_string(s.technology), bw, p.n_sm, p.ri.label(), p.esm_penetration, p.rs,
                       row.mode == SimMode::arp_plus_data ? "ARP+D" : "D", row.replication, row.seed,
                       fixed(row.outage), fixed(ci), counts);
  }
  return out;
}

std::string traffic_validation_csv(const Scenario& s, int threads) {
  std::string out =
      "ri_s,use_case,direction,bytes_per_meter_per_day_model,bytes_per_meter_per_day_paper,"
      "relative_error\n";
  for (auto ri : s.ri) {
    sim::RngStream rng(s.seed, kPopulationStream);
    const auto pop = traffic::build_population(s.n_sm.front(), 0.0, s.rs.front(), ri, rng,
                                               s.residential_fraction);
    const auto rows = traffic::validate_daily_volume(pop, s.validation_days, s.seed, worker_count(threads));
    std::istringstream body(traffic::daily_volume_csv(rows));
    std::string line;
    std::getline(body, line);  // header
    while (std::getline(body, line)) out += fmt::format("{},{}\n", ri.label(), line);
  }
  return out;
}

std::string capacity_csv(const Scenario& s) {
  std::string out =
      "scenario_id,technology,bandwidth_hz,n_sm,ri_s,esm_penetration_pct,rs_bytes,offered_load_Bps,"
      "capacity_Bps,d_only_outage\n";
  const double cap = raw_capacity(s);
  for (const auto& p : sweep_points(s)) {
    const auto pop = scenario_population(s, p, s.seed);
    const double load = capacity::offered_load(pop);
    out += fmt::format("{}-{:03},{},{:.0f},{},{},{:g},{},{:.3f},{:.3f},{:.6f}\n", s.name, p.index,
                       to_string(s.technology), cell_bandwidth_hz(s), p.n_sm, p.ri.label(),
                       p.esm_penetration, p.rs, load, cap, capacity::d_only_outage({load, cap}));
  }
  return out;
}

}  // namespace cellm2m
