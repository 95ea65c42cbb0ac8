// cellm2m: run outage sweeps, validate traffic volumes, print capacity tables.
//
//   cellm2m run --config gprs_ri.cfg --out results/ [--seed N] [--replications N]
//               [--mode arp+d|d-only|both] [--threads N]
//   cellm2m validate-traffic --config gprs_ri.cfg --out results/
//   cellm2m capacity --config lte_esm.cfg [--out results/]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cellm2m/scenario.hpp"
#include "cellm2m/sweep.hpp"

namespace fs = std::filesystem;
using namespace cellm2m;

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

void write_file(const fs::path& dir, const std::string& name, const std::string& body) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << body;
  if (!out.flush()) throw std::runtime_error(fmt::format("write to {} failed", path.string()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GPRS/LTE cell simulator for smart-meter traffic"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> replications;
  std::string mode;
  int threads = 0;

  auto* run = app.add_subcommand("run", "simulate every sweep point and write results.csv");
  run->add_option("--config", config_path, "scenario file")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--seed", seed, "base seed (replication r uses seed + r)");
  run->add_option("--replications", replications, "replications per sweep point");
  run->add_option("--mode", mode, "arp+d, d-only or both")
      ->check(CLI::IsMember({"arp+d", "d-only", "both"}));
  run->add_option("--threads", threads, "worker threads (0 = all cores)");

  auto* validate = app.add_subcommand("validate-traffic", "write traffic_validation.csv");
  validate->add_option("--config", config_path, "scenario file")->required();
  validate->add_option("--out", out_dir, "output directory")->required();
  validate->add_option("--threads", threads, "worker threads (0 = all cores)");

  auto* capacity = app.add_subcommand("capacity", "offered load against raw data capacity");
  capacity->add_option("--config", config_path, "scenario file")->required();
  capacity->add_option("--out", out_dir, "write capacity.csv here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  Scenario scenario;
  try {
    scenario = parse_config(config_path);
    if (seed) scenario.seed = *seed;
    if (replications) scenario.replications = *replications;
    if (!mode.empty()) scenario.mode = parse_mode(mode);
    scenario.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (run->parsed()) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto result = run_sweep(scenario, threads);
      write_file(out_dir, "results.csv", results_csv(scenario, result));
      if (scenario.validate_traffic) {
        write_file(out_dir, "traffic_validation.csv", traffic_validation_csv(scenario, threads));
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::cerr << fmt::format("{}: {} points, {} rows in {:.1f} s on {} threads\n", scenario.name,
                               result.points.size(), result.rows.size(), secs, worker_count(threads));
    } else if (validate->parsed()) {
      write_file(out_dir, "traffic_validation.csv", traffic_validation_csv(scenario, threads));
    } else if (capacity->parsed()) {
      const auto table = capacity_csv(scenario);
      if (out_dir.empty()) {
        std::cout << table;
      } else {
        write_file(out_dir, "capacity.csv", table);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
