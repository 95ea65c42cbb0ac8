// Scenario files: "# comment", "[section]" and "key = value" lines, lists
// separated by commas. Every key has a default, so a file holding only
// "technology = gprs" is a complete scenario.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cellm2m/cell_simulator.hpp"
#include "cellm2m/metrics.hpp"

namespace cellm2m {

/// Parse or validation failure; line is 0 when the problem is not tied to one line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string source, std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

enum class ModeSelection : std::uint8_t { arp_plus_data, data_only, both };
enum class DOnlyModel : std::uint8_t { analytic, simulated };
enum class OutageScope : std::uint8_t { automatic, all, sm, esm };

ModeSelection parse_mode(std::string_view text);
std::string_view to_string(ModeSelection m);

struct Scenario {
  std::string name = "scenario";
  Technology technology = Technology::gprs;
  lte::Bandwidth bandwidth = lte::Bandwidth::mhz1_4;
  std::vector<std::int64_t> n_sm{4500};
  std::vector<traffic::ReportingInterval> ri{traffic::ReportingInterval::standard()};
  std::vector<double> esm_penetration{0.0};
  std::vector<std::uint32_t> rs{3848};
  std::uint64_t seed = 1;
  std::uint32_t replications = 10;
  std::optional<sim::Seconds> horizon;  // default depends on the sweep, see effective_horizon
  std::optional<sim::Seconds> warmup;   // default 10% of the horizon
  ModeSelection mode = ModeSelection::arp_plus_data;
  DOnlyModel d_only_model = DOnlyModel::analytic;
  OutageScope outage_scope = OutageScope::automatic;
  bool lte_background_sm = true;
  double residential_fraction = traffic::kResidentialShare;
  bool validate_traffic = false;
  int validation_days = 30;
  gprs::GprsConfig gprs;
  lte::LteConfig lte = lte::lte_config(lte::Bandwidth::mhz1_4);

  /// True when any sweep point carries eSMs.
  bool has_esm() const;
  /// 600 s when the sweep carries eSMs, two hours otherwise.
  sim::Seconds effective_horizon() const;
  sim::Seconds effective_warmup() const;
  metrics::Scope effective_scope() const;
  SimulationSetup setup(SimMode mode) const;
  /// Throws ConfigError on the first out-of-range field.
  void validate() const;
};

Scenario parse_config_text(std::string_view text, std::string_view source = "<string>");
/// Throws ConfigError for a missing file too.
Scenario parse_config(const std::filesystem::path& path);

}  // namespace cellm2m
