#include "cellm2m/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace cellm2m {

ConfigError::ConfigError(std::string source, std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? fmt::format("{}:{}: {}", source, line, message)
                                  : fmt::format("{}: {}", source, message)),
      line_(line) {}

ModeSelection parse_mode(std::string_view text) {
  if (text == "arp+d") return ModeSelection::arp_plus_data;
  if (text == "d-only" || text == "d") return ModeSelection::data_only;
  if (text == "both") return ModeSelection::both;
  throw std::invalid_argument(fmt::format("unknown mode '{}' (arp+d, d-only, both)", text));
}

std::string_view to_string(ModeSelection m) {
  switch (m) {
    case ModeSelection::arp_plus_data: return "arp+d";
    case ModeSelection::data_only: return "d-only";
    case ModeSelection::both: return "both";
  }
  return "?";
}

bool Scenario::has_esm() const {
  return std::any_of(esm_penetration.begin(), esm_penetration.end(), [](double p) { return p > 0.0; });
}

sim::Seconds Scenario::effective_horizon() const {
  if (horizon) return *horizon;
  return has_esm() ? 600.0 : 7200.0;
}

sim::Seconds Scenario::effective_warmup() const {
  return warmup ? *warmup : 0.1 * effective_horizon();
}

metrics::Scope Scenario::effective_scope() const {
  switch (outage_scope) {
    case OutageScope::all: return metrics::Scope::all;
    case OutageScope::sm: return metrics::Scope::sm;
    case OutageScope::esm: return metrics::Scope::esm;
    case OutageScope::automatic: break;
  }
  return has_esm() ? metrics::Scope::esm : metrics::Scope::all;
}

SimulationSetup Scenario::setup(SimMode m) const {
  SimulationSetup s;
  s.technology = technology;
  s.gprs = gprs;
  s.lte = lte;
  s.mode = m;
  s.horizon = effective_horizon();
  s.warmup = effective_warmup();
  return s;
}

void Scenario::validate() const {
  auto fail = [this](const std::string& what) { throw ConfigError(name, 0, what); };
  if (n_sm.empty() || ri.empty() || esm_penetration.empty() || rs.empty()) fail("empty sweep list");
  for (auto n : n_sm) {
    if (n < 0) fail("n_sm must be non-negative");
  }
  for (auto p : esm_penetration) {
    if (!(p >= 0.0 && p <= 100.0)) fail("esm_penetration must lie in [0, 100]");
  }
  for (auto r : rs) {
    if (r == 0) fail("rs must be positive");
  }
  if (replications == 0) fail("replications must be positive");
  if (!(effective_horizon() > 0.0)) fail("horizon must be positive");
  if (!(effective_warmup() >= 0.0 && effective_warmup() < effective_horizon())) {
    fail("warmup must lie in [0, horizon)");
  }
  if (!(residential_fraction >= 0.0 && residential_fraction <= 1.0)) {
    fail("residential_fraction must lie in [0, 1]");
  }
  if (validation_days <= 0) fail("validation_days must be positive");
  try {
    if (technology == Technology::gprs) {
      gprs::gprs_cell(gprs);
    } else {
      lte::lte_cell(lte);
    }
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

struct Field {
  std::string_view text;
  std::size_t line;
  const std::string& source;

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(source, line, what); }

  template <typename T>
  T number(std::string_view s) const {
    T value{};
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end || s.empty()) fail(fmt::format("'{}' is not a number", s));
    return value;
  }
  template <typename T>
  T number() const { return number<T>(text); }

  double real(double lo, double hi, bool lo_open = false) const {
    const double v = number<double>();
    if (v < lo || v > hi || (lo_open && v == lo)) {
      fail(fmt::format("value {} out of range {}{}, {}]", v, lo_open ? "(" : "[", lo, hi));
    }
    return v;
  }
  double probability() const {
    const double v = number<double>();
    if (!(v >= 0.0 && v < 1.0)) fail(fmt::format("probability {} out of range [0, 1)", v));
    return v;
  }
  double positive() const { return real(0.0, 1e12, true); }
  std::uint32_t count(std::uint32_t lo = 1, std::uint32_t hi = 1u << 30) const {
    const auto v = number<std::int64_t>();
    if (v < lo || v > hi) fail(fmt::format("value {} out of range [{}, {}]", v, lo, hi));
    return static_cast<std::uint32_t>(v);
  }
  bool boolean() const {
    if (text == "true" || text == "yes" || text == "1" || text == "on") return true;
    if (text == "false" || text == "no" || text == "0" || text == "off") return false;
    fail(fmt::format("'{}' is not a boolean", text));
  }
};

using Setter = std::function<void(Scenario&, const Field&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    // scenario
    t["scenario.name"] = [](Scenario& s, const Field& f) { s.name = std::string(f.text); };
    t["scenario.technology"] = [](Scenario& s, const Field& f) {
      if (f.text == "gprs") s.technology = Technology::gprs;
      else if (f.text == "lte") s.technology = Technology::lte;
      else f.fail(fmt::format("unknown technology '{}' (gprs, lte)", f.text));
    };
    t["scenario.bandwidth"] = [](Scenario& s, const Field& f) {
      try {
        s.bandwidth = lte::parse_bandwidth(f.text);
      } catch (const std::invalid_argument& e) {
        f.fail(e.what());
      }
    };
    t["scenario.seed"] = [](Scenario& s, const Field& f) { s.seed = f.number<std::uint64_t>(); };
    t["scenario.replications"] = [](Scenario& s, const Field& f) { s.replications = f.count(1, 100000); };
    t["scenario.horizon"] = [](Scenario& s, const Field& f) { s.horizon = f.positive(); };
    t["scenario.warmup"] = [](Scenario& s, const Field& f) { s.warmup = f.real(0.0, 1e12); };
    t["scenario.mode"] = [](Scenario& s, const Field& f) {
      try {
        s.mode = parse_mode(f.text);
      } catch (const std::invalid_argument& e) {
        f.fail(e.what());
      }
    };
    t["scenario.d_only_model"] = [](Scenario& s, const Field& f) {
      if (f.text == "analytic" || f.text == "analytic-deficit") s.d_only_model = DOnlyModel::analytic;
      else if (f.text == "sim" || f.text == "sim-no-arp") s.d_only_model = DOnlyModel::simulated;
      else f.fail(fmt::format("unknown d_only_model '{}' (analytic, sim-no-arp)", f.text));
    };
    t["scenario.outage_scope"] = [](Scenario& s, const Field& f) {
      if (f.text == "auto") s.outage_scope = OutageScope::automatic;
      else if (f.text == "all") s.outage_scope = OutageScope::all;
      else if (f.text == "sm") s.outage_scope = OutageScope::sm;
      else if (f.text == "esm") s.outage_scope = OutageScope::esm;
      else f.fail(fmt::format("unknown outage_scope '{}' (auto, all, sm, esm)", f.text));
    };
    t["scenario.validate_traffic"] = [](Scenario& s, const Field& f) { s.validate_traffic = f.boolean(); };
    t["scenario.validation_days"] = [](Scenario& s, const Field& f) {
      s.validation_days = static_cast<int>(f.count(1, 3650));
    };
    // traffic
    t["traffic.n_sm"] = [](Scenario& s, const Field& f) {
      s.n_sm.clear();
      for (auto item : split_list(f.text)) {
        Field one{item, f.line, f.source};
        s.n_sm.push_back(one.count(0, 10'000'000));
      }
    };
    t["traffic.ri"] = [](Scenario& s, const Field& f) {
      s.ri.clear();
      for (auto item : split_list(f.text)) {
        try {
          s.ri.push_back(traffic::ReportingInterval::parse(item));
        } catch (const std::invalid_argument& e) {
          f.fail(e.what());
        }
      }
    };
    t["traffic.esm_penetration"] = [](Scenario& s, const Field& f) {
      s.esm_penetration.clear();
      for (auto item : split_list(f.text)) {
        Field one{item, f.line, f.source};
        s.esm_penetration.push_back(one.real(0.0, 100.0));
      }
    };
    t["traffic.rs"] = [](Scenario& s, const Field& f) {
      s.rs.clear();
      for (auto item : split_list(f.text)) {
        Field one{item, f.line, f.source};
        s.rs.push_back(one.count(1, 1u << 24));
      }
    };
    t["traffic.residential_fraction"] = [](Scenario& s, const Field& f) {
      s.residential_fraction = f.real(0.0, 1.0);
    };
    t["traffic.lte_background_sm"] = [](Scenario& s, const Field& f) { s.lte_background_sm = f.boolean(); };
    // error probabilities shared by both technologies
    t["channel.p_control_error"] = [](Scenario& s, const Field& f) {
      s.gprs.p_control_error = s.lte.p_control_error = f.probability();
    };
    t["channel.p_data_error"] = [](Scenario& s, const Field& f) {
      s.gprs.p_data_error = s.lte.p_data_error = f.probability();
    };
    // gprs
    t["gprs.rao_rate"] = [](Scenario& s, const Field& f) { s.gprs.rao_rate = f.positive(); };
    t["gprs.agch_rate"] = [](Scenario& s, const Field& f) { s.gprs.agch_rate = f.positive(); };
    t["gprs.n_pdch"] = [](Scenario& s, const Field& f) { s.gprs.n_pdch = f.count(1, 7); };
    t["gprs.usf_per_pdch"] = [](Scenario& s, const Field& f) { s.gprs.usf_per_pdch = f.count(1, 7); };
    t["gprs.per_pdch_rate"] = [](Scenario& s, const Field& f) { s.gprs.per_pdch_rate = f.positive(); };
    t["gprs.block_period"] = [](Scenario& s, const Field& f) { s.gprs.block_period = f.positive(); };
    t["gprs.p_control_error"] = [](Scenario& s, const Field& f) { s.gprs.p_control_error = f.probability(); };
    t["gprs.p_data_error"] = [](Scenario& s, const Field& f) { s.gprs.p_data_error = f.probability(); };
    t["gprs.max_retransmissions"] = [](Scenario& s, const Field& f) {
      s.gprs.max_retransmissions = f.count(0, 1000);
    };
    t["gprs.backoff_window"] = [](Scenario& s, const Field& f) { s.gprs.backoff_window = f.real(0.0, 1e6); };
    t["gprs.grant_timeout"] = [](Scenario& s, const Field& f) { s.gprs.grant_timeout = f.positive(); };
    t["gprs.grant_queue_capacity"] = [](Scenario& s, const Field& f) {
      s.gprs.grant_queue_capacity = f.count(1, 1u << 20);
    };
    // lte
    t["lte.prach_period"] = [](Scenario& s, const Field& f) { s.lte.prach_period = f.positive(); };
    t["lte.n_preambles"] = [](Scenario& s, const Field& f) { s.lte.n_preambles = f.count(1, 64); };
    t["lte.rar_grant_budget"] = [](Scenario& s, const Field& f) { s.lte.rar_grant_budget = f.positive(); };
    t["lte.p_control_error"] = [](Scenario& s, const Field& f) { s.lte.p_control_error = f.probability(); };
    t["lte.p_data_error"] = [](Scenario& s, const Field& f) { s.lte.p_data_error = f.probability(); };
    t["lte.max_retransmissions"] = [](Scenario& s, const Field& f) {
      s.lte.max_retransmissions = f.count(0, 1000);
    };
    t["lte.backoff_window"] = [](Scenario& s, const Field& f) { s.lte.backoff_window = f.real(0.0, 1e6); };
    t["lte.grant_timeout"] = [](Scenario& s, const Field& f) { s.lte.grant_timeout = f.positive(); };
    t["lte.rar_window"] = [](Scenario& s, const Field& f) { s.lte.rar_window = f.positive(); };
    t["lte.msg3_delay"] = [](Scenario& s, const Field& f) { s.lte.msg3_delay = f.positive(); };
    t["lte.msg4_delay"] = [](Scenario& s, const Field& f) { s.lte.msg4_delay = f.positive(); };
    t["lte.contention_resolution_timeout"] = [](Scenario& s, const Field& f) {
      s.lte.contention_resolution_timeout = f.positive();
    };
    t["lte.msg3_max_transmissions"] = [](Scenario& s, const Field& f) {
      s.lte.msg3_max_transmissions = f.count(1, 28);
    };
    t["lte.harq_rtt"] = [](Scenario& s, const Field& f) { s.lte.harq_rtt = f.positive(); };
    t["lte.identifier_limit"] = [](Scenario& s, const Field& f) { s.lte.identifier_limit = f.count(1, 65535); };
    return t;
  }();
  return table;
}

struct Entry {
  std::string key;  // section.key
  std::string value;
  std::size_t line;
};

// Keys written before any section header may come from these sections.
constexpr std::string_view kTopLevelSections[] = {"scenario", "traffic", "channel"};

}  // namespace

Scenario parse_config_text(std::string_view text, std::string_view source_view) {
  const std::string source(source_view);
  const auto& table = setters();
  std::vector<Entry> entries;
  std::map<std::string, std::size_t, std::less<>> seen;

  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source, line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const std::vector<std::string_view> known{"scenario", "traffic", "channel", "gprs", "lte"};
      if (std::find(known.begin(), known.end(), section) == known.end()) {
        throw ConfigError(source, line_no, fmt::format("unknown section [{}]", section));
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(source, line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source, line_no, "missing key");
    if (value.empty()) throw ConfigError(source, line_no, fmt::format("missing value for '{}'", key));

    std::string full;
    if (section.empty()) {
      for (auto s : kTopLevelSections) {
        auto candidate = fmt::format("{}.{}", s, key);
        if (table.contains(candidate)) {
          full = std::move(candidate);
          break;
        }
      }
    } else if (auto candidate = fmt::format("{}.{}", section, key); table.contains(candidate)) {
      full = std::move(candidate);
    }
    if (full.empty()) {
      throw ConfigError(source, line_no,
                        section.empty() ? fmt::format("unknown key '{}'", key)
                                        : fmt::format("unknown key '{}' in [{}]", key, section));
    }
    if (auto [it, fresh] = seen.emplace(full, line_no); !fresh) {
      throw ConfigError(source, line_no,
                        fmt::format("duplicate key '{}' (first set on line {})", key, it->second));
    }
    entries.push_back(Entry{std::move(full), std::string(value), line_no});
  }

  Scenario s;
  // Bandwidth fixes the LTE resource grid before any explicit LTE override.
  for (const auto& e : entries) {
    if (e.key == "scenario.bandwidth") table.find(e.key)->second(s, Field{e.value, e.line, source});
  }
  s.lte = lte::lte_config(s.bandwidth);
  for (const auto& e : entries) {
    if (e.key == "scenario.bandwidth") continue;
    table.find(e.key)->second(s, Field{e.value, e.line, source});
  }
  if (s.name == "scenario" && source != "<string>") {
    s.name = std::filesystem::path(source).stem().string();
  }
  s.validate();
  return s;
}

Scenario parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

}  // namespace cellm2m
