#include "cellm2m/access.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cellm2m::access {

std::uint32_t CellModel::grants_per_slot() const {
  return static_cast<std::uint32_t>(std::floor(grant_budget * grant_slot + 1e-9));
}

void CellModel::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid cell model: " + what); };
  if (!(rao_slot_spacing > 0.0)) fail("RAO slot spacing must be positive");
  if (opportunities_per_slot == 0) fail("need at least one opportunity per slot");
  if (!(grant_budget > 0.0)) fail("grant budget must be positive");
  if (!(grant_slot > 0.0) || grants_per_slot() == 0) fail("grant slot must carry at least one grant");
  if (identifier_limit == 0) fail("identifier limit must be positive");
  if (!(p_control_error >= 0.0 && p_control_error < 1.0)) fail("p_control_error outside [0, 1)");
  if (!(p_data_error >= 0.0 && p_data_error < 1.0)) fail("p_data_error outside [0, 1)");
  if (!(backoff_window >= 0.0)) fail("negative backoff window");
  if (!(grant_timeout > 0.0)) fail("grant timeout must be positive");
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::pending: return "pending";
    case Outcome::delivered: return "delivered";
    case Outcome::failed_max_retries: return "failed-max-retries";
    case Outcome::failed_deadline: return "failed-deadline";
  }
  return "?";
}

void Report::mark_delivered(Seconds at) {
  if (terminal()) throw std::logic_error("report already terminal");
  if (at > deadline_at) throw std::logic_error("delivery after deadline");
  outcome = Outcome::delivered;
  delivered_at = at;
}

void Report::mark_failed(Outcome why) {
  if (terminal()) throw std::logic_error("report already terminal");
  if (why != Outcome::failed_deadline && why != Outcome::failed_max_retries) {
    throw std::logic_error("not a failure outcome");
  }
  outcome = why;
}

std::uint32_t choose_opportunity(const CellModel& cell, sim::RngStream& rng) {
  return rng.uniform_index(cell.opportunities_per_slot);
}

std::vector<ContentionResult> contend(const CellModel& cell, std::span<const std::uint32_t> chosen,
                                      sim::RngStream& rng) {
  std::vector<std::uint32_t> load(cell.opportunities_per_slot, 0);
  for (auto o : chosen) {
    if (o >= cell.opportunities_per_slot) throw std::out_of_range("opportunity index out of range");
    ++load[o];
  }
  std::vector<ContentionResult> out;
  out.reserve(chosen.size());
  for (auto o : chosen) {
    if (load[o] > 1) {
      out.push_back(ContentionResult::collision);
    } else {
      out.push_back(rng.bernoulli(cell.p_control_error) ? ContentionResult::control_error
                                                        : ContentionResult::singleton_success);
    }
  }
  return out;
}

std::vector<GrantRequest> issue_grants(const CellModel& cell, std::deque<GrantRequest>& queue,
                                       Seconds window, std::size_t active_transfers,
                                       const std::function<bool(const GrantRequest&)>& is_live) {
  const auto budget = static_cast<std::size_t>(std::floor(cell.grant_budget * window + 1e-9));
  std::vector<GrantRequest> granted;
  while (!queue.empty() && granted.size() < budget &&
         active_transfers + granted.size() < cell.identifier_limit) {
    const GrantRequest req = queue.front();
    queue.pop_front();
    if (is_live && !is_live(req)) continue;
    granted.push_back(req);
  }
  return granted;
}

std::optional<Seconds> backoff_delay(const CellModel& cell, AccessAttempt& attempt,
                                     sim::RngStream& rng) {
  if (attempt.retries_used >= cell.max_retransmissions) {
    attempt.state = AttemptState::done;
    if (!attempt.report.terminal()) attempt.report.mark_failed(Outcome::failed_max_retries);
    return std::nullopt;
  }
  ++attempt.retries_used;
  attempt.state = AttemptState::backlogged;
  return rng.uniform(0.0, cell.backoff_window);
}

std::vector<std::size_t> expire_deadlines(std::span<Report> reports, Seconds now) {
  std::vector<std::size_t> expired;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    auto& r = reports[i];
    if (!r.terminal() && r.deadline_at <= now) {
      r.mark_failed(Outcome::failed_deadline);
      expired.push_back(i);
    }
  }
  return expired;
}

}  // namespace cellm2m::access
