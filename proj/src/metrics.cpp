#include "cellm2m/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace cellm2m::metrics {

using traffic::DeviceClass;
using traffic::UseCase;

OutcomeCounts& OutcomeCounts::operator+=(const OutcomeCounts& o) {
  total += o.total;
  delivered += o.delivered;
  failed_deadline += o.failed_deadline;
  failed_retries += o.failed_retries;
  return *this;
}

void OutcomeTally::add(const access::Report& report) {
  if (report.created_at < warmup_ || report.created_at >= horizon_) return;
  if (!report.terminal()) throw std::logic_error("tallying a pending report");
  auto& c = cells_[static_cast<std::size_t>(report.device_class)]
                  [static_cast<std::size_t>(report.use_case)];
  ++c.total;
  switch (report.outcome) {
    case access::Outcome::delivered: ++c.delivered; break;
    case access::Outcome::failed_deadline: ++c.failed_deadline; break;
    case access::Outcome::failed_max_retries: ++c.failed_retries; break;
    case access::Outcome::pending: break;
  }
}

OutcomeCounts OutcomeTally::counts(Scope scope) const {
  OutcomeCounts sum;
  for (std::size_t d = 0; d < traffic::kDeviceClassCount; ++d) {
    const bool esm = static_cast<DeviceClass>(d) == DeviceClass::esm;
    if ((scope == Scope::sm && esm) || (scope == Scope::esm && !esm)) continue;
    for (const auto& c : cells_[d]) sum += c;
  }
  return sum;
}

OutcomeCounts OutcomeTally::counts(UseCase use_case) const {
  OutcomeCounts sum;
  for (const auto& row : cells_) sum += row[static_cast<std::size_t>(use_case)];
  return sum;
}

OutcomeCounts OutcomeTally::counts(DeviceClass c, UseCase use_case) const {
  return cells_[static_cast<std::size_t>(c)][static_cast<std::size_t>(use_case)];
}

OutcomeTally& OutcomeTally::operator+=(const OutcomeTally& other) {
  for (std::size_t d = 0; d < cells_.size(); ++d) {
    for (std::size_t u = 0; u < cells_[d].size(); ++u) cells_[d][u] += other.cells_[d][u];
  }
  return *this;
}

std::optional<double> outage_fraction(const OutcomeCounts& counts) {
  if (counts.total == 0) return std::nullopt;
  return static_cast<double>(counts.failed()) / static_cast<double>(counts.total);
}

std::optional<OutageEstimate> outage(std::span<const access::Report> outcomes, Seconds warmup,
                                     Seconds horizon) {
  if (!(horizon > warmup)) throw std::invalid_argument("horizon must exceed warmup");
  OutcomeTally tally(warmup, horizon);
  for (const auto& r : outcomes) tally.add(r);
  const auto counts = tally.counts(Scope::all);
  const auto fraction = outage_fraction(counts);
  if (!fraction) return std::nullopt;
  OutageEstimate e;
  e.mean = *fraction;
  e.n_reports = counts.total;
  e.n_replications = 1;
  return e;
}

OutageEstimate aggregate(std::span<const double> replication_outages, std::uint64_t n_reports) {
  OutageEstimate e;
  e.n_replications = replication_outages.size();
  e.n_reports = n_reports;
  if (replication_outages.empty()) return e;
  double sum = 0.0;
  for (double x : replication_outages) sum += x;
  const double n = static_cast<double>(replication_outages.size());
  e.mean = sum / n;
  if (replication_outages.size() >= 2) {
    double ss = 0.0;
    for (double x : replication_outages) ss += (x - e.mean) * (x - e.mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    e.ci95_halfwidth = 1.96 * sd / std::sqrt(n);
  }
  return e;
}

std::optional<double> pooled_outage(std::span<const OutcomeCounts> replications) {
  OutcomeCounts sum;
  for (const auto& c : replications) sum += c;
  return outage_fraction(sum);
}

namespace {

std::vector<UseCaseReliability> reliability_from(const OutcomeTally& tally) {
  std::vector<UseCaseReliability> out;
  for (std::size_t u = 0; u < traffic::kUseCaseCount; ++u) {
    const auto use_case = static_cast<UseCase>(u);
    const auto c = tally.counts(use_case);
    if (c.total == 0) continue;
    UseCaseReliability r;
    r.use_case = use_case;
    r.delivered = c.delivered;
    r.total = c.total;
    r.ratio = static_cast<double>(c.delivered) / static_cast<double>(c.total);
    r.target = traffic::reliability_target(use_case);
    r.pass = r.ratio >= r.target;
    out.push_back(r);
  }
  return out;
}

}  // namespace

std::vector<UseCaseReliability> reliability_by_usecase(std::span<const access::Report> outcomes) {
  OutcomeTally tally;
  for (const auto& r : outcomes) tally.add(r);
  return reliability_from(tally);
}

std::vector<UseCaseReliability> reliability_by_usecase(const OutcomeTally& tally) {
  return reliability_from(tally);
}

}  // namespace cellm2m::metrics
