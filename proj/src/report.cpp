#include "curvkit/report.hpp"

#include <algorithm>
#include <cmath>

namespace curvkit {

std::string to_string(PreconditionStatus s) {
  switch (s) {
    case PreconditionStatus::exact: return "exact";
    case PreconditionStatus::heuristic: return "heuristic";
    case PreconditionStatus::unmet: return "unmet";
  }
  return "unmet";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::violated: return "violated";
    case Verdict::not_applicable: return "not_applicable";
  }
  return "not_applicable";
}

bool InequalityReport::preconditions_exact() const {
  return std::all_of(preconditions.begin(), preconditions.end(),
                     [](const Precondition& p) { return p.status == PreconditionStatus::exact; });
}

double InequalityReport::value(const std::string& key) const {
  for (const auto& [k, v] : values)
    if (k == key) return v;
  return std::nan("");
}

void finalize(InequalityReport& rep, double tol) {
  const bool unmet = std::any_of(rep.preconditions.begin(), rep.preconditions.end(),
                                 [](const Precondition& p) {
                                   return p.status == PreconditionStatus::unmet;
                                 });
  if (unmet) {
    rep.verdict = Verdict::not_applicable;
    return;
  }
  rep.verdict = rep.worst_residual >= -tol ? Verdict::holds : Verdict::violated;
}

double normalized_slack(double lhs, double rhs, double scale) {
  const double slack = rhs - lhs;
  if (scale <= 0.0) return slack == 0.0 ? 0.0 : slack;
  return slack / scale;
}

}  // namespace curvkit
