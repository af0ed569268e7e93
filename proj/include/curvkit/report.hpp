#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "curvkit/chain.hpp"

namespace curvkit {

enum class PreconditionStatus { exact, heuristic, unmet };
enum class Verdict { holds, violated, not_applicable };

std::string to_string(PreconditionStatus s);
std::string to_string(Verdict v);

struct Precondition {
  std::string name;
  PreconditionStatus status = PreconditionStatus::exact;
  std::string detail;
};

// A sampled (rho, f, t) at which an inequality was evaluated.
struct Witness {
  Vector rho;
  Vector f;
  double t = 0.0;
};

// Outcome of checking one inequality, written as lhs <relation> rhs. slack is
// oriented so that it is nonnegative when the inequality holds; residual is
// slack divided by the sum of magnitudes of the terms involved.
struct InequalityReport {
  std::string name;
  std::string relation = "<=";
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double worst_residual = 0.0;
  int trials = 1;
  Verdict verdict = Verdict::holds;
  std::vector<Precondition> preconditions;
  std::optional<Witness> witness;
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::string> notes;

  bool holds() const { return verdict == Verdict::holds; }
  bool violated() const { return verdict == Verdict::violated; }
  // True when no precondition is merely heuristic or unmet.
  bool preconditions_exact() const;
  double value(const std::string& key) const;
};

// Sets verdict from preconditions and worst_residual.
void finalize(InequalityReport& rep, double tol = 1e-9);

// Normalised slack: (rhs - lhs) / scale, or 0 when everything vanishes.
double normalized_slack(double lhs, double rhs, double scale);

}  // namespace curvkit
