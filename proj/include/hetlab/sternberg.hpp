#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace hetlab {

/// beta = k + 2 + floor(k e / c).
long long beta_of(double e, double c, int k);
/// alpha = beta + 2 + floor(beta c / e).
long long alpha_of(double e, double c, int k);

/// Multiplier form of the exponents: lambda_c = exp(-c), lambda_e = exp(e).
struct Multipliers {
  double lambda_c = 0.0;
  double lambda_e = 0.0;
};
Multipliers multipliers_of(double e, double c);

enum class ResonanceKind {
  ContractingRow,  // (nu1 - 1) c == nu2 e
  ExpandingRow,    // nu1 c == (nu2 - 1) e
  Unit,            // nu1 c == nu2 e
};

std::string to_string(ResonanceKind kind);

struct ResonanceViolation {
  int nu1 = 0;
  int nu2 = 0;
  ResonanceKind kind = ResonanceKind::Unit;
  double margin = 0.0;  // |lhs - rhs| / max(|lhs|, |rhs|)
};

struct SternbergReport {
  int node = 0;
  int r = 2;
  double e = 0.0;
  double c = 0.0;
  long long beta = 0;
  long long alpha = 0;
  std::vector<ResonanceViolation> violations;
  bool linearizable() const { return violations.empty(); }
};

/// Checks every (nu1, nu2) with 2 <= nu1 + nu2 <= alpha(e, c, r). Equality is
/// relative to rel_tol.
SternbergReport resonance_check(double e, double c, int r, int node = 0, double rel_tol = 1e-12);

nlohmann::json sternberg_to_json(const SternbergReport& rep);

}  // namespace hetlab
