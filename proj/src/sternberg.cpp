#include "hetlab/sternberg.hpp"

#include <algorithm>
#include <cmath>

#include "hetlab/common.hpp"

namespace hetlab {

namespace {

void check_args(double e, double c, int k) {
  if (!(e > 0.0) || !(c > 0.0)) throw InputError("Sternberg exponents must be positive");
  if (k < 2) throw InputError("smoothness order must be >= 2");
}

long long floor_ll(double x) { return static_cast<long long>(std::floor(x)); }

bool nearly_equal(double a, double b, double tol, double& margin) {
  const double scale = std::max(std::abs(a), std::abs(b));
  margin = scale > 0.0 ? std::abs(a - b) / scale : 0.0;
  return margin <= tol;
}

}  // namespace

long long beta_of(double e, double c, int k) {
  check_args(e, c, k);
  return k + 2 + floor_ll(k * e / c);
}

long long alpha_of(double e, double c, int k) {
  const long long beta = beta_of(e, c, k);
  return beta + 2 + floor_ll(static_cast<double>(beta) * c / e);
}

Multipliers multipliers_of(double e, double c) { return {std::exp(-c), std::exp(e)}; }

std::string to_string(ResonanceKind kind) {
  switch (kind) {
    case ResonanceKind::ContractingRow: return "(nu1-1)c=nu2e";
    case ResonanceKind::ExpandingRow: return "nu1c=(nu2-1)e";
    case ResonanceKind::Unit: return "nu1c=nu2e";
  }
  return "?";
}

SternbergReport resonance_check(double e, double c, int r, int node, double rel_tol) {
  SternbergReport rep;
  rep.node = node;
  rep.r = r;
  rep.e = e;
  rep.c = c;
  rep.beta = beta_of(e, c, r);
  rep.alpha = alpha_of(e, c, r);
  for (long long total = 2; total <= rep.alpha; ++total) {
    for (long long n1 = 0; n1 <= total; ++n1) {
      const long long n2 = total - n1;
      const double a = static_cast<double>(n1);
      const double b = static_cast<double>(n2);
      const struct {
        double lhs, rhs;
        ResonanceKind kind;
      } conds[] = {
          {(a - 1.0) * c, b * e, ResonanceKind::ContractingRow},
          {a * c, (b - 1.0) * e, ResonanceKind::ExpandingRow},
          {a * c, b * e, ResonanceKind::Unit},
      };
      for (const auto& cond : conds) {
        double margin = 0.0;
        if (nearly_equal(cond.lhs, cond.rhs, rel_tol, margin))
          rep.violations.push_back({static_cast<int>(n1), static_cast<int>(n2), cond.kind, margin});
      }
    }
  }
  return rep;
}

nlohmann::json sternberg_to_json(const SternbergReport& rep) {
  nlohmann::json v = nlohmann::json::array();
  for (const auto& x : rep.violations)
    v.push_back({{"nu1", x.nu1}, {"nu2", x.nu2}, {"condition", to_string(x.kind)}, {"margin", x.margin}});
  const auto m = multipliers_of(rep.e, rep.c);
  return {{"node", rep.node + 1},
          {"r", rep.r},
          {"e", rep.e},
          {"c", rep.c},
          {"lambda_c", m.lambda_c},
          {"lambda_e", m.lambda_e},
          {"beta", rep.beta},
          {"alpha", rep.alpha},
          {"violations", v},
          {"verdict", rep.linearizable() ? "linearizable" : "resonant"}};
}

}  // namespace hetlab
