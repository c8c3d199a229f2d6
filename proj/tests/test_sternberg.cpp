#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <tuple>

#include "doctest.h"

#include <hetlab/sternberg.hpp>

using namespace hetlab;

namespace {

// Smallest j with (r+1)c + r e - j c < 0 for every r <= k.
long long brute_beta(double e, double c, int k) {
  for (long long j = 1;; ++j) {
    bool all = true;
    for (int r = 0; r <= k && all; ++r) all = (r + 1) * c + r * e - static_cast<double>(j) * c < 0.0;
    if (all) return j;
  }
}

// Smallest j with r c + r e - (j-1) e < 0 for every r <= beta.
long long brute_alpha(double e, double c, int k) {
  const long long beta = brute_beta(e, c, k);
  for (long long j = 1;; ++j) {
    bool all = true;
    for (long long r = 0; r <= beta && all; ++r) all = r * c + r * e - static_cast<double>(j - 1) * e < 0.0;
    if (all) return j;
  }
}

}  // namespace

TEST_CASE("beta and alpha hand values") {
  CHECK(beta_of(1, 2, 2) == 5);
  CHECK(beta_of(1.7, 1.7, 2) == 6);
  CHECK(beta_of(std::sqrt(2.0), 2, 2) == 5);
  CHECK(alpha_of(1, 2, 2) == 17);
  CHECK(alpha_of(std::sqrt(2.0), 2, 2) == 14);
  CHECK(alpha_of(1.3, 1.3, 2) == 14);
}

TEST_CASE("closed forms match the brute-force search") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.2, 5.0);
  std::uniform_int_distribution<int> uk(2, 8);
  for (int i = 0; i < 300; ++i) {
    const double e = u(rng), c = u(rng);
    const int k = uk(rng);
    CHECK(beta_of(e, c, k) == brute_beta(e, c, k));
    CHECK(alpha_of(e, c, k) == brute_alpha(e, c, k));
    CHECK(beta_of(e, c, k) > k + 1);
    CHECK(alpha_of(e, c, k) > beta_of(e, c, k));
  }
}

TEST_CASE("monotone in k, beta steps with the floor") {
  const double e = 1.3, c = 2.9;
  for (int k = 2; k < 30; ++k) {
    CHECK(beta_of(e, c, k + 1) >= beta_of(e, c, k));
    CHECK(alpha_of(e, c, k + 1) >= alpha_of(e, c, k));
    const long long jump = static_cast<long long>(std::floor((k + 1) * e / c)) - static_cast<long long>(std::floor(k * e / c));
    CHECK(beta_of(e, c, k + 1) - beta_of(e, c, k) == 1 + jump);
  }
}

TEST_CASE("resonance verdicts") {
  SUBCASE("e = c is resonant at (1,1)") {
    const auto rep = resonance_check(std::sqrt(2.0), std::sqrt(2.0), 2);
    CHECK_FALSE(rep.linearizable());
    const bool found = std::any_of(rep.violations.begin(), rep.violations.end(), [](const ResonanceViolation& v) {
      return v.nu1 == 1 && v.nu2 == 1 && v.kind == ResonanceKind::Unit;
    });
    CHECK(found);
  }
  SUBCASE("e=1, c=2 is resonant at (1,2)") {
    const auto rep = resonance_check(1, 2, 2);
    const bool found = std::any_of(rep.violations.begin(), rep.violations.end(), [](const ResonanceViolation& v) {
      return v.nu1 == 1 && v.nu2 == 2 && v.kind == ResonanceKind::Unit;
    });
    CHECK(found);
  }
  SUBCASE("e=sqrt2, c=2 is linearizable up to alpha=14") {
    const auto rep = resonance_check(std::sqrt(2.0), 2, 2);
    CHECK(rep.alpha == 14);
    CHECK(rep.linearizable());
  }
}

TEST_CASE("enumeration is exhaustive and order independent") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> small(1, 6);
  for (int i = 0; i < 40; ++i) {
    const double e = small(rng), c = small(rng);
    const auto rep = resonance_check(e, c, 2);
    std::set<std::tuple<int, int, int>> got;
    for (const auto& v : rep.violations) got.insert({v.nu1, v.nu2, static_cast<int>(v.kind)});
    // reversed enumeration with exact integer arithmetic
    std::set<std::tuple<int, int, int>> want;
    for (long long s = rep.alpha; s >= 2; --s) {
      for (long long n1 = s; n1 >= 0; --n1) {
        const long long n2 = s - n1;
        const auto E = static_cast<long long>(e), C = static_cast<long long>(c);
        if ((n1 - 1) * C == n2 * E) want.insert({int(n1), int(n2), static_cast<int>(ResonanceKind::ContractingRow)});
        if (n1 * C == (n2 - 1) * E) want.insert({int(n1), int(n2), static_cast<int>(ResonanceKind::ExpandingRow)});
        if (n1 * C == n2 * E) want.insert({int(n1), int(n2), static_cast<int>(ResonanceKind::Unit)});
      }
    }
    CHECK(got == want);
  }
}

TEST_CASE("small rationals are always caught") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> u(1, 5);
  for (int i = 0; i < 50; ++i) {
    const int p = u(rng), q = u(rng);
    const double e = 0.37;  // c / e = p / q
    const double c = e * p / q;
    const auto rep = resonance_check(e, c, 2);
    if (p + q <= rep.alpha) CHECK_FALSE(rep.linearizable());
  }
}

TEST_CASE("report JSON") {
  const auto j = sternberg_to_json(resonance_check(std::sqrt(2.0), 2, 2));
  CHECK(j["verdict"] == "linearizable");
  CHECK(j["alpha"] == 14);
  CHECK(j["lambda_c"].get<double>() == doctest::Approx(std::exp(-2.0)));
  CHECK(j["lambda_e"].get<double>() == doctest::Approx(std::exp(std::sqrt(2.0))));
}
