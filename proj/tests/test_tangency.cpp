#include <cmath>
#include <random>

#include "doctest.h"

#include <hetlab/tangency.hpp>

using namespace hetlab;

namespace {

AngleFunction sine(double amp) {
  return {[amp](double t) { return amp * std::sin(t); }, [amp](double t) { return amp * std::cos(t); },
          [amp](double t) { return -amp * std::sin(t); }};
}

AngleFunction constant(double v) {
  return {[v](double) { return v; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

}  // namespace

TEST_CASE("spiral radius and local map") {
  const PassageParams pp{1.0, 2.0, 0.1};
  const auto sp = build_spiral(sine(0.01), 0.0, M_PI, pp);
  CHECK(sp.max_radius == doctest::Approx(1.001).epsilon(1e-10));
  CHECK(sp.theta_max == doctest::Approx(M_PI / 2).epsilon(1e-7));
  CHECK(sp.fold.theta > 0.0);
  CHECK(sp.fold.theta < M_PI);
  CHECK(std::abs(sp.dphi(sp.fold.theta)) <= 1e-9);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ue(0.5, 2.0), ud(1.1, 3.0), uth(0.05, M_PI - 0.05);
  for (int i = 0; i < 100; ++i) {
    const PassageParams q{ue(rng), ud(rng), 0.1};
    const auto s = build_spiral(sine(0.02), 0.0, M_PI, q);
    const double th = uth(rng);
    const double h = 0.02 * std::sin(th);
    CHECK(std::abs(s.phi(th) - (th - std::log(h / q.epsilon) / q.e)) <= 1e-8);
    CHECK(std::abs(s.r(th) - (1.0 + q.epsilon * std::pow(h / q.epsilon, q.delta))) <= 1e-8);
  }
}

TEST_CASE("the fold advances 2pi/e per factor exp(-2pi) in lambda") {
  for (double e : {1.0, 1.5}) {
    const PassageParams pp{e, 2.0, 0.1};
    const SineFamily fam;
    const double l0 = 0.01, l1 = l0 * std::exp(-kTwoPi);
    const auto s0 = build_spiral(fam.h(l0), 0.0, M_PI, pp);
    const auto s1 = build_spiral(fam.h(l1), 0.0, M_PI, pp);
    const double adv = s1.fold.phi - s0.fold.phi;
    CHECK(adv == doctest::Approx(kTwoPi / e).epsilon(0.02));
  }
}

TEST_CASE("no fold for a constant h") {
  CHECK_THROWS_AS(build_spiral(constant(0.01), 0.0, M_PI, {}), NoFoldError);
}

TEST_CASE("scan on the sine family") {
  const SineFamily fam;
  const PassageParams pp;
  ScanOptions so;
  so.lambda_lo = 1e-6;
  so.lambda_hi = 0.05;
  so.exec = Exec::Serial;
  const auto res = tangency_scan(fam, pp, so);
  REQUIRE(res.tangencies.size() >= 3);
  for (std::size_t i = 0; i < res.tangencies.size(); ++i) {
    const auto& t = res.tangencies[i];
    CHECK(std::abs(t.F) <= 1e-9);
    CHECK(std::abs(t.F_theta) <= 1e-9);
    CHECK(std::abs(t.count_above - t.count_below) == 2);
    CHECK(t.lambda >= so.lambda_lo);
    CHECK(t.lambda <= so.lambda_hi);
    if (t.kind == TangencyKind::EnterA) CHECK(t.F_thetatheta < 0.0);
    else CHECK(t.F_thetatheta > 0.0);
    if (i > 0) CHECK(t.lambda < res.tangencies[i - 1].lambda);
  }
  // consecutive tangencies of one kind are one turn apart
  SUBCASE("single kind") {
    so.kind = KindFilter::EnterA;
    const auto enter = tangency_scan(fam, pp, so);
    for (const auto& t : enter.tangencies) CHECK(t.kind == TangencyKind::EnterA);
    for (std::size_t i = 1; i < enter.tangencies.size(); ++i) {
      const double ratio = enter.tangencies[i].lambda / enter.tangencies[i - 1].lambda;
      CHECK(ratio == doctest::Approx(std::exp(-kTwoPi)).epsilon(0.1));
    }
  }
  SUBCASE("winding over the range") {
    const auto s_lo = build_spiral(fam.h(so.lambda_lo), 0.0, M_PI, pp);
    const auto s_hi = build_spiral(fam.h(so.lambda_hi), 0.0, M_PI, pp);
    CHECK(s_lo.fold.phi - s_hi.fold.phi > kTwoPi);
  }
}

TEST_CASE("g far above the spiral gives no tangency") {
  const SineFamily fam(1.0, 1.0, 0.5);
  ScanOptions so;
  so.exec = Exec::Serial;
  const auto res = tangency_scan(fam, {}, so);
  CHECK(res.tangencies.empty());
  for (double F : res.clearance) CHECK(F < 0.0);
}

TEST_CASE("serial and parallel scans agree bitwise") {
  const SineFamily fam(1.0, 0.8, 0.0);
  ScanOptions so;
  so.lambda_lo = 1e-5;
  so.exec = Exec::Serial;
  const auto a = tangency_scan(fam, {}, so);
  so.exec = Exec::Parallel;
  const auto b = tangency_scan(fam, {}, so);
  REQUIRE(a.tangencies.size() == b.tangencies.size());
  for (std::size_t i = 0; i < a.tangencies.size(); ++i) {
    CHECK(a.tangencies[i].lambda == b.tangencies[i].lambda);
    CHECK(a.tangencies[i].theta == b.tangencies[i].theta);
  }
  CHECK(a.clearance == b.clearance);
}

TEST_CASE("scan JSON") {
  const auto res = tangency_scan(SineFamily{}, {}, {});
  const auto j = scan_to_json(res);
  REQUIRE(j["tangencies"].size() == res.tangencies.size());
  CHECK(j["ratios"].size() + 1 == res.tangencies.size());
  CHECK(j["ratios_skip_one"].size() + 2 == res.tangencies.size());
  CHECK(j["tangencies"][0]["residuals"].size() == 2);
  const std::string kind = j["tangencies"][0]["kind"];
  CHECK((kind == "enter_A" || kind == "leave_A"));
}
