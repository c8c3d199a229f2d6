#include <cmath>
#include <cstring>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

#include <hetlab/cycle_map.hpp>

using namespace hetlab;
using namespace hetlab::testing;

TEST_CASE("flight time") {
  const auto spec = two_node_spec();
  CHECK(flight_time(spec, 0, 0.1) == 0.0);
  CHECK(flight_time(spec, 0, 0.001) == doctest::Approx(4.605170185988091).epsilon(1e-14));
  const auto fast = make_spec({2, 2}, {3, 3}, {Vec3::Zero(), Vec3::Zero()});
  CHECK(flight_time(fast, 1, 0.001) == doctest::Approx(2.302585092994046).epsilon(1e-14));
  CHECK_THROWS_AS(flight_time(spec, 0, 0.0), DomainError);
  CHECK_THROWS_AS(flight_time(spec, 0, 0.11), DomainError);
}

TEST_CASE("local map") {
  const auto spec = two_node_spec();
  SUBCASE("boundary z = eps") {
    const auto r = local_map(spec, 0, 0.0, 0.1);
    CHECK(r.phi == 0.0);
    CHECK(r.r == doctest::Approx(1.1));
  }
  SUBCASE("hand values") {
    const auto r = local_map(spec, 0, 1.0, 0.05, Side::Plus);
    CHECK(r.phi == doctest::Approx(1.0 - std::log(0.5)).epsilon(1e-14));
    CHECK(r.r == doctest::Approx(1.025).epsilon(1e-14));
    CHECK(local_map(spec, 0, 0.0, 0.05, Side::Minus).r == doctest::Approx(0.975).epsilon(1e-14));
  }
  SUBCASE("unwrapped angle keeps the winding") {
    const auto r = local_map(spec, 0, 6.0, 1e-6);
    CHECK(r.phi_unwrapped > kTwoPi);
    CHECK(r.phi == doctest::Approx(std::fmod(r.phi_unwrapped, kTwoPi)));
  }
}

TEST_CASE("transition map") {
  const auto t = transition_map_0(0.5, 1.2);
  CHECK(t.theta == 0.5);
  CHECK(t.z == doctest::Approx(0.2));
  CHECK_THROWS_AS(transition_map_0(3.0, 1.0), OnUnstableManifoldError);

  // composing with the local map multiplies the log-height by delta_a
  const auto spec = two_node_spec();
  const double z = 0.02;
  const auto out = local_map(spec, 0, 0.0, z);
  const auto in = transition_map_0(out.phi, out.r);
  CHECK(std::log(in.z / 0.1) == doctest::Approx(2.0 * std::log(z / 0.1)).epsilon(1e-12));
}

TEST_CASE("itinerary on the two-node spec") {
  const auto spec = two_node_spec();
  const auto it = run_itinerary(spec, SectionPoint::on_in(0, 0.0, 0.05, 0.1), 8);
  REQUIRE(it.records.size() == 8);
  CHECK(it.records[0].T == 0.0);
  CHECK(it.records[0].tau == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(it.records[1].tau == doctest::Approx(2 * std::log(2.0)).epsilon(1e-15));
  CHECK(it.records[2].tau == doctest::Approx(4 * std::log(2.0)).epsilon(1e-15));
  for (std::size_t i = 0; i + 1 < it.records.size(); ++i) {
    CHECK(sojourn_ratio(it, i) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(it.records[i + 1].T == doctest::Approx(it.records[i].T + it.records[i].tau).epsilon(1e-15));
    CHECK(it.records[i + 1].w == doctest::Approx(2.0 * it.records[i].w).epsilon(1e-15));
    CHECK(it.records[i].node == static_cast<int>(i % 2));
  }
}

TEST_CASE("itinerary edge cases") {
  const auto spec = two_node_spec();
  CHECK(run_itinerary(spec, SectionPoint::on_in(0, 0.0, 0.05, 0.1), 0).records.empty());
  const auto flat = run_itinerary(spec, SectionPoint::on_in(0, 0.0, 0.1, 0.1), 10);
  for (const auto& r : flat.records) {
    CHECK(r.tau == 0.0);
    CHECK(r.w == 0.0);
  }
  CHECK_THROWS_AS(run_itinerary(spec, SectionPoint::on_out(0, 0.0, 1.05, 0.1), 3), DomainError);
}

TEST_CASE("time overflow is reported") {
  const auto spec = make_spec({1, 1}, {10, 10}, {Vec3::Zero(), Vec3::Zero()});
  CHECK_THROWS_AS(run_itinerary(spec, SectionPoint::on_in(0, 0.0, 0.05, 0.1), 400), TimeOverflowError);
}

// Direct iteration of z in long double, without log coordinates.
TEST_CASE("log iteration agrees with direct height iteration") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto spec = random_attracting_spec(rng);
    const long double eps = spec.epsilon();
    long double z = 0.03L;
    const auto it = run_itinerary(spec, SectionPoint::on_in(0, 0.0, 0.03, 0.1), 3 * static_cast<std::size_t>(spec.k()));
    for (const auto& rec : it.records) {
      const auto& n = spec.node(rec.node);
      const long double tau = std::log(eps / z) / n.e;
      CHECK(rel_err(rec.tau, static_cast<double>(tau)) <= 1e-12);
      z = eps * std::pow(z / eps, static_cast<long double>(n.c / n.e));
      if (z <= 0.0L) break;
    }
  }
}

TEST_CASE("ratio law and bitwise independence of the start height") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uz(1e-8, 0.1);
  for (int s = 0; s < 30; ++s) {
    const auto spec = random_attracting_spec(rng);
    const auto ref = run_itinerary(spec, SectionPoint::on_in(0, 0.0, 0.05, 0.1), 40);
    for (int h = 0; h < 5; ++h) {
      const auto it = run_itinerary(spec, SectionPoint::on_in(0, 0.0, uz(rng), 0.1), 40);
      for (std::size_t i = 0; i + 1 < it.records.size(); ++i) {
        const double expect = spec.node(it.records[i].node).c / spec.node(it.records[i + 1].node).e;
        CHECK(rel_err(sojourn_ratio(it, i), expect) <= 1e-12);
        const double a = sojourn_ratio(it, i), b = sojourn_ratio(ref, i);
        CHECK(std::memcmp(&a, &b, sizeof(double)) == 0);
      }
      // one full turn multiplies the sojourn by delta
      const double delta = derive_constants(spec).delta;
      for (std::size_t i = 0; i + spec.k() < it.records.size(); ++i) {
        CHECK(rel_err(it.records[i + spec.k()].tau / it.records[i].tau, delta) <= 1e-12);
        CHECK(it.records[i].tau > 0.0);
      }
    }
  }
}

TEST_CASE("closed forms against iteration") {
  std::mt19937_64 rng(23);
  for (int s = 0; s < 40; ++s) {
    const auto spec = random_attracting_spec(rng);
    const int k = spec.k();
    const auto dc = derive_constants(spec);
    const auto it = run_itinerary(spec, SectionPoint::on_in(0, 0.0, 0.07, 0.1), static_cast<std::size_t>(k * 32 + 2));
    for (int a = 1; a <= k; ++a) {
      const double tau_prev = it.records[static_cast<std::size_t>(a - 1)].tau;
      const int node_a = it.records[static_cast<std::size_t>(a)].node;
      for (long long n = 0; n <= 30; ++n) {
        const auto idx = static_cast<std::size_t>(a + n * k);
        const double elapsed = it.records[idx].T - it.records[static_cast<std::size_t>(a)].T;
        if (n > 0) CHECK(rel_err(closed_form_elapsed(dc, node_a, n, tau_prev), elapsed) <= 1e-10);
        CHECK(rel_err(closed_form_tau(dc, node_a, n, tau_prev), it.records[idx].tau) <= 1e-10);
      }
    }
  }
}

TEST_CASE("closed forms in the degenerate case use the limit n") {
  const auto spec = symmetric_lift_spec();
  const auto dc = derive_constants(spec);
  CHECK(geometric_sum(1.0, 7.0) == 7.0);
  // mu = 1 everywhere: T_{a+nk} - T_a = n * k * tau_prev
  CHECK(closed_form_elapsed(dc, 0, 5, 0.3) == doctest::Approx(5 * 2 * 0.3 * dc.delta).epsilon(1e-12));
  CHECK(closed_form_tau(dc, 0, 5, 0.3) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("itinerary CSV") {
  const auto spec = two_node_spec();
  const auto it = run_itinerary(spec, SectionPoint::on_in(0, 0.0, 0.05, 0.1), 3);
  std::ostringstream os;
  write_itinerary_csv(os, it);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "j,node,T,tau,w");
  std::getline(is, line);
  CHECK(line == "1,1,0,0.69314718055994529,-0.69314718055994529");
  std::getline(is, line);
  CHECK(line.rfind("2,2,", 0) == 0);
}
