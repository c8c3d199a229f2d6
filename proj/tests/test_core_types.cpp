#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

#include <hetlab/core_types.hpp>

using namespace hetlab;
using namespace hetlab::testing;

TEST_CASE("derive_constants on hand-evaluated specs") {
  SUBCASE("k=2, e=(1,1), c=(2,2)") {
    const auto dc = derive_constants(two_node_spec());
    CHECK(dc.delta_a == std::vector<double>{2.0, 2.0});
    CHECK(dc.mu == std::vector<double>{2.0, 2.0});
    CHECK(dc.delta == 4.0);
  }
  SUBCASE("symmetric lift is degenerate") {
    const auto spec = symmetric_lift_spec();
    const auto dc = derive_constants(spec);
    CHECK(dc.delta_a[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(dc.mu[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(dc.delta == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(spec.attractivity() == Attractivity::Degenerate);
  }
  SUBCASE("identity exponents, k=3") {
    const auto spec = make_spec({1, 1, 1}, {1, 1, 1}, {Vec3::Zero(), Vec3::Zero(), Vec3::Zero()});
    CHECK(derive_constants(spec).delta == 1.0);
  }
  SUBCASE("mu indexing: mu[a] = c_{a-1} / e_a") {
    const auto spec = make_spec({1, 2, 4}, {3, 5, 7}, {Vec3::Zero(), Vec3::Zero(), Vec3::Zero()});
    const auto dc = derive_constants(spec);
    CHECK(dc.mu[0] == doctest::Approx(7.0 / 1.0));
    CHECK(dc.mu[1] == doctest::Approx(3.0 / 2.0));
    CHECK(dc.mu[2] == doctest::Approx(5.0 / 4.0));
  }
}

TEST_CASE("validation flags and errors") {
  const std::vector<Vec3> x2{Vec3::Zero(), Vec3::Zero()};
  CHECK(make_spec({1, 2}, {2, 3}, x2).attractivity() == Attractivity::StrictlyAttracting);
  CHECK(make_spec({2, 1}, {1, 2}, x2).attractivity() == Attractivity::NonAttracting);

  try {
    make_spec({1, 1}, {2, 2}, x2, 0.0);
    FAIL("epsilon = 0 accepted");
  } catch (const ValidationError& e) {
    REQUIRE(e.violations().size() == 1);
    CHECK(e.violations()[0].find("epsilon") != std::string::npos);
  }

  // every offending field is listed, nothing is repaired
  try {
    std::vector<NodeSpec> nodes{{-1.0, 0.0, Vec3::Zero(), 1.0}};
    CycleSpec::validated(nodes, -0.5);
    FAIL("invalid spec accepted");
  } catch (const ValidationError& e) {
    CHECK(e.violations().size() >= 4);
  }
  CHECK_THROWS_AS(make_spec({1, std::nan("")}, {2, 2}, x2), ValidationError);
  CHECK_THROWS_AS(make_spec({1, 1}, {2, 2}, x2, 0.0), InputError);
}

TEST_CASE("product of mu equals product of delta on random specs") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto spec = random_attracting_spec(rng);
    const auto dc = derive_constants(spec);
    CHECK(rel_err(dc.delta, dc.delta_via_mu) <= 1e-14);
    CHECK(dc.delta > 1.0);
    for (double d : dc.delta_a) CHECK(d > 1.0);
    // pure: identical bits on a second evaluation
    const auto again = derive_constants(spec);
    CHECK(std::memcmp(&again.delta, &dc.delta, sizeof(double)) == 0);
    CHECK(again.mu == dc.mu);
  }
}

TEST_CASE("section points") {
  const double eps = 0.1;
  const auto p = SectionPoint::on_in(0, 1.0, 0.05, eps);
  CHECK(p.log_height == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(p.wall == Wall::In);

  // deep log-heights survive although z underflows
  const auto deep = SectionPoint::on_in_log(1, 0.0, -1e4, eps);
  CHECK(deep.value == 0.0);
  CHECK(deep.log_height == -1e4);

  CHECK_THROWS_AS(SectionPoint::on_in(0, 0.0, 0.2, eps), DomainError);
  CHECK_THROWS_AS(SectionPoint::on_in(0, 0.0, 0.0, eps), DomainError);
  CHECK_THROWS_AS(SectionPoint::on_in_log(0, 0.0, 0.5, eps), DomainError);
  CHECK_NOTHROW(SectionPoint::on_out(0, 0.0, 1.0 + eps, eps));
  CHECK_THROWS_AS(SectionPoint::on_out(0, 0.0, 1.2, eps), DomainError);

  const auto q = SectionPoint::on_in(0, 7.0, 0.05, eps);
  CHECK(q.angle >= 0.0);
  CHECK(q.angle < kTwoPi);
}

TEST_CASE("spec JSON") {
  const auto spec = two_node_spec();
  const auto j = spec_to_json(spec);
  const auto back = spec_from_json(j);
  CHECK(back.k() == 2);
  CHECK(back.epsilon() == spec.epsilon());
  CHECK(back.node(1).xbar == spec.node(1).xbar);

  SUBCASE("unknown fields are rejected") {
    auto bad = j;
    bad["colour"] = "blue";
    CHECK_THROWS_AS(spec_from_json(bad), ValidationError);
    auto bad_node = j;
    bad_node["nodes"][0]["weight"] = 1;
    CHECK_THROWS_AS(spec_from_json(bad_node), ValidationError);
  }
  SUBCASE("k must match the node list") {
    auto bad = j;
    bad["k"] = 3;
    CHECK_THROWS_AS(spec_from_json(bad), ValidationError);
  }
  SUBCASE("xi is optional and stored") {
    auto with_xi = j;
    with_xi["nodes"][0]["xi"] = 6.5;
    CHECK(spec_from_json(with_xi).node(0).period == 6.5);
    CHECK(spec_from_json(j).node(0).period == 1.0);
  }
  SUBCASE("malformed file") {
    const std::string path = "test_core_types_bad.json";
    {
      std::ofstream os(path);
      os << "{\"k\": 2, ";
    }
    CHECK_THROWS_AS(load_spec(path), InputError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_spec("does/not/exist.json"), InputError);
  }
}

TEST_CASE("node indices wrap") {
  const auto spec = make_spec({1, 2, 3}, {2, 3, 4}, {Vec3::Zero(), Vec3::Zero(), Vec3::Zero()});
  CHECK(spec.wrap(3) == 0);
  CHECK(spec.wrap(-1) == 2);
  CHECK(spec.node(4).e == 2.0);
}
