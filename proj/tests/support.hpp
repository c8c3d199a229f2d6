#pragma once

// Shared fixtures for the test binaries.

#include <cmath>
#include <random>
#include <vector>

#include <hetlab/core_types.hpp>

namespace hetlab::testing {

inline CycleSpec make_spec(const std::vector<double>& e, const std::vector<double>& c,
                           const std::vector<Vec3>& xbar, double eps = 0.1) {
  std::vector<NodeSpec> nodes(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) nodes[i] = {e[i], c[i], xbar[i], 1.0};
  return CycleSpec::validated(nodes, eps);
}

// k=2, e=(1,1), c=(2,2), xbar = (+-1, 0, 0)
inline CycleSpec two_node_spec() {
  return make_spec({1, 1}, {2, 2}, {Vec3(1, 0, 0), Vec3(-1, 0, 0)});
}

inline CycleSpec symmetric_lift_spec() {
  const double s = std::sqrt(2.0);
  return make_spec({s, s}, {s, s}, {Vec3(1, 0, 0), Vec3(-1, 0, 0)});
}

// Strictly attracting spec with k in {2,3,4}: every c_a > e_a.
inline CycleSpec random_attracting_spec(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> uk(2, 4);
  std::uniform_real_distribution<double> ue(0.5, 2.0), ratio(1.05, 2.5), ux(-2.0, 2.0);
  const int k = uk(rng);
  std::vector<double> e, c;
  std::vector<Vec3> x;
  for (int i = 0; i < k; ++i) {
    e.push_back(ue(rng));
    c.push_back(e.back() * ratio(rng));
    x.emplace_back(ux(rng), ux(rng), ux(rng));
  }
  return make_spec(e, c, x, 0.1);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace hetlab::testing
