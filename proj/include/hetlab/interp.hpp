#pragma once

#include <vector>

#include "hetlab/common.hpp"

namespace hetlab {

/// C2 periodic cubic spline through (x_i, y_i). Knots must be strictly
/// increasing and span less than one period.
class PeriodicSpline {
 public:
  PeriodicSpline() = default;
  PeriodicSpline(std::vector<double> x, std::vector<double> y, double period = kTwoPi);

  double operator()(double x) const;
  double deriv(double x) const;
  double deriv2(double x) const;

  double period() const { return period_; }
  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }
  bool empty() const { return x_.empty(); }

 private:
  // interval index and local offset for a point reduced into [x_0, x_0 + period)
  std::size_t locate(double x, double& dx, double& h) const;

  std::vector<double> x_, y_, m_;  // m_ holds second derivatives
  double period_ = kTwoPi;
};

/// Solves a cyclic tridiagonal system: a_i u_{i-1} + b_i u_i + c_i u_{i+1} = r_i
/// with indices taken mod n.
std::vector<double> solve_cyclic_tridiagonal(const std::vector<double>& a, const std::vector<double>& b,
                                             const std::vector<double>& c, const std::vector<double>& r);

}  // namespace hetlab
