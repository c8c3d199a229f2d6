#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "hetlab/common.hpp"

namespace hetlab::ode {

using State = Eigen::VectorXd;
using Rhs = std::function<void(double t, const State& y, State& dydt)>;

/// Thrown on step-size underflow, non-finite states or step-count exhaustion.
/// Carries the last accepted state.
class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, double t, State y)
      : NumericalError(what), t_(t), y_(std::move(y)) {}
  double t() const { return t_; }
  const State& y() const { return y_; }

 private:
  double t_;
  State y_;
};

enum class Method { DormandPrince, RK4 };

struct Controls {
  Method method = Method::DormandPrince;
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 picks one automatically
  double max_step = std::numeric_limits<double>::infinity();
  double fixed_step = 1e-3;   // RK4 only
  std::size_t max_steps = 50'000'000;
};

/// One accepted step with its continuous extension.
struct DenseStep {
  double t0 = 0.0;
  double t1 = 0.0;
  State r1, r2, r3, r4, r5;

  double h() const { return t1 - t0; }
  const State& y0() const { return r1; }
  State y1() const { return r1 + r2; }
  State eval(double t) const;
  void eval(double t, State& out) const;
};

/// Return false to stop the integration after this step.
using StepObserver = std::function<bool(const DenseStep&)>;

struct IntegrationResult {
  double t = 0.0;
  State y;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  bool stopped_early = false;
};

/// Integrates from t0 to t1 (t1 < t0 runs backward).
IntegrationResult integrate(const Rhs& f, double t0, const State& y0, double t1, const Controls& ctl = {},
                            const StepObserver& observer = {});

/// All accepted steps, for later dense evaluation.
struct Trajectory {
  std::vector<DenseStep> steps;

  bool empty() const { return steps.empty(); }
  double t_begin() const { return steps.front().t0; }
  double t_end() const { return steps.back().t1; }
  State eval(double t) const;
};

Trajectory integrate_dense(const Rhs& f, double t0, const State& y0, double t1, const Controls& ctl = {});

}  // namespace hetlab::ode
