#include "hetlab/ode/averages.hpp"

#include <cmath>

#include "hetlab/io.hpp"

namespace hetlab::ode {

namespace {

void check_grid(double t_end, double dt_out) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InputError("end time must be positive and finite");
  if (!(dt_out > 0.0)) throw InputError("output spacing must be positive");
}

// Output times k*dt_out falling inside each accepted step.
template <class Emit>
StepObserver grid_observer(double dt_out, double t_end, std::size_t& next, Emit emit) {
  return [=, &next](const DenseStep& s) {
    const std::size_t n_out = static_cast<std::size_t>(std::floor(t_end / dt_out + 1e-9));
    while (next <= n_out) {
      const double t = std::min(static_cast<double>(next) * dt_out, t_end);
      if (t > s.t1) break;
      emit(t, s.eval(t));
      ++next;
    }
    return true;
  };
}

}  // namespace

SampledPath sample_trajectory(const System& sys, const State& x0, double t_end, double dt_out, const Controls& ctl) {
  check_grid(t_end, dt_out);
  if (x0.size() != sys.dim()) throw InputError("initial state has the wrong dimension");
  SampledPath p;
  p.t.push_back(0.0);
  p.values.push_back(x0);
  std::size_t next = 1;
  integrate(sys.as_rhs(), 0.0, x0, t_end, ctl, grid_observer(dt_out, t_end, next, [&](double t, const State& y) {
              p.t.push_back(t);
              p.values.push_back(y);
            }));
  return p;
}

SampledPath ode_time_average(const System& sys, const State& x0, double t_max, double dt_out, const Controls& ctl) {
  check_grid(t_max, dt_out);
  const int d = sys.dim();
  if (x0.size() != d) throw InputError("initial state has the wrong dimension");
  State aug = State::Zero(2 * d);
  aug.head(d) = x0;
  const Rhs f = [&sys, d](double, const State& s, State& ds) {
    ds.resize(2 * d);
    State fy(d);
    sys.rhs(s.head(d), fy);
    ds.head(d) = fy;
    ds.tail(d) = s.head(d);
  };
  SampledPath p;
  std::size_t next = 1;
  integrate(f, 0.0, aug, t_max, ctl, grid_observer(dt_out, t_max, next, [&](double t, const State& y) {
              p.t.push_back(t);
              p.values.push_back(y.tail(d) / t);
            }));
  return p;
}

void write_path_csv(std::ostream& os, const SampledPath& p, bool average) {
  if (p.values.empty()) return;
  const auto d = p.values.front().size();
  static const char* plain[] = {"x", "y", "z"};
  static const char* avg[] = {"Rx", "Ry", "Rz"};
  os << "t";
  for (Eigen::Index i = 0; i < d && i < 3; ++i) os << ',' << (average ? avg[i] : plain[i]);
  os << '\n';
  for (std::size_t k = 0; k < p.t.size(); ++k) {
    os << fmt17(p.t[k]);
    for (Eigen::Index i = 0; i < d; ++i) os << ',' << fmt17(p.values[k][i]);
    os << '\n';
  }
}

}  // namespace hetlab::ode
