#include "hetlab/ode/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace hetlab::ode {

// Dormand-Prince 5(4) tableau, dense output after Hairer & Wanner.
namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double error_norm(const State& err, const State& y0, const State& y1, double atol, double rtol) {
  double acc = 0.0;
  const auto n = err.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sk = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = err[i] / sk;
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

double initial_step(const Rhs& f, double t0, const State& y0, const State& f0, double dir, const Controls& ctl) {
  const auto n = static_cast<double>(y0.size());
  double dnf = 0.0, dny = 0.0;
  for (Eigen::Index i = 0; i < y0.size(); ++i) {
    const double sk = ctl.atol + ctl.rtol * std::abs(y0[i]);
    dnf += (f0[i] / sk) * (f0[i] / sk);
    dny += (y0[i] / sk) * (y0[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min(h, ctl.max_step);
  State y1 = y0 + dir * h * f0;
  State f1(y0.size());
  f(t0 + dir * h, y1, f1);
  double der2 = 0.0;
  for (Eigen::Index i = 0; i < y0.size(); ++i) {
    const double sk = ctl.atol + ctl.rtol * std::abs(y0[i]);
    der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
  }
  der2 = std::sqrt(der2 / n) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf / n));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, ctl.max_step});
}

bool finite(const State& y) { return y.allFinite(); }

IntegrationResult run_dopri(const Rhs& f, double t0, const State& y0, double t1, const Controls& ctl,
                            const StepObserver& observer) {
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  const auto n = y0.size();
  IntegrationResult res;
  res.t = t0;
  res.y = y0;
  if (t1 == t0) return res;

  State k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y1(n), err(n);
  f(t0, y0, k1);
  if (!finite(k1)) throw IntegrationError("non-finite derivative at the initial state", t0, y0);

  double h = ctl.initial_step > 0.0 ? ctl.initial_step : initial_step(f, t0, y0, k1, dir, ctl);
  h = std::min(h, ctl.max_step);
  double facold = 1e-4;
  bool last_rejected = false;
  double t = t0;
  State y = y0;
  DenseStep ds;

  const double span = std::abs(t1 - t0);
  while (dir * (t1 - t) > 0.0) {
    if (res.accepted + res.rejected >= ctl.max_steps)
      throw IntegrationError("maximum number of steps exceeded", t, y);
    const double hmin = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0);
    if (h < hmin) throw IntegrationError("step size underflow", t, y);
    bool final_step = false;
    if (std::abs(t1 - t) <= h * (1.0 + 1e-12) || std::abs(t1 - t) < 1e-13 * span) {
      h = std::abs(t1 - t);
      final_step = true;
    }
    const double hs = dir * h;

    ytmp = y + hs * a21 * k1;
    f(t + c2 * hs, ytmp, k2);
    ytmp = y + hs * (a31 * k1 + a32 * k2);
    f(t + c3 * hs, ytmp, k3);
    ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * hs, ytmp, k4);
    ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * hs, ytmp, k5);
    ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + hs, ytmp, k6);
    y1 = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const double tnew = final_step ? t1 : t + hs;
    f(tnew, y1, k7);

    err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double enorm = error_norm(err, y, y1, ctl.atol, ctl.rtol);
    if (!std::isfinite(enorm) || !finite(k7)) enorm = 1e10;

    // PI step-size control
    const double fac11 = std::pow(enorm, 0.2 - 0.04 * 0.75);
    double fac = fac11 / std::pow(facold, 0.04);
    fac = std::max(0.1, std::min(5.0, fac / 0.9));
    double hnew = h / fac;

    if (enorm <= 1.0) {
      facold = std::max(enorm, 1e-4);
      ds.t0 = t;
      ds.t1 = tnew;
      ds.r1 = y;
      ds.r2 = y1 - y;
      ds.r3 = hs * k1 - ds.r2;
      ds.r4 = ds.r2 - hs * k7 - ds.r3;
      ds.r5 = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      t = tnew;
      y = y1;
      k1 = k7;
      ++res.accepted;
      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
      h = std::min(hnew, ctl.max_step);
      if (observer && !observer(ds)) {
        res.stopped_early = true;
        break;
      }
    } else {
      ++res.rejected;
      hnew = h / std::min(5.0, fac11 / 0.9);
      last_rejected = true;
      h = hnew;
    }
  }
  res.t = t;
  res.y = y;
  return res;
}

IntegrationResult run_rk4(const Rhs& f, double t0, const State& y0, double t1, const Controls& ctl,
                          const StepObserver& observer) {
  if (!(ctl.fixed_step > 0.0)) throw InputError("fixed step must be positive");
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  const auto n = y0.size();
  IntegrationResult res;
  res.t = t0;
  res.y = y0;
  const double span = std::abs(t1 - t0);
  const auto nsteps = static_cast<std::size_t>(std::ceil(span / ctl.fixed_step - 1e-12));
  if (nsteps == 0) return res;
  const double hs = dir * span / static_cast<double>(nsteps);

  State k1(n), k2(n), k3(n), k4(n), y1(n), f1(n);
  State y = y0;
  f(t0, y, k1);
  DenseStep ds;
  for (std::size_t i = 0; i < nsteps; ++i) {
    const double t = t0 + static_cast<double>(i) * hs;
    const double tnew = i + 1 == nsteps ? t1 : t0 + static_cast<double>(i + 1) * hs;
    f(t + 0.5 * hs, y + 0.5 * hs * k1, k2);
    f(t + 0.5 * hs, y + 0.5 * hs * k2, k3);
    f(t + hs, y + hs * k3, k4);
    y1 = y + (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!finite(y1)) throw IntegrationError("non-finite state", t, y);
    f(tnew, y1, f1);
    // cubic Hermite continuous extension in the same nested form
    ds.t0 = t;
    ds.t1 = tnew;
    ds.r1 = y;
    ds.r2 = y1 - y;
    ds.r3 = hs * k1 - ds.r2;
    ds.r4 = 2.0 * ds.r2 - hs * k1 - hs * f1;
    ds.r5 = State::Zero(n);
    y = y1;
    k1 = f1;
    ++res.accepted;
    res.t = tnew;
    if (observer && !observer(ds)) {
      res.stopped_early = true;
      break;
    }
  }
  res.y = y;
  return res;
}

}  // namespace

State DenseStep::eval(double t) const {
  State out(r1.size());
  eval(t, out);
  return out;
}

void DenseStep::eval(double t, State& out) const {
  const double h = t1 - t0;
  const double s = h != 0.0 ? (t - t0) / h : 0.0;
  const double s1 = 1.0 - s;
  out = r1 + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5)));
}

IntegrationResult integrate(const Rhs& f, double t0, const State& y0, double t1, const Controls& ctl,
                            const StepObserver& observer) {
  if (!y0.allFinite()) throw InputError("initial state must be finite");
  if (!std::isfinite(t0) || !std::isfinite(t1)) throw InputError("time span must be finite");
  if (!(ctl.rtol > 0.0) || !(ctl.atol > 0.0)) throw InputError("tolerances must be positive");
  return ctl.method == Method::RK4 ? run_rk4(f, t0, y0, t1, ctl, observer)
                                   : run_dopri(f, t0, y0, t1, ctl, observer);
}

State Trajectory::eval(double t) const {
  if (steps.empty()) throw DomainError("empty trajectory");
  const bool forward = steps.front().t1 >= steps.front().t0;
  // steps are ordered along the direction of integration
  auto it = std::lower_bound(steps.begin(), steps.end(), t, [forward](const DenseStep& s, double v) {
    return forward ? s.t1 < v : s.t1 > v;
  });
  if (it == steps.end()) it = std::prev(steps.end());
  return it->eval(t);
}

Trajectory integrate_dense(const Rhs& f, double t0, const State& y0, double t1, const Controls& ctl) {
  Trajectory tr;
  integrate(f, t0, y0, t1, ctl, [&](const DenseStep& s) {
    tr.steps.push_back(s);
    return true;
  });
  return tr;
}

}  // namespace hetlab::ode
