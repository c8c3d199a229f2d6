#include "hetlab/ode/events.hpp"

#include <cmath>

namespace hetlab::ode {

EventLocator::EventLocator(EventFn g, EventOptions opts) : g_(std::move(g)), opts_(opts) {
  if (opts_.subdivisions < 1) opts_.subdivisions = 1;
}

Crossing EventLocator::refine(const DenseStep& step, double ta, double ga, double tb, double gb) const {
  // Illinois variant of regula falsi on the continuous extension.
  State y(step.r1.size());
  double t = ta;
  double gt = ga;
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    t = (ta * gb - tb * ga) / (gb - ga);
    if (!(t > std::min(ta, tb) && t < std::max(ta, tb))) t = 0.5 * (ta + tb);
    step.eval(t, y);
    gt = g_(y);
    if (std::abs(gt) <= opts_.tol * 1e-2 || std::abs(tb - ta) <= 4e-16 * std::max(1.0, std::abs(t))) break;
    if ((gt > 0.0) == (gb > 0.0)) {
      tb = t;
      gb = gt;
      if (side == -1) ga *= 0.5;
      side = -1;
    } else {
      ta = t;
      ga = gt;
      if (side == 1) gb *= 0.5;
      side = 1;
    }
  }
  Crossing c;
  c.t = t;
  c.y = y;
  const double dt = 1e-7 * std::abs(step.h());
  const double gp = g_(step.eval(t + dt));
  const double gm = g_(step.eval(t - dt));
  c.rate = (gp - gm) / (2.0 * dt);
  c.grazing = std::abs(c.rate) < opts_.grazing_rate;
  return c;
}

void EventLocator::on_step(const DenseStep& step, std::vector<Crossing>& out) const {
  const int n = opts_.subdivisions;
  const double h = step.h();
  const double sgn = h >= 0.0 ? 1.0 : -1.0;
  double ta = step.t0;
  double ga = g_(step.r1);
  State y(step.r1.size());
  for (int i = 1; i <= n; ++i) {
    const double tb = i == n ? step.t1 : step.t0 + h * static_cast<double>(i) / n;
    if (i == n) {
      y = step.y1();
    } else {
      step.eval(tb, y);
    }
    const double gb = g_(y);
    const bool crosses = (ga < 0.0 && gb >= 0.0) || (ga > 0.0 && gb <= 0.0);
    if (crosses) {
      // an exact zero at the right end is picked up here, not on the next step
      const int dir = static_cast<int>(sgn) * (gb > ga ? 1 : -1);
      if (opts_.direction == 0 || opts_.direction == dir) {
        Crossing c = gb == 0.0 ? Crossing{tb, y, 0, 0.0, false} : refine(step, ta, ga, tb, gb);
        if (gb == 0.0) {
          const double dt = 1e-7 * std::abs(h);
          c.rate = (g_(step.eval(tb)) - g_(step.eval(tb - dt))) / dt;
          c.grazing = std::abs(c.rate) < opts_.grazing_rate;
        }
        c.direction = dir;
        out.push_back(std::move(c));
      }
    }
    ta = tb;
    ga = gb;
  }
}

std::vector<Crossing> section_crossings(const Trajectory& tr, const EventFn& g, const EventOptions& opts) {
  std::vector<Crossing> out;
  EventLocator loc(g, opts);
  for (const auto& s : tr.steps) loc.on_step(s, out);
  return out;
}

EventFn coordinate_plane(int index, double level) {
  return [index, level](const State& y) { return y[index] - level; };
}

}  // namespace hetlab::ode
