#pragma once

#include <functional>
#include <vector>

#include "hetlab/ode/integrator.hpp"

namespace hetlab::ode {

/// Scalar event function g(y); the section is g = 0.
using EventFn = std::function<double(const State& y)>;

struct Crossing {
  double t = 0.0;
  State y;
  int direction = 0;     // +1 when g increases through 0, -1 when it decreases
  double rate = 0.0;     // dg/dt at the root
  bool grazing = false;  // |rate| below the grazing threshold
};

struct EventOptions {
  int direction = 0;            // 0 keeps both orientations
  double tol = 1e-10;           // target |g| at the refined root
  int subdivisions = 4;         // sign checks per step
  double grazing_rate = 1e-12;
};

/// Streaming locator; feed it every accepted step in order.
class EventLocator {
 public:
  EventLocator(EventFn g, EventOptions opts = {});
  /// Appends crossings inside the step (excluding its left endpoint).
  void on_step(const DenseStep& step, std::vector<Crossing>& out) const;

 private:
  Crossing refine(const DenseStep& step, double ta, double ga, double tb, double gb) const;
  EventFn g_;
  EventOptions opts_;
};

std::vector<Crossing> section_crossings(const Trajectory& tr, const EventFn& g, const EventOptions& opts = {});

/// Plane x_i = level.
EventFn coordinate_plane(int index, double level);

}  // namespace hetlab::ode
