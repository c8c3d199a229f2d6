#pragma once

#include <ostream>
#include <vector>

#include "hetlab/ode/integrator.hpp"
#include "hetlab/ode/systems.hpp"

namespace hetlab::ode {

/// States (or running averages) on a uniform output grid.
struct SampledPath {
  std::vector<double> t;
  std::vector<State> values;
};

/// x(t) at t = 0, dt, 2 dt, ..., t_end.
SampledPath sample_trajectory(const System& sys, const State& x0, double t_end, double dt_out,
                              const Controls& ctl = {});

/// R(t) = (1/t) int_0^t x(s) ds on the grid dt, 2 dt, ..., t_max, computed by
/// carrying the integral as extra state components.
SampledPath ode_time_average(const System& sys, const State& x0, double t_max, double dt_out,
                             const Controls& ctl = {});

/// Columns t,x,y[,z]; for averages the same layout with R in place of x.
void write_path_csv(std::ostream& os, const SampledPath& p, bool average = false);

}  // namespace hetlab::ode
