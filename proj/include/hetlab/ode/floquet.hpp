#pragma once

#include <vector>

#include <Eigen/Core>

#include "json.hpp"

#include "hetlab/ode/integrator.hpp"
#include "hetlab/ode/systems.hpp"

namespace hetlab::ode {

/// Newton failure while locating a periodic orbit.
class OrbitContinuationError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

/// Variational flow over time dt from y0: the final state and the 3x3 (or 2x2)
/// fundamental matrix, together with the integral of trace J.
struct VariationalResult {
  State y;
  Eigen::MatrixXd Phi;
  double trace_integral = 0.0;
};

VariationalResult integrate_variational(const System& sys, const State& y0, double dt, const Controls& ctl);

struct PeriodicOrbitOptions {
  int segments = 32;
  int samples_per_segment = 64;  // even; Simpson needs an even interval count
  int max_newton = 30;
  double closure_tol = 1e-9;
  Controls controls{};
};

struct PeriodicOrbitData {
  double x_level = 1.0;  // seed plane, +1 for P_1 and -1 for P_2
  double period = 0.0;
  std::vector<State> nodes;  // multiple-shooting nodes, nodes[i] at time i*period/N
  std::vector<double> times;
  std::vector<State> samples;  // uniform grid over [0, period]
  Vec3 centre = Vec3::Zero();
  double closure = 0.0;  // largest mismatch between consecutive segments
  int newton_iterations = 0;

  Eigen::MatrixXd monodromy;  // product of segment matrices, based at nodes[0]
  double m_unstable = 0.0;
  double m_stable = 0.0;
  double m_trivial = 0.0;
  double det_monodromy = 0.0;  // product of segment determinants
  double liouville = 0.0;      // exp of the integral of trace J
  double e = 0.0;              // ln m_unstable
  double c = 0.0;              // -ln m_stable

  std::vector<Vec3> unstable_dirs;  // unit Floquet directions at each node
  std::vector<Vec3> stable_dirs;
};

/// Periodic orbit of a lifted system through the plane x = x_level, phase fixed
/// by z2 = 0 at the first node.
PeriodicOrbitData periodic_orbit(const System& sys, double x_level, const PeriodicOrbitOptions& opts = {});

struct OrbitFrame {
  Vec3 point;
  Vec3 unstable;
  Vec3 stable;
};

/// Orbit point and unit Floquet directions at phase t in [0, period).
OrbitFrame orbit_frame(const System& sys, const PeriodicOrbitData& orbit, double t, const Controls& ctl = {});

/// Nontrivial multipliers of a monodromy given as a product of factors
/// M = F[n-1] ... F[0]. Throws ConvergenceError if two eigenvalues sit within
/// tie_tol of 1.
struct MultiplierPair {
  double unstable = 0.0;
  double stable = 0.0;
  double trivial = 0.0;
};
MultiplierPair nontrivial_multipliers(const std::vector<Eigen::MatrixXd>& factors, double tie_tol = 1e-6);

nlohmann::json orbit_to_json(const PeriodicOrbitData& o);

}  // namespace hetlab::ode
