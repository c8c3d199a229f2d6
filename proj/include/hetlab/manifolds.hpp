#pragma once

#include <array>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hetlab/interp.hpp"
#include "hetlab/ode/floquet.hpp"
#include "hetlab/parallel.hpp"

namespace hetlab {

/// Some ring seeds never reached a section. Windows are seed-phase intervals.
class IncompleteCurveError : public NumericalError {
 public:
  IncompleteCurveError(const std::string& what, std::vector<std::pair<double, double>> windows)
      : NumericalError(what), windows_(std::move(windows)) {}
  const std::vector<std::pair<double, double>>& missing_windows() const { return windows_; }

 private:
  std::vector<std::pair<double, double>> windows_;
};

/// The section trace is not a graph over the angle (the curve folds).
class NonGraphError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

enum class CurveKind {
  UnstableOnIn,  // h: offset of W^u(P_a) above W^s(P_{a+1}) on In(P_{a+1}); level 0
  StableOnOut,   // g: 1 + offset of W^s(P_{a+1}) above W^u(P_a) on Out(P_a); level 1
};

struct ManifoldCurve {
  CurveKind kind = CurveKind::UnstableOnIn;
  int node = 0;  // node of the section the curve lives on
  double lambda = 0.0;
  double level = 0.0;
  std::vector<double> angles;  // uniform grid on [0, 2pi)
  std::vector<double> values;
  PeriodicSpline spline;

  /// Level crossings in [0, 2pi), in increasing order, with the slope sign.
  std::vector<std::pair<double, int>> crossings;
  /// First and second crossing (I1, I2 or O2, O1), unwrapped so that
  /// second > first; set only when there are exactly two crossings.
  bool has_pair = false;
  double first = 0.0;   // I1 (h' > 0) or O2 (g' > 0)
  double second = 0.0;  // I2 (h' < 0) or O1 (g' < 0)
  double arg_max = 0.0;
  double max_value = 0.0;

  double operator()(double angle) const { return spline(angle); }
  double deriv(double angle) const { return spline.deriv(angle); }
};

/// Builds a curve from samples on a uniform grid over [0, 2pi).
ManifoldCurve make_curve(CurveKind kind, int node, double lambda, std::vector<double> values);

/// Finds level crossings, the (first, second) pair and the maximum of an already
/// filled curve. Used by make_curve; exposed for synthetic curves.
void analyse_curve(ManifoldCurve& c);

struct ManifoldOptions {
  std::size_t ring_size = 256;
  std::size_t grid = 256;
  double eta = 1e-6;
  double section_offset = 0.1;
  double t_max = 200.0;
  ode::Controls controls{};
  ode::PeriodicOrbitOptions orbit{};
  Exec exec = Exec::Parallel;
};

/// Raw section hits of one manifold on one plane, ordered by seed phase.
/// Seeds that never reached the plane are listed as phase windows instead.
struct SectionTrace {
  std::vector<double> phase;
  std::vector<double> angle;  // unwrapped, increasing
  std::vector<double> rho;
  std::vector<std::pair<double, double>> missing;
};

/// Both manifolds of the connection P_a -> P_{a+1} of a lifted system.
struct ConnectionTraces {
  int from = 0;  // a, 0-based; node 0 is x = +1
  double lambda = 0.0;
  SectionTrace unstable_out, unstable_in;  // W^u(P_a) on Out(P_a), In(P_{a+1})
  SectionTrace stable_out, stable_in;      // W^s(P_{a+1}) on Out(P_a), In(P_{a+1})
};

/// x level of node a: +1 for a even, -1 for a odd.
double node_level(int a);

std::array<ode::PeriodicOrbitData, 2> lifted_orbits(const ode::System& sys, const ode::PeriodicOrbitOptions& opts);

ConnectionTraces trace_connection(const ode::System& sys, int from, const ManifoldOptions& opts = {});
ConnectionTraces trace_connection(const ode::System& sys, int from,
                                  const std::array<ode::PeriodicOrbitData, 2>& orbits,
                                  const ManifoldOptions& opts = {});

/// rho as a periodic spline in the section angle. Throws IncompleteCurveError
/// when seeds are missing and NonGraphError when the angle does not advance
/// monotonically with the seed phase.
PeriodicSpline trace_spline(const SectionTrace& tr);

ManifoldCurve h_curve(const ConnectionTraces& tr, std::size_t grid = 256);
ManifoldCurve g_curve(const ConnectionTraces& tr, std::size_t grid = 256);

/// h on In(P_{a+1}).
ManifoldCurve extract_unstable_curve(const ode::System& sys, int a, const ManifoldOptions& opts = {});
/// g on Out(P_a).
ManifoldCurve extract_stable_curve(const ode::System& sys, int a, const ManifoldOptions& opts = {});

/// M^O - (1 + eps^(1 - delta_a) (M^I)^delta_a); positive inside the class C.
double class_C_margin(double epsilon, double delta_a, double max_in, double max_out);

void write_curve_csv(std::ostream& os, const ManifoldCurve& c, bool header = true);
nlohmann::json curve_summary_json(const ManifoldCurve& c);

}  // namespace hetlab
