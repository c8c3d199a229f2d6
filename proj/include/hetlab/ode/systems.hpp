#pragma once

#include <array>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "hetlab/ode/integrator.hpp"

namespace hetlab::ode {

enum class SystemId {
  PlanarConservative,  // x' = -y, y' = x - x^3
  PlanarBowen,         // dissipative perturbation toward the energy level 1/4
  Translated,          // (x, z) with z^2 = y + 1, time rescaled by 2z^2
  Lifted,              // rotation of Translated about the x axis
  LiftedPerturbed,     // Lifted plus lambda (x^2 - 1) in the z1 equation
  PlanarBowenTilde,    // Bowen system built on the asymmetric potential
};

std::string to_string(SystemId id);
std::optional<SystemId> parse_system_id(const std::string& name);

struct SystemParams {
  double eps_pert = 0.0;  // strength of the dissipative term
  double lambda = 0.0;    // symmetry breaking, LiftedPerturbed only
  // r(x) = r0 + r1 x + r2 x^2 in the tilde potential -(x^2-1)^2 r(x) + y^2/2.
  std::array<double, 3> tilde_coeffs{1.0, 0.0, 1.5};
};

/// v(x, y) = x^2/2 - x^4/4 + y^2/2.
double first_integral(double x, double y);
/// -(x^2 - 1)^2 r(x) + y^2/2.
double tilde_integral(double x, double y, const std::array<double, 3>& coeffs);

class System {
 public:
  System(SystemId id, SystemParams params);

  SystemId id() const { return id_; }
  const SystemParams& params() const { return params_; }
  int dim() const;
  bool is_lifted() const { return id_ == SystemId::Lifted || id_ == SystemId::LiftedPerturbed; }

  void rhs(const State& y, State& dydt) const;
  State rhs(const State& y) const;
  Eigen::MatrixXd jacobian(const State& y) const;
  Rhs as_rhs() const;

 private:
  SystemId id_;
  SystemParams params_;
};

}  // namespace hetlab::ode
