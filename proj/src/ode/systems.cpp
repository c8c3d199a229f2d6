#include "hetlab/ode/systems.hpp"

namespace hetlab::ode {

std::string to_string(SystemId id) {
  switch (id) {
    case SystemId::PlanarConservative: return "planar_conservative";
    case SystemId::PlanarBowen: return "planar_bowen";
    case SystemId::Translated: return "translated";
    case SystemId::Lifted: return "lifted";
    case SystemId::LiftedPerturbed: return "lifted_perturbed";
    case SystemId::PlanarBowenTilde: return "planar_bowen_tilde";
  }
  return "unknown";
}

std::optional<SystemId> parse_system_id(const std::string& name) {
  for (auto id : {SystemId::PlanarConservative, SystemId::PlanarBowen, SystemId::Translated, SystemId::Lifted,
                  SystemId::LiftedPerturbed, SystemId::PlanarBowenTilde}) {
    if (to_string(id) == name) return id;
  }
  return std::nullopt;
}

double first_integral(double x, double y) { return 0.5 * x * x * (1.0 - 0.5 * x * x) + 0.5 * y * y; }

double tilde_integral(double x, double y, const std::array<double, 3>& co) {
  const double q = x * x - 1.0;
  const double r = co[0] + co[1] * x + co[2] * x * x;
  return -q * q * r + 0.5 * y * y;
}

System::System(SystemId id, SystemParams params) : id_(id), params_(params) {
  if (!(params_.eps_pert >= 0.0)) throw InputError("eps_pert must be >= 0");
  if (!(params_.lambda >= 0.0)) throw InputError("lambda must be >= 0");
}

int System::dim() const { return is_lifted() ? 3 : 2; }

namespace {

// d/dx of the tilde potential part -(x^2-1)^2 r(x), and its second derivative
void tilde_parts(double x, const std::array<double, 3>& co, double& V, double& Vx, double& Vxx) {
  const double q = x * x - 1.0, qx = 2.0 * x;
  const double r = co[0] + co[1] * x + co[2] * x * x, rx = co[1] + 2.0 * co[2] * x, rxx = 2.0 * co[2];
  V = -q * q * r;
  Vx = -(2.0 * q * qx * r + q * q * rx);
  Vxx = -(2.0 * qx * qx * r + 2.0 * q * 2.0 * r + 4.0 * q * qx * rx + q * q * rxx);
}

}  // namespace

void System::rhs(const State& s, State& d) const {
  const double eps = params_.eps_pert;
  d.resize(dim());
  switch (id_) {
    case SystemId::PlanarConservative: {
      const double x = s[0], y = s[1];
      d[0] = -y;
      d[1] = x - x * x * x;
      break;
    }
    case SystemId::PlanarBowen: {
      const double x = s[0], y = s[1];
      d[0] = -y;
      d[1] = x - x * x * x - eps * y * (first_integral(x, y) - 0.25);
      break;
    }
    case SystemId::PlanarBowenTilde: {
      const double x = s[0], y = s[1];
      double V, Vx, Vxx;
      tilde_parts(x, params_.tilde_coeffs, V, Vx, Vxx);
      d[0] = -y;
      d[1] = Vx - eps * y * (V + 0.5 * y * y);
      break;
    }
    case SystemId::Translated: {
      const double x = s[0], z = s[1];
      const double z2 = z * z, u = z2 - 1.0;
      const double W = 0.5 * x * x - 0.25 * x * x * x * x + 0.5 * u * u - 0.25;
      d[0] = 2.0 * z2 * (1.0 - z2);
      d[1] = z * (x - x * x * x - eps * W * u);
      break;
    }
    case SystemId::Lifted:
    case SystemId::LiftedPerturbed: {
      const double x = s[0], z1 = s[1], z2 = s[2];
      const double rho2 = z1 * z1 + z2 * z2, u = rho2 - 1.0;
      const double W = 0.5 * x * x - 0.25 * x * x * x * x + 0.5 * u * u - 0.25;
      const double B = x - x * x * x - eps * u * W;
      d[0] = 2.0 * (1.0 - rho2) * rho2;
      d[1] = z1 * B - z2;
      d[2] = z2 * B + z1;
      if (id_ == SystemId::LiftedPerturbed) d[1] += params_.lambda * (x * x - 1.0);
      break;
    }
  }
}

State System::rhs(const State& y) const {
  State d(dim());
  rhs(y, d);
  return d;
}

Eigen::MatrixXd System::jacobian(const State& s) const {
  const double eps = params_.eps_pert;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim(), dim());
  switch (id_) {
    case SystemId::PlanarConservative: {
      J(0, 1) = -1.0;
      J(1, 0) = 1.0 - 3.0 * s[0] * s[0];
      break;
    }
    case SystemId::PlanarBowen: {
      const double x = s[0], y = s[1];
      const double g = first_integral(x, y) - 0.25;
      J(0, 1) = -1.0;
      J(1, 0) = 1.0 - 3.0 * x * x - eps * y * (x - x * x * x);
      J(1, 1) = -eps * (g + y * y);
      break;
    }
    case SystemId::PlanarBowenTilde: {
      const double x = s[0], y = s[1];
      double V, Vx, Vxx;
      tilde_parts(x, params_.tilde_coeffs, V, Vx, Vxx);
      J(0, 1) = -1.0;
      J(1, 0) = Vxx - eps * y * Vx;
      J(1, 1) = -eps * (V + 1.5 * y * y);
      break;
    }
    case SystemId::Translated: {
      const double x = s[0], z = s[1];
      const double z2 = z * z, u = z2 - 1.0;
      const double W = 0.5 * x * x - 0.25 * x * x * x * x + 0.5 * u * u - 0.25;
      const double B = x - x * x * x - eps * W * u;
      J(0, 1) = 4.0 * z * (1.0 - 2.0 * z2);
      J(1, 0) = z * (1.0 - 3.0 * x * x - eps * u * (x - x * x * x));
      // dB/dz = -eps (2z u W_u + 2z W) with W_u = u
      J(1, 1) = B + z * (-eps * 2.0 * z * (W + u * u));
      break;
    }
    case SystemId::Lifted:
    case SystemId::LiftedPerturbed: {
      const double x = s[0], z1 = s[1], z2 = s[2];
      const double rho2 = z1 * z1 + z2 * z2, u = rho2 - 1.0;
      const double W = 0.5 * x * x - 0.25 * x * x * x * x + 0.5 * u * u - 0.25;
      const double B = x - x * x * x - eps * u * W;
      const double Bx = 1.0 - 3.0 * x * x - eps * u * (x - x * x * x);
      const double B1 = -2.0 * eps * z1 * (W + u * u);
      const double B2 = -2.0 * eps * z2 * (W + u * u);
      J(0, 1) = 4.0 * z1 * (1.0 - 2.0 * rho2);
      J(0, 2) = 4.0 * z2 * (1.0 - 2.0 * rho2);
      J(1, 0) = z1 * Bx;
      J(1, 1) = B + z1 * B1;
      J(1, 2) = z1 * B2 - 1.0;
      J(2, 0) = z2 * Bx;
      J(2, 1) = z2 * B1 + 1.0;
      J(2, 2) = B + z2 * B2;
      if (id_ == SystemId::LiftedPerturbed) J(1, 0) += 2.0 * params_.lambda * x;
      break;
    }
  }
  return J;
}

Rhs System::as_rhs() const {
  return [sys = *this](double, const State& y, State& d) { sys.rhs(y, d); };
}

}  // namespace hetlab::ode
