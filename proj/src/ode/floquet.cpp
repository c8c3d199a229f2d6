#include "hetlab/ode/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "hetlab/io.hpp"

namespace hetlab::ode {

VariationalResult integrate_variational(const System& sys, const State& y0, double dt, const Controls& ctl) {
  const int d = sys.dim();
  State aug = State::Zero(d + d * d + 1);
  aug.head(d) = y0;
  Eigen::Map<Eigen::MatrixXd>(aug.data() + d, d, d).setIdentity();
  const Rhs f = [&sys, d](double, const State& s, State& ds) {
    ds.resize(s.size());
    const State y = s.head(d);
    State fy(d);
    sys.rhs(y, fy);
    const Eigen::MatrixXd J = sys.jacobian(y);
    ds.head(d) = fy;
    Eigen::Map<const Eigen::MatrixXd> Phi(s.data() + d, d, d);
    Eigen::Map<Eigen::MatrixXd>(ds.data() + d, d, d) = J * Phi;
    ds[d + d * d] = J.trace();
  };
  const auto res = integrate(f, 0.0, aug, dt, ctl);
  VariationalResult out;
  out.y = res.y.head(d);
  out.Phi = Eigen::Map<const Eigen::MatrixXd>(res.y.data() + d, d, d);
  out.trace_integral = res.y[d + d * d];
  return out;
}

namespace {

double dominant_modulus(const Eigen::MatrixXd& M, Eigen::VectorXd* vec = nullptr) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(M);
  const auto& ev = es.eigenvalues();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < ev.size(); ++i)
    if (std::abs(ev[i]) > std::abs(ev[best])) best = i;
  if (vec) *vec = es.eigenvectors().col(best).real();
  return std::abs(ev[best]);
}

Eigen::MatrixXd inverse_product(const std::vector<Eigen::MatrixXd>& factors) {
  // (F[n-1] ... F[0])^{-1} = F[0]^{-1} ... F[n-1]^{-1}
  const auto d = factors.front().rows();
  Eigen::MatrixXd Minv = Eigen::MatrixXd::Identity(d, d);
  for (const auto& F : factors) Minv = Minv * F.inverse();
  return Minv;
}

Eigen::MatrixXd product(const std::vector<Eigen::MatrixXd>& factors) {
  const auto d = factors.front().rows();
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(d, d);
  for (const auto& F : factors) M = F * M;
  return M;
}

Vec3 as_vec3(const Eigen::VectorXd& v) {
  Vec3 out = Vec3::Zero();
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(3, v.size()); ++i) out[i] = v[i];
  return out;
}

}  // namespace

MultiplierPair nontrivial_multipliers(const std::vector<Eigen::MatrixXd>& factors, double tie_tol) {
  if (factors.empty()) throw InputError("no monodromy factors");
  const Eigen::MatrixXd M = product(factors);
  Eigen::EigenSolver<Eigen::MatrixXd> es(M);
  int near_one = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()[i] - std::complex<double>(1.0, 0.0)) < tie_tol) ++near_one;
  if (near_one >= 2) throw ConvergenceError("degenerate monodromy: two multipliers within tolerance of 1");

  MultiplierPair p;
  p.unstable = dominant_modulus(M);
  p.stable = 1.0 / dominant_modulus(inverse_product(factors));
  double det = 1.0;
  for (const auto& F : factors) det *= F.determinant();
  p.trivial = det / (p.unstable * p.stable);
  return p;
}

PeriodicOrbitData periodic_orbit(const System& sys, double x_level, const PeriodicOrbitOptions& opts) {
  if (!sys.is_lifted()) throw InputError("periodic orbits are computed for the lifted systems only");
  if (opts.segments < 2) throw InputError("need at least 2 shooting segments");
  if (opts.samples_per_segment < 2 || opts.samples_per_segment % 2) throw InputError("samples per segment must be even");

  const int N = opts.segments;
  const int d = sys.dim();
  const int n = N * d + 1;
  const Rhs f = sys.as_rhs();

  std::vector<State> s(static_cast<std::size_t>(N), State(d));
  for (int i = 0; i < N; ++i) {
    const double th = kTwoPi * i / N;
    s[static_cast<std::size_t>(i)] << x_level, std::cos(th), std::sin(th);
  }
  double T = kTwoPi;

  std::vector<VariationalResult> seg(static_cast<std::size_t>(N));
  double closure = 0.0;
  int iter = 0;
  for (;; ++iter) {
    for (int i = 0; i < N; ++i)
      seg[static_cast<std::size_t>(i)] = integrate_variational(sys, s[static_cast<std::size_t>(i)], T / N, opts.controls);

    Eigen::VectorXd F(n);
    closure = 0.0;
    for (int i = 0; i < N; ++i) {
      const State mis = seg[static_cast<std::size_t>(i)].y - s[static_cast<std::size_t>((i + 1) % N)];
      F.segment(i * d, d) = mis;
      closure = std::max(closure, mis.cwiseAbs().maxCoeff());
    }
    F[n - 1] = s[0][2];
    const double res = std::max(closure, std::abs(F[n - 1]));
    // past the first corrections, accept anything inside the tolerance
    if (res <= 0.1 * opts.closure_tol || (iter >= 2 && res <= opts.closure_tol)) break;
    if (iter >= opts.max_newton)
      throw OrbitContinuationError("periodic orbit Newton did not converge (residual " + fmt17(res) + ")");

    Eigen::MatrixXd Jac = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < N; ++i) {
      const int j = (i + 1) % N;
      Jac.block(i * d, i * d, d, d) += seg[static_cast<std::size_t>(i)].Phi;
      Jac.block(i * d, j * d, d, d) -= Eigen::MatrixXd::Identity(d, d);
      Jac.block(i * d, n - 1, d, 1) = sys.rhs(seg[static_cast<std::size_t>(i)].y) / N;
    }
    Jac(n - 1, 2) = 1.0;
    const Eigen::VectorXd dx = Jac.partialPivLu().solve(-F);
    if (!dx.allFinite()) throw OrbitContinuationError("singular shooting Jacobian");
    for (int i = 0; i < N; ++i) s[static_cast<std::size_t>(i)] += dx.segment(i * d, d);
    T += dx[n - 1];
  }
  if (closure > opts.closure_tol)
    throw OrbitContinuationError("periodic orbit does not close: mismatch " + fmt17(closure));

  PeriodicOrbitData o;
  o.x_level = x_level;
  o.period = T;
  o.nodes = s;
  o.closure = closure;
  o.newton_iterations = iter;

  std::vector<Eigen::MatrixXd> factors;
  double trace_int = 0.0;
  for (const auto& g : seg) {
    factors.push_back(g.Phi);
    trace_int += g.trace_integral;
  }
  o.monodromy = product(factors);
  const auto mp = nontrivial_multipliers(factors);
  o.m_unstable = mp.unstable;
  o.m_stable = mp.stable;
  o.m_trivial = mp.trivial;
  o.det_monodromy = 1.0;
  for (const auto& F : factors) o.det_monodromy *= F.determinant();
  o.liouville = std::exp(trace_int);
  o.e = std::log(o.m_unstable);
  o.c = -std::log(o.m_stable);

  // Floquet directions: dominant eigenvectors at node 0, then transported.
  Eigen::VectorXd vu, vs;
  dominant_modulus(o.monodromy, &vu);
  dominant_modulus(inverse_product(factors), &vs);
  o.unstable_dirs.assign(static_cast<std::size_t>(N), Vec3::Zero());
  o.stable_dirs.assign(static_cast<std::size_t>(N), Vec3::Zero());
  Eigen::VectorXd u = vu.normalized();
  for (int i = 0; i < N; ++i) {
    o.unstable_dirs[static_cast<std::size_t>(i)] = as_vec3(u);
    u = (factors[static_cast<std::size_t>(i)] * u).normalized();
  }
  Eigen::VectorXd w = vs.normalized();
  for (int i = N - 1; i >= 0; --i) {
    w = factors[static_cast<std::size_t>(i)].partialPivLu().solve(w).normalized();
    o.stable_dirs[static_cast<std::size_t>(i)] = as_vec3(w);
  }

  // uniform samples and the centre by Simpson's rule
  const int m = opts.samples_per_segment;
  const double hseg = T / N;
  for (int i = 0; i < N; ++i) {
    const auto tr = integrate_dense(f, 0.0, s[static_cast<std::size_t>(i)], hseg, opts.controls);
    for (int j = 0; j < m + (i == N - 1 ? 1 : 0); ++j) {
      const double tl = hseg * j / m;
      o.times.push_back(i * hseg + tl);
      o.samples.push_back(j == 0 ? s[static_cast<std::size_t>(i)] : tr.eval(tl));
    }
  }
  const double hs = T / (static_cast<double>(N) * m);
  Vec3 acc = Vec3::Zero();
  const std::size_t last = o.samples.size() - 1;
  for (std::size_t q = 0; q <= last; ++q) {
    const double wq = (q == 0 || q == last) ? 1.0 : (q % 2 ? 4.0 : 2.0);
    acc += wq * as_vec3(o.samples[q]);
  }
  o.centre = acc * (hs / 3.0) / T;
  return o;
}

OrbitFrame orbit_frame(const System& sys, const PeriodicOrbitData& orbit, double t, const Controls& ctl) {
  const int N = static_cast<int>(orbit.nodes.size());
  const double hseg = orbit.period / N;
  double tt = std::fmod(t, orbit.period);
  if (tt < 0.0) tt += orbit.period;
  int i = std::min(N - 1, static_cast<int>(tt / hseg));
  const double dt = tt - i * hseg;
  const auto ui = static_cast<std::size_t>(i);
  OrbitFrame fr;
  if (dt <= 0.0) {
    fr.point = as_vec3(orbit.nodes[ui]);
    fr.unstable = orbit.unstable_dirs[ui];
    fr.stable = orbit.stable_dirs[ui];
    return fr;
  }
  const auto v = integrate_variational(sys, orbit.nodes[ui], dt, ctl);
  const auto d = static_cast<Eigen::Index>(sys.dim());
  fr.point = as_vec3(v.y);
  fr.unstable = as_vec3(v.Phi * orbit.unstable_dirs[ui].head(d)).normalized();
  fr.stable = as_vec3(v.Phi * orbit.stable_dirs[ui].head(d)).normalized();
  return fr;
}

nlohmann::json orbit_to_json(const PeriodicOrbitData& o) {
  return {{"x_level", o.x_level},
          {"period", o.period},
          {"centre", to_json(o.centre)},
          {"multipliers", {o.m_unstable, o.m_stable}},
          {"trivial_multiplier", o.m_trivial},
          {"exponents", {{"e", o.e}, {"c", o.c}}},
          {"det_monodromy", o.det_monodromy},
          {"liouville", o.liouville},
          {"closure", o.closure},
          {"newton_iterations", o.newton_iterations}};
}

}  // namespace hetlab::ode
