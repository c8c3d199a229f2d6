#include "hetlab/tangency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hetlab/io.hpp"

namespace hetlab {

AngleFunction from_curve(const ManifoldCurve& c) {
  auto p = std::make_shared<ManifoldCurve>(c);
  return {[p](double x) { return p->spline(x); }, [p](double x) { return p->spline.deriv(x); },
          [p](double x) { return p->spline.deriv2(x); }};
}

// ---------------------------------------------------------------------------
// Spiral

double SpiralCurve::phi(double t) const { return t - std::log(h.f(t) / pp.epsilon) / pp.e; }

double SpiralCurve::dphi(double t) const { return 1.0 - h.d1(t) / (pp.e * h.f(t)); }

double SpiralCurve::d2phi(double t) const {
  const double v = h.f(t), v1 = h.d1(t), v2 = h.d2(t);
  return -(v2 * v - v1 * v1) / (pp.e * v * v);
}

double SpiralCurve::r(double t) const {
  return 1.0 + pp.epsilon * std::exp(pp.delta * std::log(h.f(t) / pp.epsilon));
}

double SpiralCurve::dr(double t) const { return pp.delta * (r(t) - 1.0) * h.d1(t) / h.f(t); }

double SpiralCurve::d2r(double t) const {
  const double v = h.f(t), q = h.d1(t) / v;
  return pp.delta * (r(t) - 1.0) * ((pp.delta - 1.0) * q * q + h.d2(t) / v);
}

namespace {

void check_passage(const PassageParams& pp) {
  if (!(pp.e > 0.0) || !(pp.delta > 0.0) || !(pp.epsilon > 0.0))
    throw InputError("passage parameters e, delta, epsilon must be positive");
}

template <class Fn>
double bisect_root(Fn f, double a, double b, double fa) {
  for (int i = 0; i < 200 && b - a > 4e-16 * std::max(1.0, std::abs(a)); ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

SpiralCurve spiral_shell(const AngleFunction& h, double I1, double I2, const PassageParams& pp) {
  check_passage(pp);
  if (!(I2 > I1)) throw DomainError("spiral needs I1 < I2");
  SpiralCurve sp;
  sp.h = h;
  sp.I1 = I1;
  sp.I2 = I2;
  sp.pp = pp;
  return sp;
}

}  // namespace

SpiralCurve build_spiral(const AngleFunction& h, double I1, double I2, const PassageParams& pp,
                         std::size_t scan_points) {
  SpiralCurve sp = spiral_shell(h, I1, I2, pp);
  scan_points = std::max<std::size_t>(scan_points, 16);
  const double width = I2 - I1;
  const double margin = 1e-6 * width;
  const double a = I1 + margin, b = I2 - margin;
  std::vector<double> th(scan_points + 1), v(scan_points + 1);
  for (std::size_t i = 0; i <= scan_points; ++i) {
    th[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(scan_points);
    v[i] = h.f(th[i]);
    if (!(v[i] > 0.0)) throw DomainError("spiral needs h > 0 on (I1, I2)");
  }

  bool found = false;
  for (std::size_t i = 0; i < scan_points; ++i) {
    const double d0 = sp.dphi(th[i]), d1 = sp.dphi(th[i + 1]);
    if (d0 < 0.0 && d1 >= 0.0) {
      const double t = d1 == 0.0 ? th[i + 1]
                                 : bisect_root([&](double x) { return sp.dphi(x); }, th[i], th[i + 1], d0);
      const double rr = sp.r(t);
      if (!found || rr > sp.fold.r) sp.fold = {t, sp.phi(t), rr};
      found = true;
    }
  }
  if (!found) throw NoFoldError("phi' has no sign change from - to + on (I1, I2)");

  const auto it = std::max_element(v.begin(), v.end());
  const auto im = static_cast<std::size_t>(it - v.begin());
  double lo = th[im == 0 ? 0 : im - 1], hi = th[std::min(im + 1, scan_points)];
  // golden section on h
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  double fc = h.f(c), fd = h.f(d);
  for (int k = 0; k < 200 && hi - lo > 1e-14; ++k) {
    if (fc > fd) {
      hi = d; d = c; fd = fc; c = hi - g * (hi - lo); fc = h.f(c);
    } else {
      lo = c; c = d; fc = fd; d = lo + g * (hi - lo); fd = h.f(d);
    }
  }
  sp.theta_max = 0.5 * (lo + hi);
  if (h.f(sp.theta_max) < *it) sp.theta_max = th[im];
  sp.max_radius = sp.r(sp.theta_max);
  return sp;
}

SpiralCurve build_spiral(const ManifoldCurve& h, const PassageParams& pp, std::size_t scan_points) {
  if (!h.has_pair) throw DomainError("h curve has no (I1, I2) pair of zeros");
  return build_spiral(from_curve(h), h.first, h.second, pp, scan_points);
}

// ---------------------------------------------------------------------------
// Families

AngleFunction SineFamily::h(double lambda) const {
  const double a = lambda * h_amp_;
  return {[a](double t) { return a * std::sin(t); }, [a](double t) { return a * std::cos(t); },
          [a](double t) { return -a * std::sin(t); }};
}

AngleFunction SineFamily::g(double lambda) const {
  const double a = lambda * g_amp_, c = 1.0 + g_offset_;
  return {[a, c](double p) { return c + a * std::sin(p); }, [a](double p) { return a * std::cos(p); },
          [a](double p) { return -a * std::sin(p); }};
}

CachedCurveFamily::CachedCurveFamily(ode::SystemParams base, int node, double lambda_lo, double lambda_hi,
                                     ManifoldOptions opts, int per_decade, bool reextract)
    : base_(base), node_(node), opts_(std::move(opts)), reextract_(reextract) {
  if (!(lambda_lo > 0.0) || !(lambda_hi > lambda_lo)) throw InputError("need 0 < lambda_lo < lambda_hi");
  if (per_decade < 1) throw InputError("per_decade must be positive");
  const double decades = std::log10(lambda_hi / lambda_lo);
  const auto n = static_cast<std::size_t>(std::ceil(decades * per_decade - 1e-9));
  for (std::size_t i = 0; i <= n; ++i)
    lambdas_.push_back(lambda_lo * std::pow(lambda_hi / lambda_lo, static_cast<double>(i) / static_cast<double>(n)));
  lambdas_.back() = lambda_hi;
  for (double l : lambdas_) cache_.push_back(extract(l));
}

CachedCurveFamily::Entry CachedCurveFamily::extract(double lambda) const {
  auto p = base_;
  p.lambda = lambda;
  const ode::System sys(ode::SystemId::LiftedPerturbed, p);
  const auto orbits = lifted_orbits(sys, opts_.orbit);
  // h_a comes from the connection arriving at node a, g_a from the one leaving it
  Entry e;
  e.h = h_curve(trace_connection(sys, node_ + 1, orbits, opts_), opts_.grid);
  e.g = g_curve(trace_connection(sys, node_, orbits, opts_), opts_.grid);
  return e;
}

CachedCurveFamily::Entry CachedCurveFamily::at(double lambda) const {
  if (lambda < lambdas_.front() * (1 - 1e-12) || lambda > lambdas_.back() * (1 + 1e-12))
    throw DomainError("lambda outside the cached range");
  const auto it = std::lower_bound(lambdas_.begin(), lambdas_.end(), lambda);
  const auto j = static_cast<std::size_t>(it - lambdas_.begin());
  if (j < lambdas_.size() && lambdas_[j] == lambda) return cache_[j];
  if (reextract_) {
    std::lock_guard<std::mutex> lock(mu_);
    auto& slot = extra_[lambda];
    if (!slot) slot = std::make_shared<Entry>(extract(lambda));
    return *slot;
  }
  const std::size_t hi = std::min(std::max<std::size_t>(j, 1), lambdas_.size() - 1);
  const std::size_t lo = hi - 1;
  const double w = (lambda - lambdas_[lo]) / (lambdas_[hi] - lambdas_[lo]);
  auto mix = [w](const ManifoldCurve& a, const ManifoldCurve& b, double lam) {
    std::vector<double> v(a.values.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (1.0 - w) * a.values[i] + w * b.values[i];
    return make_curve(a.kind, a.node, lam, std::move(v));
  };
  return {mix(cache_[lo].h, cache_[hi].h, lambda), mix(cache_[lo].g, cache_[hi].g, lambda)};
}

AngleFunction CachedCurveFamily::h(double lambda) const { return from_curve(at(lambda).h); }

std::pair<double, double> CachedCurveFamily::h_interval(double lambda) const {
  const auto e = at(lambda);
  if (!e.h.has_pair) throw DomainError("h curve does not have exactly two zeros at this lambda");
  return {e.h.first, e.h.second};
}

AngleFunction CachedCurveFamily::g(double lambda) const { return from_curve(at(lambda).g); }

// ---------------------------------------------------------------------------
// Scan

std::string to_string(TangencyKind k) { return k == TangencyKind::EnterA ? "enter_A" : "leave_A"; }

Clearance clearance_at(const SpiralCurve& sp, const AngleFunction& g, double theta) {
  const double ph = sp.phi(theta);
  const double dp = sp.dphi(theta);
  const double g1 = g.d1(ph);
  return {sp.r(theta) - g.f(ph), sp.dr(theta) - g1 * dp, sp.d2r(theta) - g.d2(ph) * dp * dp - g1 * sp.d2phi(theta)};
}

int transverse_count(const SpiralCurve& sp, const AngleFunction& g, std::size_t points) {
  const double target = sp.fold.phi + 0.5 * std::numbers::pi;
  auto edge = [&](double a, double b) {
    // phi - target changes sign on [a, b]; a or b may be an endpoint of (I1, I2)
    const double fa = sp.phi(a) - target;
    return bisect_root([&](double x) { return sp.phi(x) - target; }, a, b, fa);
  };
  const double m = 1e-9 * (sp.I2 - sp.I1);
  const double lo = sp.phi(sp.I1 + m) > target ? edge(sp.I1 + m, sp.fold.theta) : sp.I1 + m;
  const double hi = sp.phi(sp.I2 - m) > target ? edge(sp.fold.theta, sp.I2 - m) : sp.I2 - m;
  int count = 0;
  double prev = clearance_at(sp, g, lo).F;
  for (std::size_t i = 1; i <= points; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points);
    const double cur = clearance_at(sp, g, t).F;
    if ((prev < 0.0 && cur >= 0.0) || (prev > 0.0 && cur <= 0.0)) ++count;
    prev = cur;
  }
  return count;
}

namespace {

double fold_clearance(const CurveFamily& fam, const PassageParams& pp, double lambda) {
  const auto [I1, I2] = fam.h_interval(lambda);
  const auto sp = build_spiral(fam.h(lambda), I1, I2, pp);
  return clearance_at(sp, fam.g(lambda), sp.fold.theta).F;
}

struct Residual {
  double F, Ft, Ftt;
};

Residual residual(const CurveFamily& fam, const PassageParams& pp, double theta, double lambda) {
  const auto [I1, I2] = fam.h_interval(lambda);
  const auto sp = spiral_shell(fam.h(lambda), I1, I2, pp);
  const auto c = clearance_at(sp, fam.g(lambda), theta);
  return {c.F, c.F_theta, c.F_thetatheta};
}

Tangency refine(const CurveFamily& fam, const PassageParams& pp, double lo, double hi, double c_lo,
                const ScanOptions& opts) {
  // bisection in log lambda on the fold clearance
  double a = std::log(lo), b = std::log(hi), fa = c_lo;
  for (int i = 0; i < 200 && b - a > 1e-13; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = fold_clearance(fam, pp, std::exp(m));
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  double s = 0.5 * (a + b);
  double theta;
  {
    const double lam = std::exp(s);
    const auto [I1, I2] = fam.h_interval(lam);
    theta = build_spiral(fam.h(lam), I1, I2, pp).fold.theta;
  }

  // Newton on (theta, log lambda) for F = F_theta = 0
  const double s_min = std::log(lo) - std::numbers::pi * pp.e / 2.0;
  const double s_max = std::log(hi) + std::numbers::pi * pp.e / 2.0;
  Residual R = residual(fam, pp, theta, std::exp(s));
  for (int it = 0; it < 60; ++it) {
    if (std::abs(R.F) <= opts.tol && std::abs(R.Ft) <= opts.tol) break;
    const double ds = 1e-6;
    const Residual Rp = residual(fam, pp, theta, std::exp(s + ds));
    const Residual Rm = residual(fam, pp, theta, std::exp(s - ds));
    const double F_s = (Rp.F - Rm.F) / (2 * ds), Ft_s = (Rp.Ft - Rm.Ft) / (2 * ds);
    const double det = R.Ft * Ft_s - F_s * R.Ftt;
    if (!(std::abs(det) > 0.0)) break;
    const double dth = -(Ft_s * R.F - F_s * R.Ft) / det;
    const double dss = -(-R.Ftt * R.F + R.Ft * R.Ft) / det;
    theta += dth;
    s += dss;
    if (!(s > s_min && s < s_max) || !std::isfinite(theta))
      throw TangencyRefinementError("tangency Newton left the bracket", lo, hi);
    const auto [I1, I2] = fam.h_interval(std::exp(s));
    if (!(theta > I1 && theta < I2)) throw TangencyRefinementError("tangency Newton left (I1, I2)", lo, hi);
    R = residual(fam, pp, theta, std::exp(s));
    if (std::abs(dth) < 1e-15 && std::abs(dss) < 1e-15) break;
  }
  if (!(std::abs(R.F) <= 1e-9 && std::abs(R.Ft) <= 1e-9))
    throw TangencyRefinementError("tangency Newton did not converge", lo, hi);

  Tangency t;
  t.lambda = std::exp(s);
  t.theta = theta;
  const auto [I1, I2] = fam.h_interval(t.lambda);
  const auto sp = spiral_shell(fam.h(t.lambda), I1, I2, pp);
  t.phi_unwrapped = sp.phi(theta);
  t.r = sp.r(theta);
  t.F = R.F;
  t.F_theta = R.Ft;
  t.F_thetatheta = R.Ftt;
  t.kind = R.Ftt < 0.0 ? TangencyKind::EnterA : TangencyKind::LeaveA;
  t.bracket_lo = lo;
  t.bracket_hi = hi;
  return t;
}

int count_at(const CurveFamily& fam, const PassageParams& pp, double lambda) {
  const auto [I1, I2] = fam.h_interval(lambda);
  const auto sp = build_spiral(fam.h(lambda), I1, I2, pp);
  return transverse_count(sp, fam.g(lambda));
}

}  // namespace

TangencyScanResult tangency_scan(const CurveFamily& fam, const PassageParams& pp, const ScanOptions& opts) {
  check_passage(pp);
  if (!(opts.lambda_lo > 0.0) || !(opts.lambda_hi > opts.lambda_lo))
    throw InputError("scan range needs 0 < lambda_lo < lambda_hi");

  TangencyScanResult res;
  // geometric grid, ratio at most exp(-pi e / 4): eight samples per fold revolution
  const double span = std::log(opts.lambda_hi / opts.lambda_lo);
  const auto n = static_cast<std::size_t>(std::ceil(span / (std::numbers::pi * pp.e / 4.0)));
  for (std::size_t i = 0; i <= n; ++i)
    res.grid.push_back(opts.lambda_hi * std::exp(-span * static_cast<double>(i) / static_cast<double>(n)));
  res.grid.back() = opts.lambda_lo;

  res.clearance.assign(res.grid.size(), 0.0);
  for_each_index(opts.exec, res.grid.size(),
                 [&](std::size_t i) { res.clearance[i] = fold_clearance(fam, pp, res.grid[i]); });

  std::vector<std::size_t> brackets;
  for (std::size_t i = 0; i + 1 < res.grid.size(); ++i) {
    const double a = res.clearance[i], b = res.clearance[i + 1];
    if ((a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0) || (a == 0.0 && b != 0.0)) brackets.push_back(i);
  }

  std::vector<Tangency> found(brackets.size());
  for_each_index(opts.exec, brackets.size(), [&](std::size_t q) {
    const std::size_t i = brackets[q];
    // grid runs downward in lambda
    Tangency t = refine(fam, pp, res.grid[i + 1], res.grid[i], res.clearance[i + 1], opts);
    t.count_above = count_at(fam, pp, t.lambda * (1.0 + opts.kappa));
    t.count_below = count_at(fam, pp, t.lambda * (1.0 - opts.kappa));
    found[q] = t;
  });

  std::sort(found.begin(), found.end(), [](const Tangency& a, const Tangency& b) { return a.lambda > b.lambda; });
  for (const auto& t : found) {
    if (opts.kind == KindFilter::EnterA && t.kind != TangencyKind::EnterA) continue;
    if (opts.kind == KindFilter::LeaveA && t.kind != TangencyKind::LeaveA) continue;
    if (!res.tangencies.empty() && std::abs(res.tangencies.back().lambda - t.lambda) <= 1e-10 * t.lambda) continue;
    if (res.tangencies.size() >= opts.count) break;
    res.tangencies.push_back(t);
  }
  return res;
}

nlohmann::json scan_to_json(const TangencyScanResult& res) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& t : res.tangencies) {
    list.push_back({{"lambda", t.lambda},
                   {"theta", t.theta},
                   {"phi_unwrapped", t.phi_unwrapped},
                   {"r", t.r},
                   {"residuals", {t.F, t.F_theta}},
                   {"F_thetatheta", t.F_thetatheta},
                   {"kind", to_string(t.kind)},
                   {"transverse_counts", {t.count_above, t.count_below}}});
  }
  // lambda_{i+1}/lambda_i for neighbours, and the same with one tangency skipped
  nlohmann::json ratios = nlohmann::json::array(), skip = nlohmann::json::array();
  const auto& ts = res.tangencies;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) ratios.push_back(ts[i + 1].lambda / ts[i].lambda);
  for (std::size_t i = 0; i + 2 < ts.size(); ++i) skip.push_back(ts[i + 2].lambda / ts[i].lambda);
  return {{"tangencies", list}, {"ratios", ratios}, {"ratios_skip_one", skip}};
}

}  // namespace hetlab
