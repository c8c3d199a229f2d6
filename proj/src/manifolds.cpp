#include "hetlab/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "hetlab/io.hpp"
#include "hetlab/ode/events.hpp"

namespace hetlab {

namespace {

double bisect(const PeriodicSpline& s, double level, double a, double b) {
  double fa = s(a) - level;
  for (int i = 0; i < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++i) {
    const double m = 0.5 * (a + b);
    const double fm = s(m) - level;
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

double golden_max(const PeriodicSpline& s, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = s(c), fd = s(d);
  for (int i = 0; i < 200 && b - a > 1e-13; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = s(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = s(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

void analyse_curve(ManifoldCurve& c) {
  const std::size_t n = c.values.size();
  c.crossings.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const double a = c.values[i] - c.level, b = c.values[j] - c.level;
    if (a == 0.0) {
      // sample on the level: a crossing if its neighbours disagree in sign
      const double p = c.values[(i + n - 1) % n] - c.level;
      if ((p < 0.0 && b > 0.0) || (p > 0.0 && b < 0.0)) c.crossings.emplace_back(c.angles[i], b > p ? 1 : -1);
      continue;
    }
    if ((a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)) {
      const double lo = c.angles[i];
      const double hi = j == 0 ? kTwoPi : c.angles[j];
      c.crossings.emplace_back(wrap_angle(bisect(c.spline, c.level, lo, hi)), b > a ? 1 : -1);
    }
  }
  std::sort(c.crossings.begin(), c.crossings.end());

  c.has_pair = false;
  if (c.crossings.size() == 2 && c.crossings[0].second != c.crossings[1].second) {
    const auto& up = c.crossings[0].second > 0 ? c.crossings[0] : c.crossings[1];
    const auto& down = c.crossings[0].second > 0 ? c.crossings[1] : c.crossings[0];
    c.first = up.first;
    c.second = down.first;
    if (c.second <= c.first) c.second += kTwoPi;
    c.has_pair = true;
  }

  const auto it = std::max_element(c.values.begin(), c.values.end());
  const auto i = static_cast<std::size_t>(it - c.values.begin());
  const double step = kTwoPi / static_cast<double>(n);
  const double x = golden_max(c.spline, c.angles[i] - step, c.angles[i] + step);
  c.arg_max = wrap_angle(x);
  c.max_value = std::max(*it, c.spline(x));
}

ManifoldCurve make_curve(CurveKind kind, int node, double lambda, std::vector<double> values) {
  ManifoldCurve c;
  c.kind = kind;
  c.node = node;
  c.lambda = lambda;
  c.level = kind == CurveKind::UnstableOnIn ? 0.0 : 1.0;
  const std::size_t n = values.size();
  c.angles.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.angles[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
  c.values = std::move(values);
  c.spline = PeriodicSpline(c.angles, c.values);
  analyse_curve(c);
  return c;
}

double node_level(int a) { return (a % 2 == 0) ? 1.0 : -1.0; }

std::array<ode::PeriodicOrbitData, 2> lifted_orbits(const ode::System& sys, const ode::PeriodicOrbitOptions& opts) {
  return {ode::periodic_orbit(sys, node_level(0), opts), ode::periodic_orbit(sys, node_level(1), opts)};
}

namespace {

struct SeedHits {
  bool reached_first = false;
  bool reached_second = false;
  double angle_first = 0.0, rho_first = 0.0;
  double angle_second = 0.0, rho_second = 0.0;
};

// Integrates one seed until it has crossed both planes (first plane1, then plane2).
SeedHits run_seed(const ode::System& sys, const Vec3& x0, double dir, double plane1, double plane2,
                  const ManifoldOptions& opts) {
  SeedHits hits;
  const ode::EventLocator loc1(ode::coordinate_plane(0, plane1));
  const ode::EventLocator loc2(ode::coordinate_plane(0, plane2));
  int stage = 0;
  std::vector<ode::Crossing> found;
  auto record = [](const ode::State& y, double& angle, double& rho) {
    angle = std::atan2(y[2], y[1]);
    rho = std::hypot(y[1], y[2]);
  };
  ode::State y0(3);
  y0 << x0[0], x0[1], x0[2];
  try {
    ode::integrate(sys.as_rhs(), 0.0, y0, dir * opts.t_max, opts.controls, [&](const ode::DenseStep& s) {
      if (s.r1.cwiseAbs().maxCoeff() > 10.0) return false;
      found.clear();
      if (stage == 0) {
        loc1.on_step(s, found);
        if (!found.empty()) {
          const double t1 = found.front().t;
          record(found.front().y, hits.angle_first, hits.rho_first);
          stage = 1;
          // the second plane may be crossed later in the same step
          found.clear();
          loc2.on_step(s, found);
          for (const auto& c : found) {
            if ((c.t - t1) * dir > 0.0) {
              record(c.y, hits.angle_second, hits.rho_second);
              stage = 2;
              break;
            }
          }
        }
      } else if (stage == 1) {
        loc2.on_step(s, found);
        if (!found.empty()) {
          record(found.front().y, hits.angle_second, hits.rho_second);
          stage = 2;
        }
      }
      return stage < 2;
    });
  } catch (const ode::IntegrationError&) {
    // keep whatever was recorded before the failure
  }
  hits.reached_first = stage >= 1;
  hits.reached_second = stage >= 2;
  return hits;
}

void unwrap_push(SectionTrace& tr, double phase, double angle, double rho) {
  double a = angle;
  if (!tr.angle.empty()) {
    const double prev = tr.angle.back();
    a = prev + std::remainder(angle - prev, kTwoPi);
  }
  tr.phase.push_back(phase);
  tr.angle.push_back(a);
  tr.rho.push_back(rho);
}

}  // namespace

ConnectionTraces trace_connection(const ode::System& sys, int from, const ManifoldOptions& opts) {
  return trace_connection(sys, from, lifted_orbits(sys, opts.orbit), opts);
}

ConnectionTraces trace_connection(const ode::System& sys, int from,
                                  const std::array<ode::PeriodicOrbitData, 2>& orbits,
                                  const ManifoldOptions& opts) {
  if (!sys.is_lifted()) throw InputError("manifold curves are extracted for the lifted systems only");
  if (opts.ring_size < 8) throw InputError("ring size must be at least 8");
  if (!(opts.eta > 0.0)) throw InputError("seed displacement must be positive");
  const int a = from % 2;
  const int b = (a + 1) % 2;
  const double xa = node_level(a), xb = node_level(b);
  const double out_plane = xa * (1.0 - opts.section_offset);
  const double in_plane = xb * (1.0 - opts.section_offset);
  const auto& Pa = orbits[static_cast<std::size_t>(a)];
  const auto& Pb = orbits[static_cast<std::size_t>(b)];

  const std::size_t n = opts.ring_size;
  std::vector<SeedHits> uhits(n), shits(n);
  std::vector<double> uphase(n), sphase(n);
  // seeds are independent; results land in fixed slots so the reduction is order-free
  for_each_index(opts.exec, 2 * n, [&](std::size_t idx) {
    const bool unstable = idx < n;
    const std::size_t i = unstable ? idx : idx - n;
    const auto& P = unstable ? Pa : Pb;
    const double phase = P.period * static_cast<double>(i) / static_cast<double>(n);
    const auto fr = ode::orbit_frame(sys, P, phase, opts.controls);
    Vec3 v = unstable ? fr.unstable : fr.stable;
    // unstable branch heads toward P_{a+1}, stable branch is approached from P_a
    const double toward = unstable ? (xb - xa) : (xa - xb);
    if (v[0] * toward < 0.0) v = -v;
    const Vec3 seed = fr.point + opts.eta * v;
    if (unstable) {
      uphase[i] = phase;
      uhits[i] = run_seed(sys, seed, 1.0, out_plane, in_plane, opts);
    } else {
      sphase[i] = phase;
      shits[i] = run_seed(sys, seed, -1.0, in_plane, out_plane, opts);
    }
  });

  ConnectionTraces tr;
  tr.from = a;
  tr.lambda = sys.params().lambda;
  const double wu = Pa.period / static_cast<double>(n), ws = Pb.period / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& u = uhits[i];
    const std::pair<double, double> uw{uphase[i] - 0.5 * wu, uphase[i] + 0.5 * wu};
    if (u.reached_first) unwrap_push(tr.unstable_out, uphase[i], u.angle_first, u.rho_first);
    else tr.unstable_out.missing.push_back(uw);
    if (u.reached_second) unwrap_push(tr.unstable_in, uphase[i], u.angle_second, u.rho_second);
    else tr.unstable_in.missing.push_back(uw);
    // stable seeds run backward, so the first plane they meet is In(P_{a+1})
    const auto& s = shits[i];
    const std::pair<double, double> sw{sphase[i] - 0.5 * ws, sphase[i] + 0.5 * ws};
    if (s.reached_first) unwrap_push(tr.stable_in, sphase[i], s.angle_first, s.rho_first);
    else tr.stable_in.missing.push_back(sw);
    if (s.reached_second) unwrap_push(tr.stable_out, sphase[i], s.angle_second, s.rho_second);
    else tr.stable_out.missing.push_back(sw);
  }
  return tr;
}

PeriodicSpline trace_spline(const SectionTrace& tr) {
  if (!tr.missing.empty()) {
    // merge neighbouring seed windows so the message stays short
    std::vector<std::pair<double, double>> merged;
    for (const auto& w : tr.missing) {
      if (!merged.empty() && std::abs(w.first - merged.back().second) < 1e-9) {
        merged.back().second = w.second;
      } else {
        merged.push_back(w);
      }
    }
    std::ostringstream msg;
    msg << tr.missing.size() << " ring seeds did not reach the section; missing phase windows";
    for (const auto& w : merged) msg << " [" << w.first << ", " << w.second << "]";
    throw IncompleteCurveError(msg.str(), merged);
  }
  const std::size_t n = tr.angle.size();
  if (n < 3) throw InputError("section trace too short");
  for (std::size_t i = 1; i < n; ++i)
    if (!(tr.angle[i] > tr.angle[i - 1]))
      throw NonGraphError("section trace folds: angle decreases at seed " + std::to_string(i));
  const double span = tr.angle.back() - tr.angle.front();
  const double gap = tr.angle.front() + kTwoPi - tr.angle.back();
  if (!(span < kTwoPi) || !(gap > 0.0))
    throw NonGraphError("section trace does not wind exactly once around the axis");

  std::vector<std::pair<double, double>> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = {wrap_angle(tr.angle[i]), tr.rho[i]};
  std::sort(pts.begin(), pts.end());
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = pts[i].first;
    y[i] = pts[i].second;
  }
  return PeriodicSpline(std::move(x), std::move(y));
}

namespace {

ManifoldCurve difference_curve(CurveKind kind, int node, double lambda, const SectionTrace& plus,
                               const SectionTrace& minus, double offset, std::size_t grid) {
  if (grid < 16) throw InputError("curve grid must have at least 16 points");
  const PeriodicSpline sp = trace_spline(plus);
  const PeriodicSpline sm = trace_spline(minus);
  std::vector<double> v(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    const double th = kTwoPi * static_cast<double>(i) / static_cast<double>(grid);
    v[i] = offset + sp(th) - sm(th);
  }
  return make_curve(kind, node, lambda, std::move(v));
}

}  // namespace

ManifoldCurve h_curve(const ConnectionTraces& tr, std::size_t grid) {
  return difference_curve(CurveKind::UnstableOnIn, (tr.from + 1) % 2, tr.lambda, tr.unstable_in, tr.stable_in, 0.0,
                          grid);
}

ManifoldCurve g_curve(const ConnectionTraces& tr, std::size_t grid) {
  return difference_curve(CurveKind::StableOnOut, tr.from, tr.lambda, tr.stable_out, tr.unstable_out, 1.0, grid);
}

ManifoldCurve extract_unstable_curve(const ode::System& sys, int a, const ManifoldOptions& opts) {
  return h_curve(trace_connection(sys, a, opts), opts.grid);
}

ManifoldCurve extract_stable_curve(const ode::System& sys, int a, const ManifoldOptions& opts) {
  return g_curve(trace_connection(sys, a, opts), opts.grid);
}

double class_C_margin(double epsilon, double delta_a, double max_in, double max_out) {
  if (!(epsilon > 0.0) || !(delta_a > 0.0)) throw InputError("margin needs epsilon > 0 and delta > 0");
  const double lift = max_in > 0.0 ? std::pow(epsilon, 1.0 - delta_a) * std::pow(max_in, delta_a) : 0.0;
  return max_out - (1.0 + lift);
}

void write_curve_csv(std::ostream& os, const ManifoldCurve& c, bool header) {
  if (header) os << "angle,value,kind,node,lambda\n";
  const char* kind = c.kind == CurveKind::UnstableOnIn ? "h" : "g";
  for (std::size_t i = 0; i < c.angles.size(); ++i)
    os << fmt17(c.angles[i]) << ',' << fmt17(c.values[i]) << ',' << kind << ',' << (c.node + 1) << ','
       << fmt17(c.lambda) << '\n';
}

nlohmann::json curve_summary_json(const ManifoldCurve& c) {
  nlohmann::json cr = nlohmann::json::array();
  for (const auto& [angle, slope] : c.crossings) cr.push_back({{"angle", angle}, {"slope", slope}});
  nlohmann::json j{{"kind", c.kind == CurveKind::UnstableOnIn ? "h" : "g"},
                   {"node", c.node + 1},
                   {"lambda", c.lambda},
                   {"max", c.max_value},
                   {"arg_max", c.arg_max},
                   {"crossings", cr}};
  if (c.has_pair) j["pair"] = {c.first, c.second};
  return j;
}

}  // namespace hetlab
