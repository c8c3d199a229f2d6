#include "hetlab/polygon.hpp"

#include <algorithm>
#include <limits>

#include "hetlab/io.hpp"

namespace hetlab {

double Polygon::diameter() const {
  double d = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    for (std::size_t j = i + 1; j < vertices.size(); ++j) d = std::max(d, (vertices[i] - vertices[j]).norm());
  return d;
}

Polygon polygon_vertices(const CycleSpec& spec) {
  const auto dc = derive_constants(spec);
  const int k = spec.k();
  Polygon p;
  p.delta = dc.delta;
  for (int a = 0; a < k; ++a) {
    Vec3 num = spec.node(a).xbar;
    double den = 1.0;
    double w = 1.0;
    for (int i = 1; i < k; ++i) {
      w *= dc.mu[static_cast<std::size_t>(spec.wrap(a + i))];
      num += w * spec.node(a + i).xbar;
      den += w;
    }
    p.num.push_back(num);
    p.den.push_back(den);
    p.vertices.push_back(num / den);
  }
  double scale = 0.0;
  for (const auto& n : spec.nodes()) scale = std::max(scale, n.xbar.norm());
  p.collapsed = p.diameter() <= 1e-12 * std::max(1.0, scale);
  return p;
}

std::vector<EdgeReport> check_collinearity(const Polygon& poly, const CycleSpec& spec, double tol) {
  const auto dc = derive_constants(spec);
  const int k = spec.k();
  std::vector<EdgeReport> out;
  for (int a = 0; a < k; ++a) {
    const int b = spec.wrap(a + 1);
    const auto ua = static_cast<std::size_t>(a);
    const auto ub = static_cast<std::size_t>(b);
    const double mu = dc.mu[ub];
    EdgeReport r;
    r.a = a;
    const double lhs_den = mu * poly.den[ub];
    const double rhs_den = poly.den[ua] - (1.0 - dc.delta);
    r.den_residual = std::abs(lhs_den - rhs_den) / std::max(1.0, std::abs(rhs_den));
    const Vec3 rhs_num = poly.num[ua] - (1.0 - dc.delta) * spec.node(a).xbar;
    r.num_residual = (mu * poly.num[ub] - rhs_num).norm() / std::max(1.0, rhs_num.norm());
    r.alpha = poly.den[ua] / lhs_den;
    r.beta = (dc.delta - 1.0) / lhs_den;
    r.combination_residual =
        (poly.vertices[ub] - (r.alpha * poly.vertices[ua] + r.beta * spec.node(a).xbar)).norm();
    r.alpha_in_unit_interval = r.alpha > 0.0 && r.alpha < 1.0;
    r.ok = r.den_residual <= tol && r.num_residual <= tol && r.combination_residual <= tol &&
           (!(dc.delta > 1.0) || r.alpha_in_unit_interval);
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kGoldenFrac = 0.6180339887498949;

double sample_offset(const TraceOptions& opts, long long j) {
  if (!opts.stagger) return 0.5;
  const double u = std::fmod(static_cast<double>(j) * kGoldenFrac, 1.0);
  return u > 0.0 ? u : 0.5;
}

}  // namespace

AverageTrace average_trace(const Itinerary& it, const CycleSpec& spec, const TraceOptions& opts) {
  if (it.records.empty()) throw DomainError("average of an empty itinerary is undefined");
  double total = 0.0;
  for (const auto& r : it.records) total += r.tau;
  if (!(total > 0.0)) throw DomainError("average undefined: itinerary has zero total time");

  AverageTrace tr;
  const std::size_t m = opts.samples_per_sojourn;
  tr.samples.reserve(it.records.size() * (m + 1));

  Vec3 R = Vec3::Zero();
  double T = 0.0;  // time covered so far, equal to the entry time of the current hit
  for (std::size_t i = 0; i < it.records.size(); ++i) {
    const auto& rec = it.records[i];
    const Vec3& x = spec.node(rec.node).xbar;
    if (T > 0.0) tr.samples.push_back({T, R, rec.j, 0.0});

    if (m > 0 && rec.tau > 0.0) {
      const double u = sample_offset(opts, rec.j);
      for (std::size_t q = 0; q < m; ++q) {
        const double frac = (static_cast<double>(q) + u) / static_cast<double>(m);
        double L = frac;
        if (opts.spacing == Spacing::ArcUniform && T > 0.0) {
          const double rho = rec.tau / T;
          const double s = frac * rho / (1.0 + rho);
          L = s / (rho * (1.0 - s));
        }
        const double t = T + L * rec.tau;
        if (!(t > 0.0)) continue;
        const double keep = T / t;
        tr.samples.push_back({t, keep * R + (1.0 - keep) * x, rec.j, L});
      }
    }

    double t_next = T + rec.tau;
    if (t_next > 0.0) {
      const double keep = T / t_next;
      R = keep * R + (1.0 - keep) * x;
    }
    T = t_next;
    if (it.transit_time > 0.0) {
      const Vec3 mid = 0.5 * (x + spec.node(rec.node + 1).xbar);
      t_next = T + it.transit_time;
      const double keep = T / t_next;
      R = keep * R + (1.0 - keep) * mid;
      T = t_next;
    }
  }
  tr.samples.push_back({T, R, it.records.back().j + 1, 0.0});
  return tr;
}

std::vector<Vec3> trace_tail(const AverageTrace& tr, int k, long long first_turn, long long last_turn) {
  std::vector<Vec3> out;
  for (const auto& s : tr.samples) {
    const long long turn = (s.j - 1) / k;
    if (turn >= first_turn && turn <= last_turn) out.push_back(s.R);
  }
  return out;
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

double accumulation_distance(const std::vector<Vec3>& points, const Polygon& poly, Exec exec,
                             std::size_t per_edge) {
  if (points.empty()) throw DomainError("accumulation distance needs a nonempty tail");
  const int k = poly.k();

  // boundary samples; a collapsed polygon is a single point
  std::vector<Vec3> boundary;
  if (poly.collapsed) {
    boundary.push_back(poly.vertices.front());
  } else {
    per_edge = std::max<std::size_t>(per_edge, 2);
    for (int a = 0; a < k; ++a) {
      const Vec3& A = poly.vertices[static_cast<std::size_t>(a)];
      const Vec3& B = poly.vertices[static_cast<std::size_t>((a + 1) % k)];
      for (std::size_t i = 0; i < per_edge; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(per_edge);
        boundary.push_back(A + s * (B - A));
      }
    }
  }

  std::vector<double> to_boundary(points.size());
  for_each_index(exec, points.size(), [&](std::size_t i) {
    double best = std::numeric_limits<double>::infinity();
    if (poly.collapsed) {
      best = (points[i] - poly.vertices.front()).norm();
    } else {
      for (int a = 0; a < k; ++a)
        best = std::min(best, point_segment_distance(points[i], poly.vertices[static_cast<std::size_t>(a)],
                                                     poly.vertices[static_cast<std::size_t>((a + 1) % k)]));
    }
    to_boundary[i] = best;
  });

  std::vector<double> to_points(boundary.size());
  for_each_index(exec, boundary.size(), [&](std::size_t i) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : points) best = std::min(best, (p - boundary[i]).squaredNorm());
    to_points[i] = std::sqrt(best);
  });

  return std::max(*std::max_element(to_boundary.begin(), to_boundary.end()),
                  *std::max_element(to_points.begin(), to_points.end()));
}

void write_trace_csv(std::ostream& os, const AverageTrace& tr) {
  os << "t,Rx,Ry,Rz\n";
  for (const auto& s : tr.samples)
    os << fmt17(s.t) << ',' << fmt17(s.R[0]) << ',' << fmt17(s.R[1]) << ',' << fmt17(s.R[2]) << '\n';
}

nlohmann::json polygon_to_json(const Polygon& poly) {
  nlohmann::json verts = nlohmann::json::array();
  for (const auto& v : poly.vertices) verts.push_back(to_json(v));
  return {{"vertices", verts}, {"den", poly.den}, {"delta", poly.delta}, {"collapsed", poly.collapsed}};
}

}  // namespace hetlab
