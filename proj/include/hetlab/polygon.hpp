#pragma once

#include <cstddef>
#include <ostream>
#include <vector>

#include "hetlab/cycle_map.hpp"
#include "hetlab/parallel.hpp"

namespace hetlab {

/// Vertices A_a = num_a / den_a, a = 0..k-1; edge a joins A_a and A_{a+1}.
struct Polygon {
  std::vector<Vec3> vertices;
  std::vector<Vec3> num;
  std::vector<double> den;
  double delta = 1.0;
  bool collapsed = false;  // all vertices coincide

  int k() const { return static_cast<int>(vertices.size()); }
  double diameter() const;
};

Polygon polygon_vertices(const CycleSpec& spec);

struct EdgeReport {
  int a = 0;                  // edge from A_a to A_{a+1}
  double alpha = 0.0;         // A_{a+1} = alpha A_a + beta xbar_a
  double beta = 0.0;
  double den_residual = 0.0;  // relative
  double num_residual = 0.0;  // relative
  double combination_residual = 0.0;
  bool alpha_in_unit_interval = false;  // only meaningful when delta > 1
  bool ok = false;
};

std::vector<EdgeReport> check_collinearity(const Polygon& poly, const CycleSpec& spec, double tol = 1e-10);

// ---------------------------------------------------------------------------
// Running averages under the piecewise-constant idealisation: during sojourn j
// the observable equals xbar of that node.

enum class Spacing {
  Uniform,     // L evenly spaced in (0, 1)
  ArcUniform,  // L chosen so R(t) is evenly spaced along the edge it traces
};

struct TraceOptions {
  std::size_t samples_per_sojourn = 0;
  Spacing spacing = Spacing::Uniform;
  bool stagger = false;  // golden-ratio offset per hit instead of midpoints
};

struct TraceSample {
  double t = 0.0;
  Vec3 R = Vec3::Zero();
  long long j = 0;  // hit whose sojourn contains t
  double L = 0.0;   // 0 at entry
};

struct AverageTrace {
  std::vector<TraceSample> samples;
};

/// Throws DomainError if the itinerary carries no time at all.
AverageTrace average_trace(const Itinerary& it, const CycleSpec& spec, const TraceOptions& opts = {});

/// Samples whose hit lies in turns [first_turn, last_turn]; turn of hit j is (j-1)/k.
std::vector<Vec3> trace_tail(const AverageTrace& tr, int k, long long first_turn, long long last_turn);

/// Symmetric Hausdorff distance between points and the polygon boundary.
/// Boundary-to-points uses per_edge samples on each edge.
double accumulation_distance(const std::vector<Vec3>& points, const Polygon& poly, Exec exec = Exec::Parallel,
                             std::size_t per_edge = 1000);

/// Euclidean distance from p to segment [a, b].
double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b);

void write_trace_csv(std::ostream& os, const AverageTrace& tr);
nlohmann::json polygon_to_json(const Polygon& poly);

}  // namespace hetlab
