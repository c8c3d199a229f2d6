#pragma once

#include <cstddef>
#include <vector>

#include "hetlab/core_types.hpp"

namespace hetlab {

/// The point lies on W^u(P_a) (r == 1) and never reaches the next In wall.
class OnUnstableManifoldError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// tau = (1/e_a) ln(eps/z) for 0 < z <= eps.
double flight_time(const CycleSpec& spec, int node, double z);

struct LocalMapResult {
  double phi = 0.0;            // wrapped to [0, 2pi)
  double phi_unwrapped = 0.0;  // theta + tau, no reduction
  double r = 1.0;
  double log_offset = 0.0;     // ln(|r - 1|/eps) = delta_a * ln(z/eps)
};

/// Passage from In(P_a) to Out(P_a).
LocalMapResult local_map(const CycleSpec& spec, int node, double theta, double z, Side side = Side::Plus);

struct InCoords {
  double theta = 0.0;
  double z = 0.0;
};

/// Unperturbed transition Out(P_a) -> In(P_{a+1}): (phi, r) -> (phi, r - 1).
InCoords transition_map_0(double phi, double r);

struct ItineraryRecord {
  long long j = 1;     // hit index, starting at 1
  int node = 0;        // 0-based node index of the wall hit
  double T = 0.0;      // entry time
  double tau = 0.0;    // sojourn near the node
  double w = 0.0;      // log-height at entry
  double tau_unit = 0.0;  // tau / (-w_1); does not depend on the start height
  double theta = 0.0;  // entry angle in [0, 2pi)
};

struct ItineraryOptions {
  double transit_time = 0.0;  // constant time spent between blocks
};

struct Itinerary {
  SectionPoint start;
  double transit_time = 0.0;
  std::vector<ItineraryRecord> records;
};

/// Iterates the return model in log coordinates. Throws TimeOverflowError if the
/// accumulated time leaves double range.
Itinerary run_itinerary(const CycleSpec& spec, const SectionPoint& start, std::size_t n_hits,
                        const ItineraryOptions& opts = {});

/// tau_{j+1}/tau_j from the start-independent unit sojourns; i is a 0-based record index.
double sojourn_ratio(const Itinerary& it, std::size_t i);

// Closed forms for a hit of node a (0-based) whose predecessor sojourn is tau_prev.

/// T_{a+nk} - T_a.
double closed_form_elapsed(const DerivedConstants& dc, int node_a, long long n, double tau_prev);
/// tau_{a+nk}.
double closed_form_tau(const DerivedConstants& dc, int node_a, long long n, double tau_prev);

/// CSV columns j,node,T,tau,w (node is 1-based).
void write_itinerary_csv(std::ostream& os, const Itinerary& it);

}  // namespace hetlab
