#include "hetlab/cycle_map.hpp"

#include <ostream>

#include "hetlab/io.hpp"

namespace hetlab {

namespace {

void check_height(const CycleSpec& spec, double z) {
  if (!(z > 0.0) || z > spec.epsilon()) throw DomainError("height z must satisfy 0 < z <= epsilon");
}

}  // namespace

double flight_time(const CycleSpec& spec, int node, double z) {
  check_height(spec, z);
  return std::log(spec.epsilon() / z) / spec.node(node).e;
}

LocalMapResult local_map(const CycleSpec& spec, int node, double theta, double z, Side side) {
  check_height(spec, z);
  const auto& n = spec.node(node);
  const double w = std::log(z / spec.epsilon());
  LocalMapResult out;
  out.phi_unwrapped = theta - w / n.e;
  out.phi = wrap_angle(out.phi_unwrapped);
  out.log_offset = (n.c / n.e) * w;
  const double off = spec.epsilon() * std::exp(out.log_offset);
  out.r = side == Side::Plus ? 1.0 + off : 1.0 - off;
  return out;
}

InCoords transition_map_0(double phi, double r) {
  if (r == 1.0) throw OnUnstableManifoldError("r = 1: point lies on the unstable manifold");
  return {phi, r - 1.0};
}

Itinerary run_itinerary(const CycleSpec& spec, const SectionPoint& start, std::size_t n_hits,
                        const ItineraryOptions& opts) {
  if (start.wall != Wall::In) throw DomainError("itinerary must start on an In wall");
  if (!(start.log_height <= 0.0)) throw DomainError("start log-height must be <= 0");
  if (!(opts.transit_time >= 0.0)) throw DomainError("transit time must be >= 0");

  Itinerary it;
  it.start = start;
  it.transit_time = opts.transit_time;
  it.records.reserve(n_hits);

  const double w1 = start.log_height;
  double gain = 1.0;  // w_j = w_1 * gain
  double theta = start.angle;
  CompensatedSum T;
  for (std::size_t i = 0; i < n_hits; ++i) {
    ItineraryRecord rec;
    rec.j = static_cast<long long>(i) + 1;
    rec.node = spec.wrap(start.node + static_cast<long long>(i));
    const auto& n = spec.node(rec.node);
    rec.T = T.value();
    rec.w = w1 * gain;
    rec.tau_unit = gain / n.e;
    rec.tau = -w1 * rec.tau_unit;
    rec.theta = wrap_angle(theta);
    if (!std::isfinite(rec.T) || !std::isfinite(rec.tau) || !std::isfinite(rec.w))
      throw TimeOverflowError("time overflow at hit " + std::to_string(rec.j));
    it.records.push_back(rec);

    T.add(rec.tau);
    if (opts.transit_time > 0.0) T.add(opts.transit_time);
    theta = rec.theta + rec.tau;
    gain *= n.c / n.e;
  }
  return it;
}

double sojourn_ratio(const Itinerary& it, std::size_t i) {
  return it.records.at(i + 1).tau_unit / it.records.at(i).tau_unit;
}

double closed_form_elapsed(const DerivedConstants& dc, int node_a, long long n, double tau_prev) {
  const auto k = static_cast<int>(dc.mu.size());
  double partial = 1.0;
  double turn = 0.0;
  for (int l = 0; l < k; ++l) {
    partial *= dc.mu[static_cast<std::size_t>((node_a + l) % k)];
    turn += partial;
  }
  return geometric_sum(dc.delta, static_cast<double>(n)) * turn * tau_prev;
}

double closed_form_tau(const DerivedConstants& dc, int node_a, long long n, double tau_prev) {
  const auto k = static_cast<int>(dc.mu.size());
  return std::pow(dc.delta, static_cast<double>(n)) * dc.mu[static_cast<std::size_t>(node_a % k)] * tau_prev;
}

void write_itinerary_csv(std::ostream& os, const Itinerary& it) {
  os << "j,node,T,tau,w\n";
  for (const auto& r : it.records) {
    os << r.j << ',' << (r.node + 1) << ',' << fmt17(r.T) << ',' << fmt17(r.tau) << ',' << fmt17(r.w) << '\n';
  }
}

}  // namespace hetlab
