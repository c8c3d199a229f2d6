#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "hetlab/common.hpp"

namespace hetlab {

/// Data for one periodic orbit P_a of the cycle.
struct NodeSpec {
  double e = 1.0;       // expanding Floquet exponent
  double c = 1.0;       // contracting Floquet exponent
  Vec3 xbar = Vec3::Zero();  // centre of gravity
  double period = 1.0;  // only the ODE module looks at this
};

enum class Attractivity { StrictlyAttracting, Degenerate, NonAttracting };

std::string to_string(Attractivity a);

/// Validated cycle data. Nodes are indexed 0..k-1 in code; node(a) wraps, so
/// node(k) is node(0).
class CycleSpec {
 public:
  /// Throws ValidationError naming every offending field. Never repairs.
  static CycleSpec validated(std::vector<NodeSpec> nodes, double epsilon);

  int k() const { return static_cast<int>(nodes_.size()); }
  int wrap(long long a) const {
    const long long kk = k();
    return static_cast<int>(((a % kk) + kk) % kk);
  }
  const NodeSpec& node(long long a) const { return nodes_[static_cast<std::size_t>(wrap(a))]; }
  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  double epsilon() const { return epsilon_; }
  Attractivity attractivity() const { return attractivity_; }
  bool strictly_attracting() const { return attractivity_ == Attractivity::StrictlyAttracting; }

 private:
  CycleSpec() = default;
  std::vector<NodeSpec> nodes_;
  double epsilon_ = 0.0;
  Attractivity attractivity_ = Attractivity::Degenerate;
};

struct DerivedConstants {
  std::vector<double> delta_a;  // c_a / e_a
  std::vector<double> mu;       // mu[a] = c_{a-1} / e_a
  double delta = 1.0;           // product of delta_a
  double delta_via_mu = 1.0;    // product of mu, kept for the cross-check
};

DerivedConstants derive_constants(const CycleSpec& spec);

// ---------------------------------------------------------------------------
// Section coordinates

enum class Wall { In, Out };
enum class Side { Plus, Minus };

/// A point on In(P_a) (angle theta, height z) or Out(P_a) (angle phi, radius r).
/// On In the log-height w = ln(|z|/eps) is the primary coordinate; z may have
/// underflowed to 0 while w is still finite.
struct SectionPoint {
  int node = 0;
  Wall wall = Wall::In;
  Side side = Side::Plus;
  double angle = 0.0;  // in [0, 2pi)
  double value = 0.0;  // z on In, r on Out
  double log_height = 0.0;

  static SectionPoint on_in(int node, double theta, double z, double epsilon, Side side = Side::Plus);
  static SectionPoint on_in_log(int node, double theta, double w, double epsilon, Side side = Side::Plus);
  static SectionPoint on_out(int node, double phi, double r, double epsilon);
};

// ---------------------------------------------------------------------------
// JSON: {"k":2,"nodes":[{"e":..,"c":..,"xbar":[..]}],"epsilon":..}
// Each node may also carry "xi" (period). Anything else is rejected.

CycleSpec spec_from_json(const nlohmann::json& j);
CycleSpec load_spec(const std::string& path);
nlohmann::json spec_to_json(const CycleSpec& spec);
nlohmann::json constants_to_json(const DerivedConstants& dc);

}  // namespace hetlab
