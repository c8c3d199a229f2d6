#include "hetlab/core_types.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace hetlab {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out = "invalid cycle spec: ";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += "; ";
    out += parts[i];
  }
  return out;
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : InputError(join(violations)), violations_(std::move(violations)) {}

std::string to_string(Attractivity a) {
  switch (a) {
    case Attractivity::StrictlyAttracting: return "strictly_attracting";
    case Attractivity::Degenerate: return "degenerate";
    case Attractivity::NonAttracting: return "non_attracting";
  }
  return "unknown";
}

CycleSpec CycleSpec::validated(std::vector<NodeSpec> nodes, double epsilon) {
  std::vector<std::string> bad;
  if (nodes.size() < 2) bad.push_back("k: need at least 2 nodes, got " + std::to_string(nodes.size()));
  if (!positive_finite(epsilon)) bad.push_back("epsilon: must be > 0");
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    const auto& n = nodes[a];
    const std::string tag = "nodes[" + std::to_string(a) + "].";
    if (!positive_finite(n.e)) bad.push_back(tag + "e: must be > 0");
    if (!positive_finite(n.c)) bad.push_back(tag + "c: must be > 0");
    if (!positive_finite(n.period)) bad.push_back(tag + "xi: must be > 0");
    if (!n.xbar.allFinite()) bad.push_back(tag + "xbar: must be finite");
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));

  CycleSpec s;
  s.nodes_ = std::move(nodes);
  s.epsilon_ = epsilon;
  bool all_strict = true;
  bool any_below = false;
  for (const auto& n : s.nodes_) {
    if (!(n.c > n.e)) all_strict = false;
    if (n.c < n.e) any_below = true;
  }
  s.attractivity_ = all_strict  ? Attractivity::StrictlyAttracting
                    : any_below ? Attractivity::NonAttracting
                                : Attractivity::Degenerate;
  return s;
}

DerivedConstants derive_constants(const CycleSpec& spec) {
  const int k = spec.k();
  DerivedConstants dc;
  dc.delta_a.resize(static_cast<std::size_t>(k));
  dc.mu.resize(static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a) {
    const auto& n = spec.node(a);
    dc.delta_a[static_cast<std::size_t>(a)] = n.c / n.e;
    dc.mu[static_cast<std::size_t>(a)] = spec.node(a - 1).c / n.e;
  }
  dc.delta = 1.0;
  dc.delta_via_mu = 1.0;
  for (int a = 0; a < k; ++a) {
    dc.delta *= dc.delta_a[static_cast<std::size_t>(a)];
    dc.delta_via_mu *= dc.mu[static_cast<std::size_t>(a)];
  }
  return dc;
}

SectionPoint SectionPoint::on_in(int node, double theta, double z, double epsilon, Side side) {
  const double az = std::abs(z);
  if (!(az > 0.0) || az > epsilon) throw DomainError("height must satisfy 0 < |z| <= epsilon");
  SectionPoint p;
  p.node = node;
  p.wall = Wall::In;
  p.side = side;
  p.angle = wrap_angle(theta);
  p.value = z;
  p.log_height = std::log(az / epsilon);
  return p;
}

SectionPoint SectionPoint::on_in_log(int node, double theta, double w, double epsilon, Side side) {
  if (!(w <= 0.0) || !std::isfinite(w)) throw DomainError("log-height must be finite and <= 0");
  SectionPoint p;
  p.node = node;
  p.wall = Wall::In;
  p.side = side;
  p.angle = wrap_angle(theta);
  p.log_height = w;
  p.value = (side == Side::Plus ? 1.0 : -1.0) * epsilon * std::exp(w);
  return p;
}

SectionPoint SectionPoint::on_out(int node, double phi, double r, double epsilon) {
  if (!(std::abs(r - 1.0) <= epsilon * (1.0 + 1e-12))) throw DomainError("radius must satisfy |r - 1| <= epsilon");
  SectionPoint p;
  p.node = node;
  p.wall = Wall::Out;
  p.side = r >= 1.0 ? Side::Plus : Side::Minus;
  p.angle = wrap_angle(phi);
  p.value = r;
  p.log_height = std::abs(r - 1.0) > 0.0 ? std::log(std::abs(r - 1.0) / epsilon)
                                         : -std::numeric_limits<double>::infinity();
  return p;
}

// ---------------------------------------------------------------------------

namespace {

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where,
                    std::vector<std::string>& bad) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) bad.push_back(where + it.key() + ": unknown field");
  }
}

double number_field(const nlohmann::json& obj, const char* key, const std::string& where,
                    std::vector<std::string>& bad, bool required = true, double fallback = 0.0) {
  if (!obj.contains(key)) {
    if (required) bad.push_back(where + key + ": missing");
    return fallback;
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) {
    bad.push_back(where + key + ": not a number");
    return fallback;
  }
  return v.get<double>();
}

}  // namespace

CycleSpec spec_from_json(const nlohmann::json& j) {
  std::vector<std::string> bad;
  if (!j.is_object()) throw ValidationError({"document: expected a JSON object"});
  reject_unknown(j, {"k", "nodes", "epsilon"}, "", bad);

  long long k = -1;
  if (!j.contains("k")) {
    bad.push_back("k: missing");
  } else if (!j.at("k").is_number_integer()) {
    bad.push_back("k: not an integer");
  } else {
    k = j.at("k").get<long long>();
  }
  const double eps = number_field(j, "epsilon", "", bad);

  std::vector<NodeSpec> nodes;
  if (!j.contains("nodes") || !j.at("nodes").is_array()) {
    bad.push_back("nodes: missing or not an array");
  } else {
    const auto& arr = j.at("nodes");
    if (k >= 0 && static_cast<long long>(arr.size()) != k)
      bad.push_back("nodes: length " + std::to_string(arr.size()) + " does not match k = " + std::to_string(k));
    for (std::size_t a = 0; a < arr.size(); ++a) {
      const std::string where = "nodes[" + std::to_string(a) + "].";
      const auto& nj = arr[a];
      if (!nj.is_object()) {
        bad.push_back(where + ": not an object");
        continue;
      }
      reject_unknown(nj, {"e", "c", "xbar", "xi"}, where, bad);
      NodeSpec n;
      n.e = number_field(nj, "e", where, bad);
      n.c = number_field(nj, "c", where, bad);
      n.period = number_field(nj, "xi", where, bad, false, 1.0);
      if (!nj.contains("xbar")) {
        bad.push_back(where + "xbar: missing");
      } else {
        const auto& xb = nj.at("xbar");
        if (!xb.is_array() || xb.size() != 3) {
          bad.push_back(where + "xbar: expected an array of 3 numbers");
        } else {
          for (int i = 0; i < 3; ++i) {
            if (!xb[static_cast<std::size_t>(i)].is_number()) {
              bad.push_back(where + "xbar: expected an array of 3 numbers");
              break;
            }
            n.xbar[i] = xb[static_cast<std::size_t>(i)].get<double>();
          }
        }
      }
      nodes.push_back(n);
    }
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
  return CycleSpec::validated(std::move(nodes), eps);
}

CycleSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open spec file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("malformed JSON in " + path + ": " + e.what());
  }
  return spec_from_json(j);
}

nlohmann::json spec_to_json(const CycleSpec& spec) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : spec.nodes()) {
    nlohmann::json nj{{"e", n.e}, {"c", n.c}, {"xbar", {n.xbar[0], n.xbar[1], n.xbar[2]}}};
    if (n.period != 1.0) nj["xi"] = n.period;
    nodes.push_back(nj);
  }
  return {{"k", spec.k()}, {"nodes", nodes}, {"epsilon", spec.epsilon()}};
}

nlohmann::json constants_to_json(const DerivedConstants& dc) {
  return {{"delta_a", dc.delta_a}, {"mu", dc.mu}, {"delta", dc.delta}, {"delta_via_mu", dc.delta_via_mu}};
}

}  // namespace hetlab
