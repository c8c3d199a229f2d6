#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "json.hpp"

#include "hetlab/manifolds.hpp"
#include "hetlab/parallel.hpp"

namespace hetlab {

/// phi' never changes sign from - to + on (I1, I2).
class NoFoldError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Newton polish after bracketing failed; carries the bracket in lambda.
class TangencyRefinementError : public ConvergenceError {
 public:
  TangencyRefinementError(const std::string& what, double lo, double hi)
      : ConvergenceError(what), lo_(lo), hi_(hi) {}
  double lambda_lo() const { return lo_; }
  double lambda_hi() const { return hi_; }

 private:
  double lo_, hi_;
};

/// A periodic function of an angle with two derivatives.
struct AngleFunction {
  std::function<double(double)> f, d1, d2;
};

AngleFunction from_curve(const ManifoldCurve& c);

/// Constants of the local passage at node a.
struct PassageParams {
  double e = 1.0;
  double delta = 2.0;
  double epsilon = 0.1;
};

struct FoldPoint {
  double theta = 0.0;
  double phi = 0.0;  // unwrapped
  double r = 1.0;
};

struct SpiralCurve {
  AngleFunction h;
  double I1 = 0.0, I2 = 0.0;  // h > 0 on (I1, I2)
  PassageParams pp;
  FoldPoint fold;
  double theta_max = 0.0;  // argmax of r
  double max_radius = 1.0;

  double phi(double theta) const;     // unwrapped
  double dphi(double theta) const;
  double d2phi(double theta) const;
  double r(double theta) const;
  double dr(double theta) const;
  double d2r(double theta) const;
};

/// Image of h under the local map: phi = theta - ln(h/eps)/e, r = 1 + eps (h/eps)^delta.
SpiralCurve build_spiral(const AngleFunction& h, double I1, double I2, const PassageParams& pp,
                         std::size_t scan_points = 4000);
SpiralCurve build_spiral(const ManifoldCurve& h, const PassageParams& pp, std::size_t scan_points = 4000);

// ---------------------------------------------------------------------------

/// h and g curves for every lambda in a range.
class CurveFamily {
 public:
  virtual ~CurveFamily() = default;
  virtual AngleFunction h(double lambda) const = 0;
  virtual std::pair<double, double> h_interval(double lambda) const = 0;
  virtual AngleFunction g(double lambda) const = 0;
};

/// h = lambda * h_amp * sin(theta), g = 1 + g_offset + lambda * g_amp * sin(phi).
class SineFamily : public CurveFamily {
 public:
  explicit SineFamily(double h_amp = 1.0, double g_amp = 1.0, double g_offset = 0.0)
      : h_amp_(h_amp), g_amp_(g_amp), g_offset_(g_offset) {}
  AngleFunction h(double lambda) const override;
  std::pair<double, double> h_interval(double) const override { return {0.0, std::numbers::pi}; }
  AngleFunction g(double lambda) const override;

 private:
  double h_amp_, g_amp_, g_offset_;
};

/// Curves extracted from the lifted ODE, cached on a log grid with `per_decade`
/// points per decade and interpolated linearly in lambda. With `reextract`,
/// values requested off the grid are computed directly instead.
class CachedCurveFamily : public CurveFamily {
 public:
  CachedCurveFamily(ode::SystemParams base, int node, double lambda_lo, double lambda_hi, ManifoldOptions opts,
                    int per_decade = 17, bool reextract = false);

  AngleFunction h(double lambda) const override;
  std::pair<double, double> h_interval(double lambda) const override;
  AngleFunction g(double lambda) const override;

  const std::vector<double>& grid() const { return lambdas_; }

 private:
  struct Entry {
    ManifoldCurve h, g;
  };
  Entry extract(double lambda) const;
  Entry at(double lambda) const;

  ode::SystemParams base_;
  int node_;
  ManifoldOptions opts_;
  bool reextract_;
  std::vector<double> lambdas_;
  std::vector<Entry> cache_;
  mutable std::mutex mu_;
  mutable std::map<double, std::shared_ptr<Entry>> extra_;
};

// ---------------------------------------------------------------------------

enum class TangencyKind {
  EnterA,  // F has a local maximum at the double root
  LeaveA,  // F has a local minimum
};

enum class KindFilter { All, EnterA, LeaveA };

std::string to_string(TangencyKind k);

struct Tangency {
  double lambda = 0.0;
  double theta = 0.0;
  double phi_unwrapped = 0.0;
  double r = 0.0;
  double F = 0.0, F_theta = 0.0, F_thetatheta = 0.0;
  TangencyKind kind = TangencyKind::EnterA;
  int count_above = 0;  // transverse roots near the fold at lambda (1 + kappa)
  int count_below = 0;  // at lambda (1 - kappa)
  double bracket_lo = 0.0, bracket_hi = 0.0;
};

struct TangencyScanResult {
  std::vector<Tangency> tangencies;  // lambda strictly decreasing
  std::vector<double> grid;          // scanned lambdas
  std::vector<double> clearance;     // F at the fold on the grid
};

struct ScanOptions {
  double lambda_lo = 1e-6;
  double lambda_hi = 0.05;
  std::size_t count = 100;  // stop after this many tangencies
  KindFilter kind = KindFilter::All;
  double kappa = 1e-3;      // relative lambda offset for transverse root counts
  double tol = 1e-12;       // Newton target on |F| and |F_theta|
  Exec exec = Exec::Parallel;
};

/// F(theta; lambda) = r(theta) - g(phi(theta) mod 2pi) and its theta derivatives.
struct Clearance {
  double F, F_theta, F_thetatheta;
};
Clearance clearance_at(const SpiralCurve& sp, const AngleFunction& g, double theta);

/// Number of sign changes of F over the fold window phi <= phi* + pi/2.
int transverse_count(const SpiralCurve& sp, const AngleFunction& g, std::size_t points = 8000);

TangencyScanResult tangency_scan(const CurveFamily& fam, const PassageParams& pp, const ScanOptions& opts = {});

/// {"tangencies": [...], "ratios": [...], "ratios_skip_one": [...]}
nlohmann::json scan_to_json(const TangencyScanResult& res);

}  // namespace hetlab
