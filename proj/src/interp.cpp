#include "hetlab/interp.hpp"

#include <algorithm>

namespace hetlab {

namespace {

std::vector<double> solve_tridiagonal(const std::vector<double>& a, const std::vector<double>& b,
                                      const std::vector<double>& c, std::vector<double> r) {
  const std::size_t n = b.size();
  std::vector<double> cp(n), x(n);
  double den = b[0];
  cp[0] = c[0] / den;
  r[0] /= den;
  for (std::size_t i = 1; i < n; ++i) {
    den = b[i] - a[i] * cp[i - 1];
    cp[i] = c[i] / den;
    r[i] = (r[i] - a[i] * r[i - 1]) / den;
  }
  x[n - 1] = r[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = r[i] - cp[i] * x[i + 1];
  return x;
}

}  // namespace

std::vector<double> solve_cyclic_tridiagonal(const std::vector<double>& a, const std::vector<double>& b,
                                             const std::vector<double>& c, const std::vector<double>& r) {
  const std::size_t n = b.size();
  if (n < 3) throw InputError("cyclic system needs at least 3 unknowns");
  // Sherman-Morrison: corner entries alpha = c[n-1], beta = a[0]
  const double alpha = c[n - 1];
  const double beta = a[0];
  const double gamma = -b[0];
  std::vector<double> bb(b);
  bb[0] = b[0] - gamma;
  bb[n - 1] = b[n - 1] - alpha * beta / gamma;
  const std::vector<double> x = solve_tridiagonal(a, bb, c, r);
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = alpha;
  const std::vector<double> z = solve_tridiagonal(a, bb, c, u);
  const double fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - fact * z[i];
  return out;
}

PeriodicSpline::PeriodicSpline(std::vector<double> x, std::vector<double> y, double period)
    : x_(std::move(x)), y_(std::move(y)), period_(period) {
  const std::size_t n = x_.size();
  if (n != y_.size()) throw InputError("spline knots and values differ in length");
  if (n < 3) throw InputError("periodic spline needs at least 3 knots");
  if (!(period_ > 0.0)) throw InputError("spline period must be positive");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1])) throw InputError("spline knots must be strictly increasing");
  if (!(x_.back() - x_.front() < period_)) throw InputError("spline knots must span less than one period");

  auto h = [&](std::size_t i) { return i + 1 < n ? x_[i + 1] - x_[i] : x_[0] + period_ - x_[n - 1]; };
  std::vector<double> a(n), b(n), c(n), r(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = (i + 1) % n, im = (i + n - 1) % n;
    const double hm = h(im), hi = h(i);
    a[i] = hm;
    b[i] = 2.0 * (hm + hi);
    c[i] = hi;
    r[i] = 6.0 * ((y_[ip] - y_[i]) / hi - (y_[i] - y_[im]) / hm);
  }
  m_ = solve_cyclic_tridiagonal(a, b, c, r);
}

std::size_t PeriodicSpline::locate(double x, double& dx, double& h) const {
  const std::size_t n = x_.size();
  double t = std::fmod(x - x_[0], period_);
  if (t < 0.0) t += period_;
  t += x_[0];
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  h = i + 1 < n ? x_[i + 1] - x_[i] : x_[0] + period_ - x_[i];
  dx = t - x_[i];
  return i;
}

double PeriodicSpline::operator()(double x) const {
  double dx, h;
  const std::size_t i = locate(x, dx, h);
  const std::size_t j = (i + 1) % x_.size();
  const double A = (h - dx) / h, B = dx / h;
  return A * y_[i] + B * y_[j] + ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[j]) * h * h / 6.0;
}

double PeriodicSpline::deriv(double x) const {
  double dx, h;
  const std::size_t i = locate(x, dx, h);
  const std::size_t j = (i + 1) % x_.size();
  const double A = (h - dx) / h, B = dx / h;
  return (y_[j] - y_[i]) / h - (3.0 * A * A - 1.0) / 6.0 * h * m_[i] + (3.0 * B * B - 1.0) / 6.0 * h * m_[j];
}

double PeriodicSpline::deriv2(double x) const {
  double dx, h;
  const std::size_t i = locate(x, dx, h);
  const std::size_t j = (i + 1) % x_.size();
  const double B = dx / h;
  return (1.0 - B) * m_[i] + B * m_[j];
}

}  // namespace hetlab
