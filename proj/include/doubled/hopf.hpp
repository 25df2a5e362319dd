// Closed-form potential for the two-parameter metric
// g00 = g11 = b^2, g22 = g33 = a^2.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "doubled/geometry.hpp"
#include "doubled/s3quad.hpp"

namespace doubled {

struct HopfMetric {
  double a;
  double b;

  HopfMetric(double a_, double b_) : a(a_), b(b_) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
      throw std::invalid_argument("HopfMetric: a and b must be positive and finite");
    }
  }
};

/// (b, b, a, a).
inline DiagonalMetric to_diagonal(const HopfMetric& h) { return DiagonalMetric(h.b, h.b, h.a, h.a); }

/// True when a0 == a1 and a2 == a3.
inline bool is_hopf_shaped(const DiagonalMetric& g) noexcept { return g[0] == g[1] && g[2] == g[3]; }

inline HopfMetric to_hopf(const DiagonalMetric& g) {
  if (!is_hopf_shaped(g)) {
    throw std::invalid_argument("metric is not of Hopf shape (needs a0 == a1 and a2 == a3)");
  }
  return HopfMetric(g[2], g[0]);
}

namespace detail {

// log(p/q) for positive p, q; log1p keeps digits when p/q is close to 1.
inline double log_ratio(double p, double q) noexcept {
  const double d = (p - q) / q;
  return std::abs(d) < 0.5 ? std::log1p(d) : std::log(p / q);
}

inline constexpr double kSingularTube = 1e-6;
inline constexpr double kScriptVTube = 1e-6;

}  // namespace detail

/// F = 4 a1^2 a2^2 b1^2 b2^2 (a1 - a2)(b1 - b2) log(a1 b2 / (a2 b1)).
inline double f_term(double a1, double a2, double b1, double b2) noexcept {
  const double p = a1 * a2 * b1 * b2;
  return 4.0 * p * p * (a1 - a2) * (b1 - b2) * detail::log_ratio(a1 * b2, a2 * b1);
}

namespace detail {

// The bracket of G rewritten in d = a1 - a2, e = b1 - b2. The published
// ordering cancels to O(d^2) near a1 = a2; this one has no constant term.
inline double g_bracket(double a1, double a2, double b1, double b2) noexcept {
  const double d = a1 - a2;
  const double e = b1 - b2;
  const double quad = d * d * b2 * b2 * b2 + d * e * b2 * b2 * (2.0 * a1 - a2) + e * e * b2 * a1 * a1;
  return (a1 + a2) * quad + e * e * e * a2 * a1 * a1;
}

}  // namespace detail

/// G = (a2^2 b1^2 - a1^2 b2^2) [a1^2 b1^2 a2 (b1 - 2 b2) + a2^2 b2^2 a1 (b2 - 2 b1)
///                               + a1^3 b1^2 b2 + a2^3 b2^2 b1].
inline double g_term(double a1, double a2, double b1, double b2) noexcept {
  const double lead = (a2 * b1 - a1 * b2) * (a2 * b1 + a1 * b2);
  return lead * detail::g_bracket(a1, a2, b1, b2);
}

/// True inside the relative tube |a2 b1 - a1 b2| < 1e-6 (a2 b1 + a1 b2),
/// where the closed form is a removable 0/0.
inline bool near_singular_surface(const HopfMetric& h1, const HopfMetric& h2) noexcept {
  const double minus = h2.a * h1.b - h1.a * h2.b;
  const double plus = h2.a * h1.b + h1.a * h2.b;
  return std::abs(minus) < detail::kSingularTube * plus;
}

/// 2 pi^2 (F + G) / ((a2 b1 - a1 b2)(a2 b1 + a1 b2)^2). Inside the singular
/// tube the value comes from quadrature on the equivalent diagonal metrics.
inline double potential_closed(const HopfMetric& h1, const HopfMetric& h2,
                               const SphereRule& fallback_rule, Parallelism par = {}) {
  if (near_singular_surface(h1, h2)) {
    return potential_numeric(to_diagonal(h1), to_diagonal(h2), fallback_rule, par);
  }
  const double a1 = h1.a, a2 = h2.a, b1 = h1.b, b2 = h2.b;
  const double minus = a2 * b1 - a1 * b2;
  const double plus = a2 * b1 + a1 * b2;
  // G = minus * plus * bracket, so only F is divided by the small difference.
  const double g_reduced = detail::g_bracket(a1, a2, b1, b2);
  return kSphereArea * (f_term(a1, a2, b1, b2) / (minus * plus * plus) + g_reduced / plus);
}

inline double potential_closed(const HopfMetric& h1, const HopfMetric& h2) {
  return potential_closed(h1, h2, default_rule());
}

/// The bimetric potential function of x = b1/b2, y = a1/a2. On x == y the
/// log term is replaced by its limit, giving (y-1)^2 (y^2+1).
inline double script_v(double x, double y) {
  if (!(x > 0.0) || !(y > 0.0)) {
    throw std::invalid_argument("script_v: x and y must be positive");
  }
  if (std::abs(x - y) < detail::kScriptVTube * std::max(x, y)) {
    const double u = y - 1.0;
    return u * u * (y * y + 1.0);
  }
  const double xy = x * y;
  const double s = x + y;
  const double log_term =
      4.0 * xy * xy * (x - 1.0) * (y - 1.0) / ((x - y) * s * s) * detail::log_ratio(y, x);
  return log_term + xy * xy + 1.0 - 2.0 * xy * (xy + 1.0) / s;
}

/// 2 pi^2 V(b1/b2, a1/a2) sqrt(det g2), with sqrt(det g2) = a2^2 b2^2.
inline double potential_via_conjecture(const HopfMetric& h1, const HopfMetric& h2) {
  const double root_det = h2.a * h2.a * h2.b * h2.b;
  return kSphereArea * script_v(h1.b / h2.b, h1.a / h2.a) * root_det;
}

}  // namespace doubled
