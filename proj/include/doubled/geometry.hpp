// Diagonal metrics on the two sheets of a doubled geometry and the
// post-Clifford-trace symbol algebra of the squared Dirac operator.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace doubled {

using Vec4 = std::array<double, 4>;

/// Constant diagonal metric ds^2 = sum_j a_j^2 (dx^j)^2, stored by its
/// scale factors a_j (not the metric components a_j^2).
class DiagonalMetric {
 public:
  explicit DiagonalMetric(const Vec4& scales) : a_(scales) {
    for (double v : a_) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(
            "DiagonalMetric: scale factors must be positive and finite");
      }
    }
  }
  DiagonalMetric(double a0, double a1, double a2, double a3)
      : DiagonalMetric(Vec4{a0, a1, a2, a3}) {}

  const Vec4& scales() const noexcept { return a_; }
  double operator[](std::size_t j) const noexcept { return a_[j]; }

  /// sqrt(det g) = prod_j a_j.
  double sqrt_det() const noexcept { return a_[0] * a_[1] * a_[2] * a_[3]; }

  friend bool operator==(const DiagonalMetric&, const DiagonalMetric&) = default;

 private:
  Vec4 a_;
};

/// A point xi on the unit cosphere.
class UnitVector4 {
 public:
  static constexpr double kNormTolerance = 1e-14;

  explicit UnitVector4(const Vec4& xi) : xi_(xi) {
    const double n2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2] + xi[3] * xi[3];
    if (!(std::abs(n2 - 1.0) <= kNormTolerance)) {
      throw std::invalid_argument("UnitVector4: |xi|^2 must equal 1");
    }
  }

  /// Rescales an arbitrary nonzero vector onto the sphere.
  static UnitVector4 normalized(const Vec4& v) {
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw std::invalid_argument("UnitVector4: cannot normalize a zero vector");
    }
    return UnitVector4(Vec4{v[0] / n, v[1] / n, v[2] / n, v[3] / n});
  }

  const Vec4& components() const noexcept { return xi_; }
  double operator[](std::size_t j) const noexcept { return xi_[j]; }

 private:
  Vec4 xi_;
};

enum class Kappa : int { plus = 1, minus = -1 };

inline double sign_of(Kappa k) noexcept { return static_cast<double>(static_cast<int>(k)); }

inline Kappa kappa_from_int(int k) {
  if (k == 1) return Kappa::plus;
  if (k == -1) return Kappa::minus;
  throw std::invalid_argument("kappa must be +1 or -1");
}

/// Two sheets coupled by a constant field of modulus |Phi|. Only |Phi|
/// enters any result, so the phase is not stored.
struct DoubledGeometry {
  DiagonalMetric g1;
  DiagonalMetric g2;
  double phi_abs = 0.0;
  Kappa kappa = Kappa::plus;
  double lambda = 1.0;  // cutoff scale
  double c = 1.0;       // second moment of the cutoff function

  DoubledGeometry(DiagonalMetric first, DiagonalMetric second, double phi,
                  Kappa k, double cutoff, double moment)
      : g1(first), g2(second), phi_abs(phi), kappa(k), lambda(cutoff), c(moment) {
    if (!(phi_abs >= 0.0) || !std::isfinite(phi_abs)) {
      throw std::invalid_argument("DoubledGeometry: |Phi| must be nonnegative");
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw std::invalid_argument("DoubledGeometry: Lambda must be positive");
    }
    if (!std::isfinite(c)) {
      throw std::invalid_argument("DoubledGeometry: c must be finite");
    }
  }
};

struct EffectiveParams {
  double lambda_e_sq;
  double alpha;
};

/// A_{i,j} = 1/a_{i,j}.
inline Vec4 inverse_rates(const DiagonalMetric& g) noexcept {
  return {1.0 / g[0], 1.0 / g[1], 1.0 / g[2], 1.0 / g[3]};
}

/// Q(xi) = sum_j xi_j^2 / a_j^2, the inverse of the leading symbol on one sheet.
inline double quadratic_form(const DiagonalMetric& g, const UnitVector4& xi) noexcept {
  double q = 0.0;
  for (std::size_t j = 0; j < 4; ++j) {
    const double r = xi[j] / g[j];
    q += r * r;
  }
  return q;
}

/// Eigenvalues a_{1,j}/a_{2,j} of sqrt(g2^{-1} g1), in axis order.
inline Vec4 relative_eigenvalues(const DiagonalMetric& g1, const DiagonalMetric& g2) noexcept {
  return {g1[0] / g2[0], g1[1] / g2[1], g1[2] / g2[2], g1[3] / g2[3]};
}

/// Matrix trace of -4 kappa b0 (sum_j [F,A_j] b0 [F,A_j] xi_j^2) b0, built
/// from explicit 2x2 products. The F^2 piece is part of Lambda_e^2 and is
/// left out.
inline double b2_trace_matrix(const DoubledGeometry& dg, const UnitVector4& xi) {
  using M2 = Eigen::Matrix2d;
  const Vec4 r1 = inverse_rates(dg.g1);
  const Vec4 r2 = inverse_rates(dg.g2);

  M2 b0 = M2::Zero();
  b0(0, 0) = 1.0 / quadratic_form(dg.g1, xi);
  b0(1, 1) = 1.0 / quadratic_form(dg.g2, xi);

  // Phi taken real; the phase cancels in every trace below.
  M2 f;
  f << 0.0, dg.phi_abs, dg.phi_abs, 0.0;

  M2 inner = M2::Zero();
  for (std::size_t j = 0; j < 4; ++j) {
    M2 aj = M2::Zero();
    aj(0, 0) = r1[j];
    aj(1, 1) = r2[j];
    const M2 comm = f * aj - aj * f;
    inner += comm * b0 * comm * (xi[j] * xi[j]);
  }
  const M2 full = -4.0 * sign_of(dg.kappa) * (b0 * inner * b0);
  return full.trace();
}

/// Closed form 4 kappa |Phi|^2 sum_{j,k} (A2j-A1j)^2 (A1k^2+A2k^2) xi_j^2 xi_k^2 / (Q1^2 Q2^2).
inline double b2_trace_closed(const DoubledGeometry& dg, const UnitVector4& xi) noexcept {
  const Vec4 r1 = inverse_rates(dg.g1);
  const Vec4 r2 = inverse_rates(dg.g2);
  const double q1 = quadratic_form(dg.g1, xi);
  const double q2 = quadratic_form(dg.g2, xi);
  double sum = 0.0;
  for (std::size_t j = 0; j < 4; ++j) {
    const double d = r2[j] - r1[j];
    for (std::size_t k = 0; k < 4; ++k) {
      sum += d * d * (r1[k] * r1[k] + r2[k] * r2[k]) * xi[j] * xi[j] * xi[k] * xi[k];
    }
  }
  return 4.0 * sign_of(dg.kappa) * dg.phi_abs * dg.phi_abs * sum / (q1 * q1 * q2 * q2);
}

/// Lambda_e^2 = (12/c)(Lambda^2 - c kappa |Phi|^2), alpha = 12 kappa |Phi|^2.
inline EffectiveParams effective_params(const DoubledGeometry& dg) {
  if (dg.c == 0.0) {
    throw std::domain_error("effective_params: c must be nonzero");
  }
  const double k = sign_of(dg.kappa);
  const double phi2 = dg.phi_abs * dg.phi_abs;
  return {12.0 / dg.c * (dg.lambda * dg.lambda - dg.c * k * phi2), 12.0 * phi2 * k};
}

}  // namespace doubled
