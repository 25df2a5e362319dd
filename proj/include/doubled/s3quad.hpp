// Product quadrature on the unit 3-sphere and the sphere integrals of the
// spectral action: kinetic term, interaction potential, and 1/(xi^T A xi).
//
// Coordinates: xi = (sqrt(1-t) cos phi, sqrt(1-t) sin phi, sqrt(t) cos psi,
// sqrt(t) sin psi) with t = sin^2 theta, so dS = 1/2 dt dphi dpsi. The rule
// is Gauss-Legendre in t and periodic trapezoid in both angles.
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "doubled/geometry.hpp"
#include "doubled/perturbed_form.hpp"
#include "doubled/summation.hpp"

namespace doubled {

inline constexpr double kSphereArea = 2.0 * std::numbers::pi * std::numbers::pi;

struct SphereNode {
  Vec4 xi;
  double weight;
};

class SphereRule {
 public:
  SphereRule(int level, std::vector<SphereNode> nodes)
      : level_(level), nodes_(std::move(nodes)) {}

  int level() const noexcept { return level_; }
  const std::vector<SphereNode>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  int level_;
  std::vector<SphereNode> nodes_;
};

/// Worker count for node evaluation. The reduction order does not depend
/// on it, so results are bit-identical for every value.
struct Parallelism {
  unsigned threads = 1;
};

namespace detail {

// Nodes per reduction chunk; fixed so the summation tree never changes.
inline constexpr std::size_t kChunk = 4096;

struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;
};

// Newton iteration on P_n from the Tricomi initial guesses; nodes on [-1,1].
inline GaussLegendre gauss_legendre(int n) {
  GaussLegendre gl{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    gl.x[i] = x;
    gl.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return gl;
}

template <std::size_t K>
struct ChunkResult {
  std::array<CompensatedSum, K> sums{};
  bool finite = true;
};

// sum_i w_i f(xi_i) for K fields at once. f returns the unweighted values.
template <std::size_t K, class Field>
std::array<double, K> reduce_nodes(const SphereRule& rule, Field&& f, Parallelism par) {
  const auto& nodes = rule.nodes();
  const std::size_t n_chunks = (nodes.size() + kChunk - 1) / kChunk;
  std::vector<ChunkResult<K>> partial(n_chunks);

  auto run_chunk = [&](std::size_t c) {
    ChunkResult<K>& out = partial[c];
    const std::size_t end = std::min(nodes.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      const std::array<double, K> v = f(nodes[i].xi);
      for (std::size_t k = 0; k < K; ++k) {
        if (!std::isfinite(v[k])) out.finite = false;
        out.sums[k].add(nodes[i].weight * v[k]);
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(par.threads, n_chunks));
  if (threads == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < n_chunks; c = next++) run_chunk(c);
      });
    }
  }

  std::array<CompensatedSum, K> total{};
  for (const auto& chunk : partial) {
    if (!chunk.finite) {
      throw std::domain_error("sphere quadrature: integrand is not finite at a node");
    }
    for (std::size_t k = 0; k < K; ++k) total[k].add(chunk.sums[k].value());
  }
  std::array<double, K> result{};
  for (std::size_t k = 0; k < K; ++k) result[k] = total[k].value();
  return result;
}

inline double inverse_square(const Vec4& rate_sq, const Vec4& xi) noexcept {
  double q = 0.0;
  for (std::size_t j = 0; j < 4; ++j) q += rate_sq[j] * xi[j] * xi[j];
  return q;
}

inline Vec4 squared_rates(const DiagonalMetric& g) noexcept {
  const Vec4 r = inverse_rates(g);
  return {r[0] * r[0], r[1] * r[1], r[2] * r[2], r[3] * r[3]};
}

}  // namespace detail

inline SphereRule build_rule(int level) {
  if (level < 4) {
    throw std::invalid_argument("build_rule: level must be >= 4, got " + std::to_string(level));
  }
  const auto gl = detail::gauss_legendre(level);
  const int n_ang = 2 * level;
  const double h = 2.0 * std::numbers::pi / n_ang;

  std::vector<double> cs(n_ang);
  std::vector<double> sn(n_ang);
  for (int k = 0; k < n_ang; ++k) {
    cs[k] = std::cos(k * h);
    sn[k] = std::sin(k * h);
  }

  std::vector<SphereNode> nodes;
  nodes.reserve(static_cast<std::size_t>(level) * n_ang * n_ang);
  for (int i = 0; i < level; ++i) {
    const double t = 0.5 * (gl.x[i] + 1.0);
    const double rc = std::sqrt(1.0 - t);
    const double rs = std::sqrt(t);
    const double w = 0.5 * gl.w[i] * 0.5 * h * h;  // dt = dx/2, dS = dt dphi dpsi / 2
    for (int p = 0; p < n_ang; ++p) {
      for (int q = 0; q < n_ang; ++q) {
        nodes.push_back({{rc * cs[p], rc * sn[p], rs * cs[q], rs * sn[q]}, w});
      }
    }
  }
  return SphereRule(level, std::move(nodes));
}

inline constexpr int kDefaultLevel = 64;

/// Shared level-64 rule, built on first use.
inline const SphereRule& default_rule() {
  static const SphereRule rule = build_rule(kDefaultLevel);
  return rule;
}

/// Weighted node sum of a scalar field; throws std::domain_error if the
/// field is not finite somewhere.
template <class Field>
double integrate(const SphereRule& rule, Field&& f, Parallelism par = {}) {
  return detail::reduce_nodes<1>(
      rule, [&](const Vec4& xi) { return std::array<double, 1>{f(xi)}; }, par)[0];
}

/// Integral of Q1^{-2} + Q2^{-2}.
inline double kinetic_term(const DiagonalMetric& g1, const DiagonalMetric& g2,
                           const SphereRule& rule, Parallelism par = {}) {
  const Vec4 s1 = detail::squared_rates(g1);
  const Vec4 s2 = detail::squared_rates(g2);
  return integrate(
      rule,
      [&](const Vec4& xi) {
        const double q1 = detail::inverse_square(s1, xi);
        const double q2 = detail::inverse_square(s2, xi);
        return 1.0 / (q1 * q1) + 1.0 / (q2 * q2);
      },
      par);
}

using Moments4 = std::array<std::array<double, 4>, 4>;

/// I_{jk} = integral of xi_j^2 xi_k^2 / (Q1^2 Q2^2), all sixteen from one
/// pass over the nodes (ten distinct by symmetry).
inline Moments4 potential_moments(const DiagonalMetric& g1, const DiagonalMetric& g2,
                                  const SphereRule& rule, Parallelism par = {}) {
  const Vec4 s1 = detail::squared_rates(g1);
  const Vec4 s2 = detail::squared_rates(g2);
  const auto upper = detail::reduce_nodes<10>(
      rule,
      [&](const Vec4& xi) {
        const Vec4 x2{xi[0] * xi[0], xi[1] * xi[1], xi[2] * xi[2], xi[3] * xi[3]};
        const double q1 = s1[0] * x2[0] + s1[1] * x2[1] + s1[2] * x2[2] + s1[3] * x2[3];
        const double q2 = s2[0] * x2[0] + s2[1] * x2[1] + s2[2] * x2[2] + s2[3] * x2[3];
        const double inv = 1.0 / (q1 * q1 * q2 * q2);
        std::array<double, 10> v{};
        std::size_t n = 0;
        for (std::size_t j = 0; j < 4; ++j) {
          for (std::size_t k = j; k < 4; ++k) v[n++] = x2[j] * x2[k] * inv;
        }
        return v;
      },
      par);
  Moments4 m{};
  std::size_t n = 0;
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t k = j; k < 4; ++k) {
      m[j][k] = upper[n];
      m[k][j] = upper[n];
      ++n;
    }
  }
  return m;
}

/// V(g1,g2) = sum_{j,k} (A2j - A1j)^2 (A1k^2 + A2k^2) I_{jk}.
inline double potential_numeric(const DiagonalMetric& g1, const DiagonalMetric& g2,
                                const SphereRule& rule, Parallelism par = {}) {
  const Vec4 r1 = inverse_rates(g1);
  const Vec4 r2 = inverse_rates(g2);
  const Moments4 m = potential_moments(g1, g2, rule, par);
  CompensatedSum v;
  for (std::size_t j = 0; j < 4; ++j) {
    const double d = r2[j] - r1[j];
    for (std::size_t k = 0; k < 4; ++k) {
      v.add(d * d * (r1[k] * r1[k] + r2[k] * r2[k]) * m[j][k]);
    }
  }
  return v.value();
}

/// Integral of 1 / (xi^T A xi) with A = Omega (delta + eps).
inline double rational_integral(const PerturbedForm& pf, const SphereRule& rule,
                                Parallelism par = {}) {
  const Eigen::Matrix4d a = pf.form();
  return integrate(
      rule,
      [&](const Vec4& xi) {
        double q = 0.0;
        for (int i = 0; i < 4; ++i) {
          for (int j = 0; j < 4; ++j) q += a(i, j) * xi[i] * xi[j];
        }
        return q > 0.0 ? 1.0 / q : std::numeric_limits<double>::quiet_NaN();
      },
      par);
}

/// Lambda_e^2 * kinetic + alpha * potential, per unit volume of M.
inline double action_density(const DoubledGeometry& dg, const SphereRule& rule,
                             Parallelism par = {}) {
  const EffectiveParams p = effective_params(dg);
  const double kinetic = kinetic_term(dg.g1, dg.g2, rule, par);
  const double potential = p.alpha == 0.0 ? 0.0 : potential_numeric(dg.g1, dg.g2, rule, par);
  return p.lambda_e_sq * kinetic + p.alpha * potential;
}

}  // namespace doubled
