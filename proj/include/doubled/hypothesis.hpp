// Randomized checks of the bimetric form V(g1,g2) = 2 pi^2 V'(g1,g2) sqrt(det g2)
// with V' a function of the eigenvalues of sqrt(g2^{-1} g1) only. For diagonal
// pairs the pairs sharing an eigenvalue multiset are exactly the orbits of
// joint per-axis rescaling and joint axis permutation, so those two
// invariances (plus the g1 <-> g2 exchange identity) are what gets checked.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "doubled/geometry.hpp"
#include "doubled/hopf.hpp"
#include "doubled/s3quad.hpp"

namespace doubled {

inline constexpr const char* kRngAlgorithm = "mt19937_64";

/// V'(g1,g2) = V(g1,g2) / (2 pi^2 sqrt(det g2)).
inline double v_prime(const DiagonalMetric& g1, const DiagonalMetric& g2, const SphereRule& rule,
                      Parallelism par = {}) {
  return potential_numeric(g1, g2, rule, par) / (kSphereArea * g2.sqrt_det());
}

inline double relative_discrepancy(double value, double reference) noexcept {
  return std::abs(value - reference) / std::max(std::abs(reference), 1e-30);
}

using AxisPermutation = std::array<int, 4>;

namespace detail {

inline DiagonalMetric rescaled(const DiagonalMetric& g, const Vec4& scales) {
  return DiagonalMetric(g[0] * scales[0], g[1] * scales[1], g[2] * scales[2], g[3] * scales[3]);
}

inline DiagonalMetric permuted(const DiagonalMetric& g, const AxisPermutation& perm) {
  return DiagonalMetric(g[perm[0]], g[perm[1]], g[perm[2]], g[perm[3]]);
}

inline void check_permutation(const AxisPermutation& perm) {
  std::array<bool, 4> hit{};
  for (int p : perm) {
    if (p < 0 || p > 3 || hit[p]) throw std::invalid_argument("not a permutation of {0,1,2,3}");
    hit[p] = true;
  }
}

inline constexpr double kBoxLo = 0.5;
inline constexpr double kBoxHi = 2.0;

// Per-axis factors, log-uniform over the part of [1/2, 2] that keeps both
// rescaled metrics inside [kBoxLo, kBoxHi] on that axis. Level 64 holds
// ~1e-14 inside the box but drifts to ~1e-7 at axis ratios near 16.
inline Vec4 draw_box_scales(const DiagonalMetric& g1, const DiagonalMetric& g2, std::mt19937_64& rng) {
  Vec4 s{};
  for (int j = 0; j < 4; ++j) {
    const double lo = std::clamp(kBoxLo / std::min(g1[j], g2[j]), 0.5, 1.0);
    const double hi = std::clamp(kBoxHi / std::max(g1[j], g2[j]), 1.0, 2.0);
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    s[j] = std::exp(u(rng));
  }
  return s;
}

}  // namespace detail

/// Relative change of V' when both metrics are rescaled per axis by the same
/// factors (which leaves the relative eigenvalues unchanged).
inline double check_scaling_invariance(const DiagonalMetric& g1, const DiagonalMetric& g2,
                                       const Vec4& scales, const SphereRule& rule,
                                       Parallelism par = {}) {
  const double base = v_prime(g1, g2, rule, par);
  const double moved = v_prime(detail::rescaled(g1, scales), detail::rescaled(g2, scales), rule, par);
  return relative_discrepancy(moved, base);
}

/// Relative change of V' under a joint relabeling of the axes; new axis j
/// takes old axis perm[j].
inline double check_permutation_invariance(const DiagonalMetric& g1, const DiagonalMetric& g2,
                                           const AxisPermutation& perm, const SphereRule& rule,
                                           Parallelism par = {}) {
  detail::check_permutation(perm);
  const double base = v_prime(g1, g2, rule, par);
  const double moved = v_prime(detail::permuted(g1, perm), detail::permuted(g2, perm), rule, par);
  return relative_discrepancy(moved, base);
}

enum class PairKind { generic, hopf };

inline const char* to_string(PairKind k) noexcept { return k == PairKind::hopf ? "hopf" : "generic"; }

struct HypothesisFailure {
  int trial;
  Vec4 g1;
  Vec4 g2;
  std::string transformation;  // scaling | permutation | exchange | closed_form
  std::vector<double> parameters;
  double discrepancy;
};

struct HypothesisReport {
  int trials = 0;
  std::uint64_t seed = 0;
  std::string rng = kRngAlgorithm;
  PairKind pairs = PairKind::generic;
  int level = 0;
  double tol = 0.0;
  double max_violation = 0.0;
  double max_scaling = 0.0;
  double max_permutation = 0.0;
  double max_exchange = 0.0;
  double max_closed_form = 0.0;  // Hopf pairs only
  std::vector<HypothesisFailure> failures;
};

using MetricPair = std::pair<DiagonalMetric, DiagonalMetric>;

/// Checks each given pair: exchange identity, invariance of V' under a random
/// per-axis rescaling (see draw_box_scales) and under a random
/// joint axis permutation, and for Hopf pairs agreement with script_v. A
/// check fails when its discrepancy exceeds tol. Deterministic in rng state.
inline HypothesisReport run_hypothesis_on(const std::vector<MetricPair>& pairs, std::mt19937_64& rng,
                                          const SphereRule& rule, double tol, PairKind kind,
                                          Parallelism par = {}) {
  if (pairs.empty()) throw std::invalid_argument("hypothesis: need at least one pair");
  if (!(tol >= 0.0)) throw std::invalid_argument("hypothesis: tol must be >= 0");
  HypothesisReport report;
  report.trials = static_cast<int>(pairs.size());
  report.pairs = kind;
  report.level = rule.level();
  report.tol = tol;

  for (int t = 0; t < report.trials; ++t) {
    const auto& [g1, g2] = pairs[t];
    const Vec4 scales = detail::draw_box_scales(g1, g2, rng);
    AxisPermutation perm{0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);

    const double v12 = potential_numeric(g1, g2, rule, par);
    const double v21 = potential_numeric(g2, g1, rule, par);
    const double base = v12 / (kSphereArea * g2.sqrt_det());

    auto record = [&](const char* what, std::vector<double> params, double d, double& running_max) {
      running_max = std::max(running_max, d);
      report.max_violation = std::max(report.max_violation, d);
      if (d > tol) report.failures.push_back({t, g1.scales(), g2.scales(), what, std::move(params), d});
    };

    // V'(g1,g2) sqrt(det g2) = V'(g2,g1) sqrt(det g1) is V(g1,g2) = V(g2,g1).
    record("exchange", {}, relative_discrepancy(v21, v12), report.max_exchange);

    const double scaled =
        v_prime(detail::rescaled(g1, scales), detail::rescaled(g2, scales), rule, par);
    record("scaling", {scales.begin(), scales.end()}, relative_discrepancy(scaled, base),
           report.max_scaling);

    const double perm_v = v_prime(detail::permuted(g1, perm), detail::permuted(g2, perm), rule, par);
    record("permutation", {double(perm[0]), double(perm[1]), double(perm[2]), double(perm[3])},
           relative_discrepancy(perm_v, base), report.max_permutation);

    if (kind == PairKind::hopf) {
      const double closed = script_v(g1[0] / g2[0], g1[2] / g2[2]);
      record("closed_form", {}, relative_discrepancy(base, closed), report.max_closed_form);
    }
  }
  return report;
}

/// Draws `trials` random pairs (scale factors log-uniform in [0.5, 2]; Hopf
/// pairs share a0 = a1 and a2 = a3) and runs run_hypothesis_on with the same
/// generator. Deterministic in seed.
inline HypothesisReport run_hypothesis_suite(int trials, std::uint64_t seed, const SphereRule& rule,
                                             double tol, PairKind kind = PairKind::generic,
                                             Parallelism par = {}) {
  if (trials < 1) throw std::invalid_argument("run_hypothesis_suite: trials must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_scale(std::log(0.5), std::log(2.0));
  auto draw = [&] { return std::exp(log_scale(rng)); };

  std::vector<MetricPair> pairs;
  pairs.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    if (kind == PairKind::hopf) {
      const double a1 = draw(), b1 = draw(), a2 = draw(), b2 = draw();
      pairs.emplace_back(DiagonalMetric(b1, b1, a1, a1), DiagonalMetric(b2, b2, a2, a2));
    } else {
      const double p = draw(), q = draw(), r = draw(), s = draw();
      const double u = draw(), v = draw(), w = draw(), x = draw();
      pairs.emplace_back(DiagonalMetric(p, q, r, s), DiagonalMetric(u, v, w, x));
    }
  }
  HypothesisReport report = run_hypothesis_on(pairs, rng, rule, tol, kind, par);
  report.seed = seed;
  return report;
}

}  // namespace doubled
