// Sphere moments through perfect matchings, and the near-diagonal series
// for the integral of 1/(xi^T A xi) with A = Omega (delta + eps).
//
// The moment integral of xi^{g_1} ... xi^{g_2m} over S^3 is c_m times the
// number of perfect matchings of the 2m slots that pair equal labels, with
// c_m = 4 pi^2 / (2m+2)!!. Contracting m copies of a symmetric eps along a
// matching gives a product of traces tr(eps^k), one per cycle of the graph
// whose vertices are the eps blocks (2l-1, 2l) and whose edges are the pairs.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/rational.hpp>
#include <Eigen/Dense>

#include "doubled/perturbed_form.hpp"
#include "doubled/s3quad.hpp"

namespace doubled {

using Rational = boost::rational<std::int64_t>;

/// An exact rational multiple of pi^2.
struct PiSquaredMultiple {
  Rational coefficient{0};

  double value() const noexcept {
    return boost::rational_cast<double>(coefficient) * std::numbers::pi * std::numbers::pi;
  }
  std::string to_string() const {
    if (coefficient.numerator() == 0) return "0";
    std::string s = std::to_string(coefficient.numerator());
    if (coefficient.denominator() != 1) s += "/" + std::to_string(coefficient.denominator());
    return s + " pi^2";
  }
  friend bool operator==(const PiSquaredMultiple&, const PiSquaredMultiple&) = default;
};

inline constexpr int kMaxMatchingOrder = 10;
inline constexpr int kMaxSeriesOrder = 8;

/// n!! for n >= -1, with (-1)!! = 0!! = 1.
inline std::int64_t double_factorial(int n) {
  if (n < -1) throw std::invalid_argument("double_factorial: n must be >= -1");
  std::int64_t r = 1;
  for (int k = n; k > 1; k -= 2) r *= k;
  return r;
}

/// c_m = 4 / (2m+2)!!, times pi^2.
inline PiSquaredMultiple c_coefficient(int m) {
  if (m < 0) throw std::invalid_argument("c_coefficient: m must be >= 0");
  return {Rational(4, double_factorial(2 * m + 2))};
}

/// Canonical perfect matching of {1..2m}: pairs (a_j, b_j) with a_j < b_j
/// and a_1 < a_2 < ... < a_m.
class Matching {
 public:
  using Pair = std::pair<int, int>;

  explicit Matching(std::vector<Pair> pairs) : pairs_(std::move(pairs)) {
    const int n = 2 * static_cast<int>(pairs_.size());
    std::vector<bool> seen(n + 1, false);
    int prev_first = 0;
    for (const auto& [a, b] : pairs_) {
      if (a < 1 || b > n || !(a < b) || !(a > prev_first)) {
        throw std::invalid_argument("Matching: pairs are not in canonical form");
      }
      if (seen[a] || seen[b]) throw std::invalid_argument("Matching: index used twice");
      seen[a] = seen[b] = true;
      prev_first = a;
    }
  }

  /// From a 0-based partner table (partner[partner[i]] == i).
  static Matching from_partners(std::span<const int> partner) {
    std::vector<Pair> pairs;
    pairs.reserve(partner.size() / 2);
    for (int i = 0; i < static_cast<int>(partner.size()); ++i) {
      if (partner[i] > i) pairs.emplace_back(i + 1, partner[i] + 1);
    }
    return Matching(std::move(pairs));
  }

  int order() const noexcept { return static_cast<int>(pairs_.size()); }
  const std::vector<Pair>& pairs() const noexcept { return pairs_; }

  /// 0-based partner table.
  std::vector<int> partners() const {
    std::vector<int> p(2 * pairs_.size());
    for (const auto& [a, b] : pairs_) {
      p[a - 1] = b - 1;
      p[b - 1] = a - 1;
    }
    return p;
  }

  friend bool operator==(const Matching&, const Matching&) = default;

 private:
  std::vector<Pair> pairs_;
};

/// Sorted (descending) cycle lengths; the pattern stands for prod_i tr(eps^{k_i}).
struct TracePattern {
  std::vector<int> cycle_lengths;

  int order() const noexcept {
    int s = 0;
    for (int k : cycle_lengths) s += k;
    return s;
  }
  auto operator<=>(const TracePattern&) const = default;
};

namespace detail {

inline void visit_matchings(std::vector<int>& partner, int first_free,
                            const std::function<void(std::span<const int>)>& visit) {
  const int n = static_cast<int>(partner.size());
  while (first_free < n && partner[first_free] >= 0) ++first_free;
  if (first_free == n) {
    visit(partner);
    return;
  }
  for (int j = first_free + 1; j < n; ++j) {
    if (partner[j] >= 0) continue;
    partner[first_free] = j;
    partner[j] = first_free;
    visit_matchings(partner, first_free + 1, visit);
    partner[first_free] = -1;
    partner[j] = -1;
  }
}

// Cycle lengths of the block graph for a 0-based partner table.
inline TracePattern pattern_of(std::span<const int> partner) {
  const int blocks = static_cast<int>(partner.size()) / 2;
  std::vector<bool> seen(blocks, false);
  TracePattern tp;
  for (int start = 0; start < blocks; ++start) {
    if (seen[start]) continue;
    int len = 0;
    int pos = 2 * start;
    while (true) {
      const int q = partner[pos];
      const int blk = q / 2;
      seen[blk] = true;
      ++len;
      if (blk == start) break;
      pos = q ^ 1;
    }
    seen[start] = true;
    tp.cycle_lengths.push_back(len);
  }
  std::sort(tp.cycle_lengths.rbegin(), tp.cycle_lengths.rend());
  return tp;
}

inline void check_matching_order(int m) {
  if (m < 0 || m > kMaxMatchingOrder) {
    throw std::invalid_argument("matching order must be in [0, " +
                                std::to_string(kMaxMatchingOrder) + "], got " + std::to_string(m));
  }
}

}  // namespace detail

/// Calls visit(partner) for every perfect matching of 2m slots, in the
/// order produced by pairing the smallest free slot with each larger one.
inline void for_each_matching(int m, const std::function<void(std::span<const int>)>& visit) {
  detail::check_matching_order(m);
  std::vector<int> partner(2 * m, -1);
  detail::visit_matchings(partner, 0, visit);
}

inline std::vector<Matching> enumerate_matchings(int m) {
  if (m < 1) throw std::invalid_argument("enumerate_matchings: m must be >= 1");
  detail::check_matching_order(m);
  std::vector<Matching> out;
  out.reserve(static_cast<std::size_t>(double_factorial(2 * m - 1)));
  for_each_matching(m, [&](std::span<const int> p) { out.push_back(Matching::from_partners(p)); });
  return out;
}

/// Number of matchings with no pair of the form (2l-1, 2l), by enumeration.
inline std::int64_t count_n(int m) {
  if (m < 1) throw std::invalid_argument("count_n: m must be >= 1");
  std::int64_t count = 0;
  for_each_matching(m, [&](std::span<const int> p) {
    for (std::size_t l = 0; l < p.size(); l += 2) {
      if (p[l] == static_cast<int>(l) + 1) return;
    }
    ++count;
  });
  return count;
}

/// sum_{k=0}^{m} (-1)^k C(m,k) (2(m-k)-1)!!.
inline std::int64_t count_n_inclusion_exclusion(int m) {
  if (m < 1) throw std::invalid_argument("count_n_inclusion_exclusion: m must be >= 1");
  std::int64_t total = 0;
  std::int64_t binom = 1;
  for (int k = 0; k <= m; ++k) {
    const std::int64_t term = binom * double_factorial(2 * (m - k) - 1);
    total += (k % 2 == 0) ? term : -term;
    binom = binom * (m - k) / (k + 1);
  }
  return total;
}

inline TracePattern trace_pattern(const Matching& mt) { return detail::pattern_of(mt.partners()); }

using PatternCensus = std::map<TracePattern, std::int64_t>;

/// Multiplicity of every trace pattern among the matchings of order m.
inline PatternCensus pattern_census(int m) {
  PatternCensus census;
  if (m == 0) {
    census[TracePattern{}] = 1;
    return census;
  }
  for_each_matching(m, [&](std::span<const int> p) { ++census[detail::pattern_of(p)]; });
  return census;
}

/// Integral over S^3 of xi^{g_1} ... xi^{g_n} for axis labels g_i in {0..3}.
/// Odd n gives exact zero.
inline PiSquaredMultiple moment_integral(std::span<const int> indices) {
  for (int g : indices) {
    if (g < 0 || g > 3) throw std::invalid_argument("moment_integral: labels must be in {0,1,2,3}");
  }
  if (indices.size() % 2 != 0) return {Rational(0)};
  const int m = static_cast<int>(indices.size() / 2);
  if (m > kMaxSeriesOrder) {
    throw std::invalid_argument("moment_integral: at most " + std::to_string(2 * kMaxSeriesOrder) +
                                " indices");
  }
  if (m == 0) return c_coefficient(0);
  std::int64_t delta_terms = 0;
  for_each_matching(m, [&](std::span<const int> p) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (indices[i] != indices[p[i]]) return;
    }
    ++delta_terms;
  });
  return {c_coefficient(m).coefficient * delta_terms};
}

/// tr(eps^k) for k = 0..max_power (index 0 holds 4).
inline std::vector<double> power_traces(const Eigen::Matrix4d& eps, int max_power) {
  std::vector<double> tr(max_power + 1);
  Eigen::Matrix4d p = Eigen::Matrix4d::Identity();
  tr[0] = 4.0;
  for (int k = 1; k <= max_power; ++k) {
    p = p * eps;
    tr[k] = p.trace();
  }
  return tr;
}

inline double pattern_value(const TracePattern& tp, std::span<const double> traces) {
  double v = 1.0;
  for (int k : tp.cycle_lengths) v *= traces[k];
  return v;
}

namespace detail {

inline void check_series_order(int order, int min_order) {
  if (order < min_order || order > kMaxSeriesOrder) {
    throw std::invalid_argument("series order must be in [" + std::to_string(min_order) + ", " +
                                std::to_string(kMaxSeriesOrder) + "], got " +
                                std::to_string(order));
  }
}

}  // namespace detail

/// Per-order terms m = 0..order of the series in its published form:
/// 2 pi^2, 0, (2 pi^2/3) tr(eps^2), then 4 pi^2 (-2)^m / (2m+2)!! N_2m tr(eps^m).
/// Every term already carries the 1/Omega prefactor.
inline std::vector<double> series_paper_terms(const PerturbedForm& pf, int order) {
  detail::check_series_order(order, 2);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const auto tr = power_traces(pf.eps(), order);
  std::vector<double> terms(order + 1, 0.0);
  terms[0] = 2.0 * pi2;
  terms[2] = 2.0 * pi2 / 3.0 * tr[2];
  for (int m = 3; m <= order; ++m) {
    const double sign_pow = std::pow(-2.0, m);
    terms[m] = 4.0 * pi2 * sign_pow / static_cast<double>(double_factorial(2 * m + 2)) *
               static_cast<double>(count_n(m)) * tr[m];
  }
  for (double& t : terms) t /= pf.omega();
  return terms;
}

inline double series_paper(const PerturbedForm& pf, int order) {
  CompensatedSum s;
  for (double t : series_paper_terms(pf, order)) s.add(t);
  return s.value();
}

/// Per-order terms (1/Omega) (-1)^m c_m sum_{matchings} prod tr(eps^k) of
/// the geometric expansion of 1/(Omega (1 + xi^T eps xi)).
inline std::vector<double> series_exact_terms(const PerturbedForm& pf, int order) {
  detail::check_series_order(order, 0);
  const auto tr = power_traces(pf.eps(), order);
  std::vector<double> terms(order + 1, 0.0);
  for (int m = 0; m <= order; ++m) {
    CompensatedSum contraction;
    for (const auto& [pattern, mult] : pattern_census(m)) {
      contraction.add(static_cast<double>(mult) * pattern_value(pattern, tr));
    }
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    terms[m] = sign * c_coefficient(m).value() * contraction.value() / pf.omega();
  }
  return terms;
}

inline double series_exact(const PerturbedForm& pf, int order) {
  CompensatedSum s;
  for (double t : series_exact_terms(pf, order)) s.add(t);
  return s.value();
}

struct PatternTerm {
  TracePattern pattern;
  std::int64_t multiplicity;
  double trace_value;
};

struct SeriesRow {
  int m;
  double term_paper;
  double term_exact;
  double cumulative_paper;
  double cumulative_exact;
  std::optional<double> ratio_paper_exact;  // empty when the exact term is zero
  std::vector<PatternTerm> patterns;
};

struct SeriesComparison {
  double omega;
  double spectral_radius;
  int order;
  int level;
  double value_paper;
  double value_exact;
  double value_quadrature;
  /// 10 rho^{order+1} 2 pi^2 / Omega.
  double tail_bound;
  std::vector<SeriesRow> rows;
};

/// Three routes to the same integral side by side: the published series,
/// the trace-pattern series, and direct quadrature.
inline SeriesComparison compare_series(const PerturbedForm& pf, int order, const SphereRule& rule,
                                       Parallelism par = {}) {
  detail::check_series_order(order, 2);
  const auto published = series_paper_terms(pf, order);
  const auto exact = series_exact_terms(pf, order);
  const auto tr = power_traces(pf.eps(), order);

  SeriesComparison out{};
  out.omega = pf.omega();
  out.spectral_radius = pf.spectral_radius();
  out.order = order;
  out.level = rule.level();
  out.value_quadrature = rational_integral(pf, rule, par);
  out.tail_bound = 10.0 * std::pow(pf.spectral_radius(), order + 1) * kSphereArea / pf.omega();

  CompensatedSum cum_published;
  CompensatedSum cum_exact;
  for (int m = 0; m <= order; ++m) {
    cum_published.add(published[m]);
    cum_exact.add(exact[m]);
    SeriesRow row{m, published[m], exact[m], cum_published.value(), cum_exact.value(), std::nullopt, {}};
    if (exact[m] != 0.0) row.ratio_paper_exact = published[m] / exact[m];
    for (const auto& [pattern, mult] : pattern_census(m)) {
      row.patterns.push_back({pattern, mult, pattern_value(pattern, tr)});
    }
    out.rows.push_back(std::move(row));
  }
  out.value_paper = cum_published.value();
  out.value_exact = cum_exact.value();
  return out;
}

}  // namespace doubled
