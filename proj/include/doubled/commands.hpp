// Subcommand bodies for the command-line tool. Each returns a JSON record
// (or a CSV table) so the same code path is exercised by tests and the CLI.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doubled/geometry.hpp"
#include "doubled/hopf.hpp"
#include "doubled/hypothesis.hpp"
#include "doubled/matchings.hpp"
#include "doubled/s3quad.hpp"

namespace doubled::cli {

using Json = nlohmann::ordered_json;

/// Fixed 17-significant-digit rendering used for CSV cells.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline Json vec_json(const Vec4& v) { return Json::array({v[0], v[1], v[2], v[3]}); }

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

/// Flat-table CSV: header row from the keys of the first record. Arrays are
/// expanded to key_0, key_1, ...; null becomes an empty cell.
inline std::string to_csv(const std::vector<Json>& rows) {
  if (rows.empty()) return "";
  std::ostringstream out;
  auto cells = [](const Json& row, bool header) {
    std::vector<std::string> c;
    for (auto it = row.begin(); it != row.end(); ++it) {
      const Json& v = it.value();
      if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (header) {
            c.push_back(it.key() + "_" + std::to_string(i));
          } else {
            c.push_back(v[i].is_number_float() ? format_double(v[i].get<double>()) : v[i].dump());
          }
        }
      } else if (header) {
        c.push_back(it.key());
      } else if (v.is_null()) {
        c.emplace_back();
      } else if (v.is_number_float()) {
        c.push_back(format_double(v.get<double>()));
      } else if (v.is_string()) {
        c.push_back(v.get<std::string>());
      } else {
        c.push_back(v.dump());
      }
    }
    return c;
  };
  auto write_line = [&](const std::vector<std::string>& c) {
    for (std::size_t i = 0; i < c.size(); ++i) out << (i ? "," : "") << c[i];
    out << '\n';
  };
  write_line(cells(rows.front(), true));
  for (const auto& r : rows) write_line(cells(r, false));
  return out.str();
}

// ---------------------------------------------------------------- potential

enum class PotentialMethod { numeric, closed, both, conjecture };

inline PotentialMethod parse_method(const std::string& s) {
  if (s == "numeric") return PotentialMethod::numeric;
  if (s == "closed") return PotentialMethod::closed;
  if (s == "both") return PotentialMethod::both;
  if (s == "conjecture") return PotentialMethod::conjecture;
  throw std::invalid_argument("unknown method '" + s + "' (numeric|closed|both|conjecture)");
}

inline Json cmd_potential(const Vec4& g1_scales, const Vec4& g2_scales, PotentialMethod method,
                          int level, Parallelism par = {}) {
  const DiagonalMetric g1(g1_scales), g2(g2_scales);
  const bool needs_hopf = method != PotentialMethod::numeric;
  if (needs_hopf && !(is_hopf_shaped(g1) && is_hopf_shaped(g2))) {
    throw std::invalid_argument(
        "closed/both/conjecture need Hopf-shaped metrics (a0 == a1 and a2 == a3 on each sheet)");
  }
  const SphereRule rule = build_rule(level);

  Json out;
  out["g1"] = vec_json(g1_scales);
  out["g2"] = vec_json(g2_scales);
  out["level"] = level;
  switch (method) {
    case PotentialMethod::numeric:
      out["method"] = "numeric";
      out["numeric"] = potential_numeric(g1, g2, rule, par);
      break;
    case PotentialMethod::closed:
      out["method"] = "closed";
      out["closed"] = potential_closed(to_hopf(g1), to_hopf(g2), rule, par);
      break;
    case PotentialMethod::both: {
      const double n = potential_numeric(g1, g2, rule, par);
      const double c = potential_closed(to_hopf(g1), to_hopf(g2), rule, par);
      out["method"] = "both";
      out["numeric"] = n;
      out["closed"] = c;
      out["abs_difference"] = std::abs(n - c);
      break;
    }
    case PotentialMethod::conjecture:
      out["method"] = "conjecture";
      out["conjecture"] = potential_via_conjecture(to_hopf(g1), to_hopf(g2));
      break;
  }
  return out;
}

// ------------------------------------------------------------------- action

inline Json cmd_action(const Vec4& g1_scales, const Vec4& g2_scales, double phi, int kappa,
                       double lambda, double c, int level, Parallelism par = {}) {
  const DoubledGeometry dg(DiagonalMetric(g1_scales), DiagonalMetric(g2_scales), phi,
                           kappa_from_int(kappa), lambda, c);
  const EffectiveParams p = effective_params(dg);
  const SphereRule rule = build_rule(level);
  const double kinetic = kinetic_term(dg.g1, dg.g2, rule, par);
  const double potential = potential_numeric(dg.g1, dg.g2, rule, par);

  Json out;
  out["g1"] = vec_json(g1_scales);
  out["g2"] = vec_json(g2_scales);
  out["phi"] = phi;
  out["kappa"] = kappa;
  out["lambda"] = lambda;
  out["c"] = c;
  out["level"] = level;
  out["lambda_e_sq"] = p.lambda_e_sq;
  out["alpha"] = p.alpha;
  out["kinetic"] = kinetic;
  out["potential"] = potential;
  out["density"] = action_density(dg, rule, par);
  return out;
}

// ------------------------------------------------------------------- series

inline Json pattern_json(const TracePattern& tp) {
  Json a = Json::array();
  for (int k : tp.cycle_lengths) a.push_back(k);
  return a;
}

inline Json series_json(const SeriesComparison& cmp) {
  Json out;
  out["omega"] = cmp.omega;
  out["spectral_radius"] = cmp.spectral_radius;
  out["order"] = cmp.order;
  out["level"] = cmp.level;
  out["value_paper"] = cmp.value_paper;
  out["value_exact"] = cmp.value_exact;
  out["value_quadrature"] = cmp.value_quadrature;
  out["exact_minus_quadrature"] = cmp.value_exact - cmp.value_quadrature;
  out["paper_minus_quadrature"] = cmp.value_paper - cmp.value_quadrature;
  out["tail_bound"] = cmp.tail_bound;
  Json rows = Json::array();
  for (const auto& r : cmp.rows) {
    Json row;
    row["m"] = r.m;
    row["term_paper"] = r.term_paper;
    row["term_exact"] = r.term_exact;
    row["cumulative_paper"] = r.cumulative_paper;
    row["cumulative_exact"] = r.cumulative_exact;
    row["ratio_paper_exact"] = optional_json(r.ratio_paper_exact);
    Json pats = Json::array();
    for (const auto& p : r.patterns) {
      Json pj;
      pj["pattern"] = pattern_json(p.pattern);
      pj["multiplicity"] = p.multiplicity;
      pj["trace_value"] = p.trace_value;
      pats.push_back(pj);
    }
    row["patterns"] = pats;
    rows.push_back(row);
  }
  out["rows"] = rows;
  return out;
}

/// CSV view of the per-order table (pattern census omitted).
inline std::string series_csv(const Json& record) {
  std::vector<Json> rows;
  for (const auto& r : record["rows"]) {
    Json row;
    row["m"] = r["m"];
    row["term_paper"] = r["term_paper"];
    row["term_exact"] = r["term_exact"];
    row["cumulative_paper"] = r["cumulative_paper"];
    row["cumulative_exact"] = r["cumulative_exact"];
    row["ratio_paper_exact"] = r["ratio_paper_exact"];
    row["value_quadrature"] = record["value_quadrature"];
    rows.push_back(row);
  }
  return to_csv(rows);
}

inline Json cmd_series(double omega, const std::array<double, 10>& eps_upper, int order, int level,
                       Parallelism par = {}) {
  const PerturbedForm pf = PerturbedForm::from_upper(omega, eps_upper);
  return series_json(compare_series(pf, order, build_rule(level), par));
}

// ------------------------------------------------------------------ moments

inline Json cmd_moments(int m) {
  if (m < 1 || m > kMaxSeriesOrder) {
    throw std::invalid_argument("moments: m must be in [1, " + std::to_string(kMaxSeriesOrder) + "]");
  }
  const PiSquaredMultiple c = c_coefficient(m);
  Json out;
  out["m"] = m;
  out["c_m"] = c.to_string();
  out["c_m_numerator"] = c.coefficient.numerator();
  out["c_m_denominator"] = c.coefficient.denominator();
  out["c_m_value"] = c.value();
  out["matchings"] = double_factorial(2 * m - 1);
  out["n_enumerated"] = count_n(m);
  out["n_closed_form"] = count_n_inclusion_exclusion(m);
  Json census = Json::array();
  for (const auto& [pattern, mult] : pattern_census(m)) {
    Json row;
    row["pattern"] = pattern_json(pattern);
    row["multiplicity"] = mult;
    census.push_back(row);
  }
  out["patterns"] = census;
  return out;
}

// -------------------------------------------------------------------- sweep

struct SweepAxis {
  std::string name;  // a0..a3 for one scale factor of g1, or a / b for Hopf pairs of axes
  double min;
  double max;
  int steps;
};

/// Parses "name:min:max:steps".
inline SweepAxis parse_axis(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 4) throw std::invalid_argument("axis spec must be name:min:max:steps, got '" + spec + "'");
  SweepAxis ax{parts[0], 0.0, 0.0, 0};
  static const std::vector<std::string> names{"a0", "a1", "a2", "a3", "a", "b"};
  if (std::find(names.begin(), names.end(), ax.name) == names.end()) {
    throw std::invalid_argument("axis name must be one of a0 a1 a2 a3 a b, got '" + ax.name + "'");
  }
  try {
    ax.min = std::stod(parts[1]);
    ax.max = std::stod(parts[2]);
    ax.steps = std::stoi(parts[3]);
  } catch (const std::exception&) {
    throw std::invalid_argument("axis spec has a malformed number: '" + spec + "'");
  }
  if (!(ax.min > 0.0) || !(ax.max >= ax.min) || ax.steps < 1 || (ax.steps == 1 && ax.max != ax.min)) {
    throw std::invalid_argument("axis range must satisfy 0 < min <= max, steps >= 1 (1 only when min == max)");
  }
  return ax;
}

inline double axis_value(const SweepAxis& ax, int i) {
  return ax.steps == 1 ? ax.min : ax.min + (ax.max - ax.min) * i / (ax.steps - 1);
}

inline void apply_axis(Vec4& g, const SweepAxis& ax, double v) {
  if (ax.name == "a") {
    g[2] = g[3] = v;
  } else if (ax.name == "b") {
    g[0] = g[1] = v;
  } else {
    g[ax.name[1] - '0'] = v;
  }
}

/// One CSV row per grid point: g1 scales, numeric potential, closed form
/// (empty unless both metrics are Hopf-shaped) and V'.
inline std::string cmd_sweep(const Vec4& g1_base, const Vec4& g2_fixed,
                             const std::vector<SweepAxis>& axes, int level, Parallelism par = {}) {
  if (axes.empty() || axes.size() > 2) throw std::invalid_argument("sweep needs one or two axes");
  const DiagonalMetric g2(g2_fixed);
  const SphereRule rule = build_rule(level);
  const int outer = axes[0].steps;
  const int inner = axes.size() == 2 ? axes[1].steps : 1;

  std::vector<Json> rows;
  for (int i = 0; i < outer; ++i) {
    for (int j = 0; j < inner; ++j) {
      Vec4 s = g1_base;
      apply_axis(s, axes[0], axis_value(axes[0], i));
      if (axes.size() == 2) apply_axis(s, axes[1], axis_value(axes[1], j));
      const DiagonalMetric g1(s);
      const double numeric = potential_numeric(g1, g2, rule, par);
      std::optional<double> closed;
      if (is_hopf_shaped(g1) && is_hopf_shaped(g2)) {
        closed = potential_closed(to_hopf(g1), to_hopf(g2), rule, par);
      }
      Json row;
      row["g1"] = vec_json(s);
      row["v_numeric"] = numeric;
      row["v_closed"] = optional_json(closed);
      row["v_prime"] = numeric / (kSphereArea * g2.sqrt_det());
      rows.push_back(row);
    }
  }
  return to_csv(rows);
}

// --------------------------------------------------------------- hypothesis

inline Json hypothesis_json(const HypothesisReport& r) {
  Json out;
  out["trials"] = r.trials;
  out["seed"] = r.seed;
  out["rng"] = r.rng;
  out["pairs"] = to_string(r.pairs);
  out["level"] = r.level;
  out["tol"] = r.tol;
  out["max_violation"] = r.max_violation;
  out["max_exchange"] = r.max_exchange;
  out["max_scaling"] = r.max_scaling;
  out["max_permutation"] = r.max_permutation;
  if (r.pairs == PairKind::hopf) out["max_closed_form"] = r.max_closed_form;
  out["failure_count"] = r.failures.size();
  Json fails = Json::array();
  for (const auto& f : r.failures) {
    Json fj;
    fj["trial"] = f.trial;
    fj["g1"] = vec_json(f.g1);
    fj["g2"] = vec_json(f.g2);
    fj["transformation"] = f.transformation;
    fj["parameters"] = f.parameters;
    fj["discrepancy"] = f.discrepancy;
    fails.push_back(fj);
  }
  out["failures"] = fails;
  return out;
}

inline Json cmd_hypothesis(int trials, std::uint64_t seed, int level, double tol, PairKind kind,
                           Parallelism par = {}) {
  return hypothesis_json(run_hypothesis_suite(trials, seed, build_rule(level), tol, kind, par));
}

}  // namespace doubled::cli
