// Acceptance run: one PASS/FAIL line per criterion, optional markdown report.
//   acceptance [--report PATH]
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "doubled/commands.hpp"
#include "oracles.hpp"

using namespace doubled;
using doubled::cli::Json;

namespace {

constexpr double kTwoPi2 = 2.0 * std::numbers::pi * std::numbers::pi;

std::string fmt(double v, const char* spec = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::ostringstream report;

// ---------------------------------------------------------------- helpers

std::uniform_real_distribution<double> unit_box(0.5, 2.0);

bool off_surface(double a1, double b1, double a2, double b2) {
  return std::abs(a2 * b1 - a1 * b2) > 0.05 * (a2 * b1 + a1 * b2);
}

DiagonalMetric random_diag(std::mt19937_64& rng) {
  return DiagonalMetric(unit_box(rng), unit_box(rng), unit_box(rng), unit_box(rng));
}

/// 5 seeded perturbed forms of increasing size.
std::vector<PerturbedForm> series_inputs() {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> omega(0.5, 3.0);
  std::vector<PerturbedForm> out;
  for (double rho : {0.05, 0.1, 0.2, 0.3, 0.4}) {
    const Eigen::Matrix4d e = oracle::random_traceless(rng, rho);
    out.emplace_back(omega(rng), e);
  }
  return out;
}

// --------------------------------------------------------------- criteria

Outcome sphere_area() {
  const double v = integrate(build_rule(8), [](const Vec4&) { return 1.0; });
  const double err = std::abs(v - kTwoPi2) / kTwoPi2;
  return {err <= 1e-12, "rel err " + fmt(err, "%.3g")};
}

/// Returns the serialized per-point record so the determinism rerun can compare bytes.
std::string closed_vs_quadrature_record(Parallelism par, double* worst_out) {
  std::mt19937_64 rng(2);
  Json points = Json::array();
  double worst = 0.0;
  int n = 0;
  while (n < 100) {
    const double a1 = unit_box(rng), b1 = unit_box(rng), a2 = unit_box(rng), b2 = unit_box(rng);
    if (!off_surface(a1, b1, a2, b2)) continue;
    const HopfMetric h1(a1, b1), h2(a2, b2);
    const double closed = potential_closed(h1, h2, default_rule(), par);
    const double numeric = potential_numeric(to_diagonal(h1), to_diagonal(h2), default_rule(), par);
    const double rel = std::abs(closed - numeric) / numeric;
    worst = std::max(worst, rel);
    points.push_back(Json::array({a1, b1, a2, b2, closed, numeric}));
    ++n;
  }
  if (worst_out) *worst_out = worst;
  return points.dump();
}

Outcome closed_vs_quadrature() {
  double worst = 0.0;
  closed_vs_quadrature_record({}, &worst);
  return {worst <= 1e-8, "100 pairs, max rel err " + fmt(worst, "%.3g")};
}

Outcome reductions() {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double a = unit_box(rng), b1 = unit_box(rng), b2 = unit_box(rng);
    const double expect = kTwoPi2 * a * a * (b1 - b2) * (b1 - b2);
    worst = std::max(worst, oracle::rel(potential_closed(HopfMetric(a, b1), HopfMetric(a, b2)), expect));
  }
  for (int i = 0; i < 20; ++i) {
    const double b = unit_box(rng), a1 = unit_box(rng), a2 = unit_box(rng);
    const double expect = kTwoPi2 * (a1 - a2) * (a1 - a2) * b * b;
    worst = std::max(worst, oracle::rel(potential_closed(HopfMetric(a1, b), HopfMetric(a2, b)), expect));
  }
  return {worst <= 1e-12, "40 points, max rel err " + fmt(worst, "%.3g")};
}

Outcome singular_surface() {
  std::mt19937_64 rng(4);
  report << "## Limit on the singular surface a2 b1 = a1 b2\n\n"
         << "Two candidate limits of the closed form as b1 -> b2 a1 / a2:\n\n"
         << "- with area factor: 2 pi^2 (b2^2/a2^2)(a1-a2)^2(a1^2+a2^2)\n"
         << "- as displayed in the source, without the 2 pi^2 factor\n\n"
         << "Quadrature at level " << kDefaultLevel << ":\n\n"
         << "| a1 | a2 | b2 | quadrature | with 2 pi^2 | rel err | without | rel err |\n"
         << "|---|---|---|---|---|---|---|---|\n";
  int with_hits = 0, without_hits = 0;
  double worst_with = 0.0;
  for (int i = 0; i < 10; ++i) {
    double a1 = unit_box(rng), a2 = unit_box(rng), b2 = unit_box(rng);
    while (std::abs(a1 - a2) < 0.05 * a2) a1 = unit_box(rng);  // keep the limit away from zero
    const double b1 = b2 * a1 / a2;
    const double numeric = potential_numeric(DiagonalMetric(b1, b1, a1, a1), DiagonalMetric(b2, b2, a2, a2),
                                             default_rule());
    const double bare = (b2 * b2) / (a2 * a2) * (a1 - a2) * (a1 - a2) * (a1 * a1 + a2 * a2);
    const double with_area = kTwoPi2 * bare;
    const double e_with = oracle::rel(numeric, with_area);
    const double e_without = oracle::rel(numeric, bare);
    worst_with = std::max(worst_with, e_with);
    const bool hit_with = e_with <= 1e-6, hit_without = e_without <= 1e-6;
    with_hits += hit_with;
    without_hits += hit_without;
    report << "| " << fmt(a1, "%.6f") << " | " << fmt(a2, "%.6f") << " | " << fmt(b2, "%.6f") << " | "
           << fmt(numeric, "%.12g") << " | " << fmt(with_area, "%.12g") << " | " << fmt(e_with, "%.2e") << " | "
           << fmt(bare, "%.12g") << " | " << fmt(e_without, "%.2e") << " |\n";
  }
  const bool pass = with_hits == 10 && without_hits == 0;
  report << "\nVerdict: quadrature agrees with the limit that carries 2 pi^2 at " << with_hits
         << "/10 points and with the displayed limit at " << without_hits
         << "/10. The displayed limit is missing the sphere-area factor; the fallback used by "
            "`potential_closed` near the surface is quadrature and reproduces the 2 pi^2 version.\n\n";
  return {pass, "with 2pi^2: " + std::to_string(with_hits) + "/10 (max rel " + fmt(worst_with, "%.2g") +
                    "), without: " + std::to_string(without_hits) + "/10"};
}

Outcome exchange_symmetry() {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto g1 = random_diag(rng), g2 = random_diag(rng);
    const double v12 = potential_numeric(g1, g2, default_rule());
    const double v21 = potential_numeric(g2, g1, default_rule());
    worst = std::max(worst, std::abs(v12 - v21) / v12);
  }
  return {worst <= 1e-10, "100 pairs, max rel asymmetry " + fmt(worst, "%.3g")};
}

std::string hypothesis_record(Parallelism par, HypothesisReport* out) {
  auto r = run_hypothesis_suite(200, 42, default_rule(), 1e-7, PairKind::generic, par);
  const std::string bytes = cli::hypothesis_json(r).dump();
  if (out) *out = std::move(r);
  return bytes;
}

Outcome hypothesis_suite() {
  HypothesisReport r;
  hypothesis_record({}, &r);
  report << "## Invariance checks of the bimetric form\n\n"
         << "200 generic diagonal pairs, seed 42, level " << r.level << ", tolerance 1e-7. Per-axis "
            "scale factors are log-uniform within [1/2, 2], restricted so both rescaled metrics stay in "
            "[0.5, 2] where level 64 is accurate to ~1e-14. Unrestricted factors reach axis ratios near 16; "
            "there level-64 quadrature error alone is ~1e-7 to 2e-6 and vanishes (~6e-12) at level 128.\n\n"
         << "| check | max relative discrepancy |\n|---|---|\n"
         << "| exchange | " << fmt(r.max_exchange, "%.3e") << " |\n"
         << "| per-axis scaling | " << fmt(r.max_scaling, "%.3e") << " |\n"
         << "| axis permutation | " << fmt(r.max_permutation, "%.3e") << " |\n\n"
         << "Failures: " << r.failures.size() << "\n\n";
  return {r.failures.empty(), "200 trials, " + std::to_string(r.failures.size()) + " failures, max " +
                                  fmt(r.max_violation, "%.3g")};
}

Outcome bimetric_identity() {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double a1 = unit_box(rng), b1 = unit_box(rng), a2 = unit_box(rng), b2 = unit_box(rng);
    const double x = b1 / b2, y = a1 / a2;
    const double lhs = script_v(x, y) * a2 * a2 * b2 * b2;
    const double rhs = script_v(1 / x, 1 / y) * a1 * a1 * b1 * b1;
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
  }
  return {worst <= 1e-10, "100 pairs, max rel err " + fmt(worst, "%.3g")};
}

Outcome combinatorics() {
  bool ok = true;
  std::string why;
  for (int m = 1; m <= 8; ++m) {
    if (count_n(m) != count_n_inclusion_exclusion(m)) {
      ok = false;
      why += " N mismatch at m=" + std::to_string(m) + ";";
    }
  }
  if (count_n(1) != 0 || count_n(2) != 2 || count_n(3) != 8) {
    ok = false;
    why += " small N values;";
  }
  if (c_coefficient(1).coefficient != Rational(1, 2)) {
    ok = false;
    why += " c1;";
  }
  for (int m = 1; m <= 12; ++m) {
    if (c_coefficient(m).coefficient != c_coefficient(m - 1).coefficient / Rational(2 * m + 2)) {
      ok = false;
      why += " c recursion at m=" + std::to_string(m) + ";";
    }
  }
  return {ok, ok ? "N_2m for m<=8, c_m recursion for m<=12" : why};
}

Outcome moments_vs_quadrature() {
  const auto rule = build_rule(32);
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> half(1, 4), label(0, 3);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    // Each label drawn twice, then shuffled: even exponents, so no tuple vanishes by parity.
    std::vector<int> idx;
    for (int k = half(rng); k > 0; --k) idx.insert(idx.end(), 2, label(rng));
    std::shuffle(idx.begin(), idx.end(), rng);
    const double exact = moment_integral(idx).value();
    const double quad = integrate(rule, [&](const Vec4& x) {
      double p = 1.0;
      for (int g : idx) p *= x[g];
      return p;
    });
    worst = std::max(worst, std::abs(quad - exact) / exact);
  }
  return {worst <= 1e-11, "50 tuples, max rel err " + fmt(worst, "%.3g")};
}

Outcome series_oracle() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> rho_dist(0.001, 0.05), omega_dist(0.5, 3.0);
  double worst_fraction = 0.0;
  bool ok = true;
  for (int i = 0; i < 20; ++i) {
    const double rho = rho_dist(rng);
    const PerturbedForm pf(omega_dist(rng), oracle::random_traceless(rng, rho));
    const double diff = std::abs(series_exact(pf, 4) - rational_integral(pf, default_rule()));
    const double bound = 10 * std::pow(pf.spectral_radius(), 5) * kTwoPi2 / pf.omega();
    ok = ok && diff <= bound;
    worst_fraction = std::max(worst_fraction, diff / bound);
  }
  return {ok, "20 forms, max |error| / bound = " + fmt(worst_fraction, "%.3g")};
}

Outcome integrand_identity() {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const DoubledGeometry dg(random_diag(rng), random_diag(rng), unit_box(rng),
                             coin(rng) ? Kappa::plus : Kappa::minus, unit_box(rng), unit_box(rng));
    const auto xi = UnitVector4::normalized({normal(rng), normal(rng), normal(rng), normal(rng)});
    worst = std::max(worst, oracle::rel(b2_trace_matrix(dg, xi), b2_trace_closed(dg, xi)));
  }
  return {worst <= 1e-12, "1000 samples, max rel err " + fmt(worst, "%.3g")};
}

std::string series_record(Parallelism par, std::vector<SeriesComparison>* out) {
  Json all = Json::array();
  for (const auto& pf : series_inputs()) {
    auto cmp = compare_series(pf, kMaxSeriesOrder, default_rule(), par);
    all.push_back(cli::series_json(cmp));
    if (out) out->push_back(std::move(cmp));
  }
  return all.dump();
}

Outcome series_adjudication() {
  std::vector<SeriesComparison> runs;
  series_record({}, &runs);
  report << "## Perturbative series for the rational integral\n\n"
         << "Integral of 1/(xi^T (Omega(I + eps)) xi) over S^3, expanded to order " << kMaxSeriesOrder
         << ". `published` is the series in its printed form; `exact` is the trace-pattern series "
            "(-1)^m c_m sum over matchings of prod tr(eps^k); `quadrature` is direct integration at level "
         << kDefaultLevel << ".\n\n";
  bool ok = true;
  int idx = 0;
  for (const auto& c : runs) {
    ++idx;
    const double err_exact = std::abs(c.value_exact - c.value_quadrature);
    const double err_pub = std::abs(c.value_paper - c.value_quadrature);
    ok = ok && err_exact <= c.tail_bound;
    report << "### Input " << idx << ": Omega = " << fmt(c.omega, "%.6f") << ", rho(eps) = "
           << fmt(c.spectral_radius, "%.3f") << "\n\n"
           << "| m | published term | exact term | published / exact | cumulative published | cumulative exact |\n"
           << "|---|---|---|---|---|---|\n";
    for (const auto& r : c.rows) {
      report << "| " << r.m << " | " << fmt(r.term_paper + 0.0, "%.6e") << " | " << fmt(r.term_exact + 0.0, "%.6e") << " | "
             << (r.ratio_paper_exact ? fmt(*r.ratio_paper_exact, "%.6g") : std::string("n/a")) << " | "
             << fmt(r.cumulative_paper, "%.15g") << " | " << fmt(r.cumulative_exact, "%.15g") << " |\n";
    }
    report << "\nquadrature " << fmt(c.value_quadrature, "%.15g") << "; |exact - quadrature| = "
           << fmt(err_exact, "%.3e") << " (tail bound " << fmt(c.tail_bound, "%.3e")
           << "); |published - quadrature| = " << fmt(err_pub, "%.3e") << "\n\n";
  }
  report << "Findings:\n\n"
         << "- The exact series converges to quadrature inside the geometric tail bound for every input.\n"
         << "- At m = 2 the printed term (2 pi^2/3) tr(eps^2) is 4 times the exact (pi^2/6) tr(eps^2), a "
            "factor 2^m from writing (-2)^m where the expansion gives (-1)^m.\n"
         << "- For m >= 3 the printed form keeps a single tr(eps^m) weighted by N_2m, and its extra "
            "factor 2^m persists. At m = 3 and m = 5 the ratio is still input independent (8 and 30.22): "
            "with tr(eps) = 0 the exact contraction is proportional to tr(eps^3), and tr(eps^5) = (5/6) "
            "tr(eps^2) tr(eps^3) for any traceless 4x4 matrix. At m = 4 and from m = 6 on the exact "
            "contraction contains independent products such as tr(eps^2)^2, so the ratio changes from "
            "input to input and no rescaling of the printed coefficients can repair it.\n\n";
  return {ok, "5 inputs to order " + std::to_string(kMaxSeriesOrder) + ", exact within tail bound: " +
                  (ok ? "yes" : "no")};
}

Outcome determinism() {
  const std::string a2 = closed_vs_quadrature_record({}, nullptr);
  const std::string b2 = closed_vs_quadrature_record(Parallelism{2}, nullptr);
  const std::string a6 = hypothesis_record({}, nullptr);
  const std::string b6 = hypothesis_record(Parallelism{3}, nullptr);
  const std::string a12 = series_record({}, nullptr);
  const std::string b12 = series_record(Parallelism{2}, nullptr);
  const bool s2 = a2 == b2, s6 = a6 == b6, s12 = a12 == b12;
  return {s2 && s6 && s12, std::string("closed-vs-quadrature ") + (s2 ? "same" : "DIFFERENT") +
                               ", hypothesis " + (s6 ? "same" : "DIFFERENT") + ", series " +
                               (s12 ? "same" : "DIFFERENT") + " (rerun with more threads)"};
}

}  // namespace

int main(int argc, char** argv) {
  std::string report_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--report" && i + 1 < argc) {
      report_path = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--report PATH]\n";
      return 2;
    }
  }

  report << "# Discrepancy report\n\n"
         << "Generated by the `acceptance` test program. Numbers are reproducible bit for bit.\n\n";

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"sphere area at level 8", sphere_area},
      {"Hopf closed form vs quadrature", closed_vs_quadrature},
      {"closed-form reductions a1=a2 and b1=b2", reductions},
      {"singular-surface limit adjudication", singular_surface},
      {"exchange symmetry of the potential", exchange_symmetry},
      {"bimetric invariance suite (200 trials, seed 42)", hypothesis_suite},
      {"bimetric identity on Hopf pairs", bimetric_identity},
      {"matching counts and c_m", combinatorics},
      {"moment integrals vs quadrature", moments_vs_quadrature},
      {"series vs quadrature within tail bound", series_oracle},
      {"b2 trace: matrix product vs closed form", integrand_identity},
      {"series adjudication tables", series_adjudication},
      {"determinism of criteria 2, 6, 12", determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";

  if (!report_path.empty()) {
    std::ofstream f(report_path);
    if (!f) {
      std::cerr << "cannot write report to " << report_path << "\n";
      return 2;
    }
    f << report.str();
  }
  return failures == 0 ? 0 : 1;
}
