// doubled_cli: potentials, action densities, conjecture checks and the
// near-diagonal series for doubled geometries with constant diagonal metrics.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "doubled/commands.hpp"

namespace {

using doubled::Vec4;
using doubled::cli::Json;

Vec4 parse_metric(const std::string& text, const char* what) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": '" + item + "' is not a number");
    }
  }
  if (v.size() != 4) {
    throw std::invalid_argument(std::string(what) + " needs four comma-separated scale factors");
  }
  return {v[0], v[1], v[2], v[3]};
}

std::array<double, 10> parse_eps(const std::string& text) {
  std::array<double, 10> e{};
  std::stringstream ss(text);
  std::string item;
  std::size_t n = 0;
  while (std::getline(ss, item, ',')) {
    if (n == 10) throw std::invalid_argument("--eps takes exactly 10 entries");
    try {
      e[n++] = std::stod(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("--eps: '" + item + "' is not a number");
    }
  }
  if (n != 10) throw std::invalid_argument("--eps takes exactly 10 entries");
  return e;
}

void emit(const std::string& text, const std::optional<std::string>& path) {
  if (!path) {
    std::cout << text;
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + *path + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing output file '" + *path + "'");
}

std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Spectral-action potentials for doubled geometries with constant diagonal metrics.\n"
      "Metrics are given as comma-separated scale factors a0,a1,a2,a3 of\n"
      "ds^2 = sum_j a_j^2 (dx^j)^2 (not the metric components a_j^2)."};
  app.require_subcommand(1);
  app.fallthrough();

  int level = doubled::kDefaultLevel;
  std::uint64_t seed = 42;
  double tol = 1e-7;
  std::optional<std::string> output;
  std::string format;
  unsigned threads = 1;
  bool emit_config = false;

  app.add_option("--level", level, "Quadrature level n (n Gauss nodes, 2n per angle)")
      ->check(CLI::Range(4, 4096));
  app.add_option("--seed", seed, "Seed for randomized subcommands");
  app.add_option("--tol", tol, "Violation threshold for the hypothesis suite")
      ->check(CLI::NonNegativeNumber);
  app.add_option("-o,--output", output, "Write the result here instead of stdout");
  app.add_option("--format", format, "Output format (json or csv)")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--threads", threads, "Worker threads for quadrature (results do not depend on it)")
      ->envname("DOUBLED_SPECTRAL_THREADS")
      ->check(CLI::Range(1u, 1024u));
  app.add_flag("--emit-config", emit_config, "Print the resolved run configuration and exit");

  std::string g1_text = "1,1,1,1";
  std::string g2_text = "1,1,1,1";

  auto* potential = app.add_subcommand("potential", "Interaction potential V(g1,g2)");
  std::string method = "numeric";
  potential->add_option("--g1", g1_text, "First sheet a0,a1,a2,a3")->required();
  potential->add_option("--g2", g2_text, "Second sheet a0,a1,a2,a3")->required();
  potential->add_option("--method", method, "numeric | closed | both | conjecture")
      ->check(CLI::IsMember({"numeric", "closed", "both", "conjecture"}));

  auto* action = app.add_subcommand("action", "Kinetic term, potential and action density");
  double phi = 0.0, lambda = 1.0, moment_c = 1.0;
  int kappa = 1;
  action->add_option("--g1", g1_text, "First sheet a0,a1,a2,a3")->required();
  action->add_option("--g2", g2_text, "Second sheet a0,a1,a2,a3")->required();
  action->add_option("--phi", phi, "|Phi|")->check(CLI::NonNegativeNumber);
  action->add_option("--kappa", kappa, "+1 or -1")->check(CLI::IsMember({1, -1}));
  action->add_option("--lambda", lambda, "Cutoff scale Lambda")->check(CLI::PositiveNumber);
  action->add_option("--c", moment_c, "Cutoff moment c (nonzero)");

  auto* hypothesis = app.add_subcommand("hypothesis", "Randomized bimetric-form invariance checks");
  int trials = 200;
  std::string pairs = "generic";
  hypothesis->add_option("--trials", trials, "Number of random pairs")->check(CLI::PositiveNumber);
  hypothesis->add_option("--pairs", pairs, "generic | hopf")->check(CLI::IsMember({"generic", "hopf"}));

  auto* series = app.add_subcommand("series", "Near-diagonal series against quadrature");
  double omega = 1.0;
  std::string eps_text = "0,0,0,0,0,0,0,0,0,0";
  int order = 4;
  series->add_option("--omega", omega, "Overall scale Omega > 0");
  series->add_option("--eps", eps_text,
                     "Upper triangle of eps: e00,e01,e02,e03,e11,e12,e13,e22,e23,e33");
  series->add_option("--order", order, "Highest order M (2..8)");

  auto* moments = app.add_subcommand("moments", "c_m, N_2m and the trace-pattern census");
  int moment_m = 2;
  moments->add_option("--m", moment_m, "Order m (1..8)");

  auto* sweep = app.add_subcommand("sweep", "Potential over a grid of g1 values (CSV)");
  std::vector<std::string> axis_specs;
  sweep->add_option("--g1", g1_text, "Base g1 a0,a1,a2,a3 (swept entries are overwritten)");
  sweep->add_option("--g2", g2_text, "Fixed g2 a0,a1,a2,a3")->required();
  sweep->add_option("--axis", axis_specs,
                    "name:min:max:steps with name in a0..a3, or a / b (Hopf pairs of axes)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const doubled::Parallelism par{threads};
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (format.empty()) format = name == "sweep" ? "csv" : "json";

    if (emit_config) {
      Json cfg;
      cfg["subcommand"] = name;
      cfg["level"] = level;
      cfg["seed"] = seed;
      cfg["tol"] = tol;
      cfg["output_path"] = output ? Json(*output) : Json(nullptr);
      cfg["format"] = format;
      cfg["threads"] = threads;
      for (const CLI::Option* opt : sub->get_options()) {
        if (opt->get_name() == "--help" || opt->count() == 0) continue;
        const auto& res = opt->results();
        cfg["args"][opt->get_lnames().front()] = res.size() == 1 ? Json(res.front()) : Json(res);
      }
      emit(json_text(cfg), output);
      return 0;
    }

    std::string text;
    if (name == "potential") {
      const Json r = doubled::cli::cmd_potential(parse_metric(g1_text, "--g1"), parse_metric(g2_text, "--g2"),
                                                 doubled::cli::parse_method(method), level, par);
      text = format == "csv" ? doubled::cli::to_csv({r}) : json_text(r);
    } else if (name == "action") {
      const Json r = doubled::cli::cmd_action(parse_metric(g1_text, "--g1"), parse_metric(g2_text, "--g2"),
                                              phi, kappa, lambda, moment_c, level, par);
      text = format == "csv" ? doubled::cli::to_csv({r}) : json_text(r);
    } else if (name == "hypothesis") {
      const auto kind = pairs == "hopf" ? doubled::PairKind::hopf : doubled::PairKind::generic;
      Json r = doubled::cli::cmd_hypothesis(trials, seed, level, tol, kind, par);
      if (format == "csv") {
        r.erase("failures");
        text = doubled::cli::to_csv({r});
      } else {
        text = json_text(r);
      }
    } else if (name == "series") {
      const Json r = doubled::cli::cmd_series(omega, parse_eps(eps_text), order, level, par);
      text = format == "csv" ? doubled::cli::series_csv(r) : json_text(r);
    } else if (name == "moments") {
      const Json r = doubled::cli::cmd_moments(moment_m);
      if (format == "csv") {
        std::vector<Json> rows;
        for (const auto& p : r["patterns"]) {
          Json row;
          row["m"] = r["m"];
          row["c_m"] = r["c_m"];
          row["n_enumerated"] = r["n_enumerated"];
          row["n_closed_form"] = r["n_closed_form"];
          std::string pat;
          for (const auto& k : p["pattern"]) pat += (pat.empty() ? "" : " ") + k.dump();
          row["pattern"] = pat;
          row["multiplicity"] = p["multiplicity"];
          rows.push_back(row);
        }
        text = doubled::cli::to_csv(rows);
      } else {
        text = json_text(r);
      }
    } else if (name == "sweep") {
      if (format != "csv") throw std::invalid_argument("sweep only writes CSV");
      std::vector<doubled::cli::SweepAxis> axes;
      for (const auto& s : axis_specs) axes.push_back(doubled::cli::parse_axis(s));
      text = doubled::cli::cmd_sweep(parse_metric(g1_text, "--g1"), parse_metric(g2_text, "--g2"), axes,
                                     level, par);
    }
    emit(text, output);
  } catch (const std::exception& e) {
    Json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 2;
  }
  return 0;
}
