// Command-line driver: constants, sweeps and verification suites with CSV output.

#include "fracsob/config.hpp"
#include "fracsob/csv.hpp"
#include "fracsob/errors.hpp"
#include "fracsob/experiments.hpp"
#include "fracsob/params.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

using namespace fracsob;

namespace {

struct Common {
  int dim = 1;
  double s = 0.25;
  std::string out;
  std::string config;
};

// "a..b" or "a,b,c".
std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  const auto dots = text.find("..");
  try {
    if (dots != std::string::npos) {
      const int a = std::stoi(text.substr(0, dots));
      const int b = std::stoi(text.substr(dots + 2));
      for (int l = a; l <= b; ++l) out.push_back(l);
    } else {
      std::size_t pos = 0;
      while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        out.push_back(std::stoi(text.substr(pos, comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    }
  } catch (const std::logic_error&) {
    throw InvalidInput("cannot parse level list '" + text + "'");
  }
  if (out.empty()) throw InvalidInput("empty level list");
  return out;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    out.push_back(parse_double(text.substr(pos, comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

void write_table(const CsvTable& t, const std::string& path) {
  if (path.empty()) {
    t.write(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot write " + path);
  t.write(f);
}

std::string fmt(double v) { return format_double(v); }

void report_sweep(const SweepResult& r, const std::string& out, bool solved) {
  for (const auto& [level, msg] : r.failures) std::cerr << "level " << level << " failed: " << msg << '\n';
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw InvalidInput("cannot write " + out);
    write_sweep_csv(f, r.records);
  } else {
    write_sweep_csv(std::cout, r.records);
  }
  if (r.fit_ok)
    std::cerr << "slope " << fmt(r.fit.slope) << "  r2 " << fmt(r.fit.r2) << "  points " << r.fit.points << '\n';
  if (solved && r.concentration_fit_ok)
    std::cerr << "concentration slope " << fmt(r.concentration_fit.slope) << '\n';
}

// A config file overrides flags: its entries are appended as "--key=value"
// after the command line, and every option keeps the last value it sees.
std::vector<std::string> with_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path.empty())
    for (const auto& [k, v] : load_config(path)) args.push_back("--" + k + "=" + v);
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete fractional Sobolev constant laboratory"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Common c;
  auto add_common = [&](CLI::App* sub, bool with_out) {
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    sub->add_option("--dim", c.dim, "dimension N (1 or 2)");
    sub->add_option("--s", c.s, "fractional order s");
    sub->add_option("--config", c.config, "key=value file overriding any flag");
    if (with_out) sub->add_option("--out", c.out, "CSV output file (stdout if omitted)");
  };

  auto* constant = app.add_subcommand("constant", "print S_{N,s}, the rate exponent and 2*_s");
  add_common(constant, false);

  std::string levels = "4..8";
  int far_order = 0;
  int threads = 0;
  bool no_slack = false;
  auto* sweep = app.add_subcommand("sweep", "convergence sweeps");
  sweep->require_subcommand(1);
  auto* upper = sweep->add_subcommand("upper", "deficit of the interpolated truncated bubble per level");
  auto* solve_cmd = sweep->add_subcommand("solve", "discrete constant per level");
  for (auto* sub : {upper, solve_cmd}) {
    add_common(sub, true);
    sub->add_option("--levels", levels, "a..b or comma list");
    sub->add_option("--far-order", far_order, "Gauss points per direction for separated pairs");
    sub->add_option("--threads", threads, "assembly threads (0: default)");
    sub->add_flag("--no-slack", no_slack, "skip the refined-quadrature slack estimate");
  }

  auto* verify = app.add_subcommand("verify", "lemma verification suites");
  verify->require_subcommand(1);
  double q = 2.0, conc = 0.25;
  int c_level = 10, level = 10, samples = 10000;
  std::uint64_t seed = 20240601;
  std::string c_values = "0.25,0.125,0.0625,0.03125", eps = "0.2,0.1,0.05";
  std::string interp_levels = "4..9";
  auto* interp = verify->add_subcommand("interp", "interpolation error rates in h and c");
  add_common(interp, true);
  interp->add_option("--q", q, "Lebesgue exponent");
  interp->add_option("--c", conc, "fixed concentration for the h sweep");
  interp->add_option("--levels", interp_levels, "levels of the h sweep");
  interp->add_option("--c-level", c_level, "level of the c sweep");
  interp->add_option("--c-values", c_values, "comma list of concentrations");
  auto* covering = verify->add_subcommand("covering", "direction-dictionary Hessian ratio");
  add_common(covering, true);
  covering->add_option("--samples", samples, "sample count (doubled for the stability check)");
  covering->add_option("--seed", seed, "RNG seed");
  auto* minseq = verify->add_subcommand("minseq", "quotients of the truncated bubbles as eps shrinks");
  add_common(minseq, true);
  minseq->add_option("--eps", eps, "strictly decreasing comma list");
  minseq->add_option("--level", level, "proxy mesh level");
  auto* ineq = verify->add_subcommand("inequalities", "Poincare, interpolation and cube inequalities");
  add_common(ineq, true);
  ineq->add_option("--samples", samples, "random functions (doubled for the stability check)");
  ineq->add_option("--level", level, "mesh level");
  ineq->add_option("--seed", seed, "RNG seed");

  try {
    std::vector<std::string> args = with_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*constant) {
      const ProblemParams p = ProblemParams::make(c.dim, c.s);
      std::printf("S_{N,s} = %.17g\nalpha   = %.17g\n2*_s    = %.17g\n", p.sobolev_constant, p.alpha, p.two_star);
      return 0;
    }
    if (*upper || *solve_cmd) {
      SweepOptions opts;
      opts.quad.far_order = far_order;
      opts.quad.threads = threads;
      opts.slack = !no_slack;
      const std::vector<int> lv = parse_levels(levels);
      const SweepResult r = *upper ? upper_bound_sweep(c.dim, c.s, lv, opts) : discrete_constant_sweep(c.dim, c.s, lv, opts);
      report_sweep(r, c.out, solve_cmd->parsed());
      return r.failures.empty() ? 0 : 1;
    }
    if (*interp) {
      std::vector<double> cv = parse_list(c_values);
      const InterpErrorReport r = verify_interp_error(c.dim, c.s, q, conc, parse_levels(interp_levels), c_level, cv);
      CsvTable t({"sweep", "level", "h", "c", "lq_error", "grad_error"});
      for (const auto& x : r.h_sweep) t.add_row({"h", std::to_string(x.level), fmt(x.h), fmt(x.c), fmt(x.lq_error), fmt(x.grad_error)});
      for (const auto& x : r.c_sweep) t.add_row({"c", std::to_string(x.level), fmt(x.h), fmt(x.c), fmt(x.lq_error), fmt(x.grad_error)});
      write_table(t, c.out);
      std::cerr << "h-slope L^q " << fmt(r.lq_h_fit.slope) << "  gradient " << fmt(r.grad_h_fit.slope) << "  c-slope "
                << fmt(r.lq_c_fit.slope) << " (expected " << fmt(r.expected_c_slope) << ")\n";
      return 0;
    }
    if (*covering) {
      const CoveringReport r = verify_covering(c.dim, c.s, samples, seed);
      CsvTable t({"seed", "samples", "min_ratio", "min_ratio_doubled", "relative_change", "stable", "worst_rho"});
      t.add_row({std::to_string(r.seed), std::to_string(r.samples), fmt(r.min_ratio), fmt(r.min_ratio_doubled),
                 fmt(r.relative_change), r.stable ? "1" : "0", fmt(r.worst_rho)});
      write_table(t, c.out);
      return r.stable ? 0 : 1;
    }
    if (*minseq) {
      const MinSeqReport r = verify_minimizing_sequence(c.dim, c.s, parse_list(eps), level);
      CsvTable t({"eps", "quotient", "gap", "halving_ratio"});
      for (std::size_t i = 0; i < r.records.size(); ++i)
        t.add_row({fmt(r.records[i].eps), fmt(r.records[i].quotient), fmt(r.records[i].gap),
                   i > 0 ? fmt(r.halving_ratios[i - 1]) : ""});
      write_table(t, c.out);
      return 0;
    }
    if (*ineq) {
      const InequalityReport r = verify_functional_inequalities(c.dim, c.s, level, samples, seed);
      CsvTable t({"quantity", "side", "value", "value_doubled"});
      t.add_row({"poincare_max_ratio", "", fmt(r.poincare_max_ratio), ""});
      t.add_row({"gn_constant", "", fmt(r.gn_max), fmt(r.gn_max_doubled)});
      for (std::size_t i = 0; i < r.cube_sides.size(); ++i)
        t.add_row({"cube_constant", fmt(r.cube_sides[i]), fmt(r.cube_constant[i]), fmt(r.cube_constant_doubled[i])});
      write_table(t, c.out);
      return r.poincare_max_ratio <= 1.0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
