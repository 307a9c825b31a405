// lhs: simulate, sweep, check and verify the frustrated Lohe hermitian
// sphere model from flat key = value config files.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <variant>

#include <CLI11.hpp>

#include "lhs/config.hpp"
#include "lhs/experiment.hpp"
#include "lhs/guarantees.hpp"
#include "lhs/verify.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_violation = 1;
constexpr int exit_config = 2;
constexpr int exit_runtime = 3;

constexpr const char* version_string = "lhs 0.1.0";

lhs::RunConfig require_run(const lhs::AnyConfig& any, const std::string& cmd) {
  if (const auto* r = std::get_if<lhs::RunConfig>(&any)) return *r;
  throw lhs::ConfigError(cmd + ": expected a single-run config (kappa0), got a sweep (kappa0_values)",
                         "kappa0_values");
}

void print(const lhs::SummaryLines& lines) {
  for (const auto& [k, v] : lines) std::cout << k << '=' << v << '\n';
}

int cmd_simulate(const std::string& path, bool strict) {
  const lhs::RunConfig c = require_run(lhs::parse_config(path), "simulate");
  const lhs::RunResult r = lhs::run_single(c, false);
  lhs::write_run(r);
  for (const auto& rep : r.reports)
    std::cout << lhs::to_string(rep.theorem) << ": " << lhs::to_string(rep.outcome) << " ("
              << rep.verdict_details << ")\n";
  std::cout << "tail_sup_J_M=" << r.tail << "\nwrote " << c.output_dir << "/" << lhs::timeseries_name(c)
            << " and " << c.output_dir << "/summary.txt\n";
  return strict && lhs::any_failed(r.reports) ? exit_violation : exit_ok;
}

int cmd_sweep(const std::string& path) {
  const lhs::AnyConfig any = lhs::parse_config(path);
  const auto* s = std::get_if<lhs::SweepConfig>(&any);
  if (!s) throw lhs::ConfigError("sweep: config has no kappa0_values", "kappa0_values");
  const lhs::SweepReport rep = lhs::run_sweep(*s);
  lhs::write_sweep(rep);
  std::cout << "decreasing in kappa0: " << rep.decreasing_pass << "/" << rep.replicates << " replicates\n";
  for (const auto& o : rep.ordering)
    std::cout << "kappa0=" << o.kappa0 << ": sqrt(k) B(k) < B(1) in " << o.lower_pass << "/" << o.total
              << ", B(1) < k B(k) in " << o.upper_pass << "/" << o.total << "\n";
  for (const auto& t : rep.tail_bounds)
    std::cout << "kappa0=" << t.kappa0 << ": tail <= 1.25 J- in " << t.pass << "/" << t.applicable
              << " applicable runs\n";
  if (rep.slope) std::cout << "log B vs log kappa0 slope: " << *rep.slope << "\n";
  std::cout << "wrote " << s->base.output_dir << "/summary.txt\n";
  return exit_ok;
}

int cmd_check(const std::string& path) {
  const lhs::AnyConfig any = lhs::parse_config(path);
  lhs::SummaryLines lines;
  auto one = [&](const lhs::RunConfig& c, const std::string& prefix) {
    const lhs::ModelParams p = lhs::build_params(c);
    const double thr = lhs::initial_threshold(c, p);
    const lhs::EnsembleState init = lhs::gen_initial(c, thr);
    lines.emplace_back(prefix + "initial_threshold", std::to_string(thr));
    lines.emplace_back(prefix + "omega_diameter", std::to_string(lhs::omega_diameter(p)));
    lhs::append_reports(lines, prefix, lhs::assess_hypotheses(p, init));
  };
  if (const auto* r = std::get_if<lhs::RunConfig>(&any)) {
    one(*r, "");
  } else {
    const auto& s = std::get<lhs::SweepConfig>(any);
    for (double k : s.kappa0_values) {
      lhs::RunConfig c = s.base;
      c.kappa0 = k;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", k);
      one(c, std::string("kappa0.") + buf + ".");
    }
  }
  print(lines);
  return exit_ok;
}

int cmd_verify(const std::string& suite) {
  bool ok = true;
  for (const auto& c : lhs::run_suite(suite)) {
    std::printf("%s  [%s] %s: %.3e (limit %.1e)\n", c.passed() ? "PASS" : "FAIL", c.suite.c_str(),
                c.name.c_str(), c.value, c.limit);
    ok = ok && c.passed();
  }
  return ok ? exit_ok : exit_violation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frustrated Lohe hermitian sphere toolkit"};
  app.require_subcommand(1);

  std::string config;
  bool strict = false;
  auto* simulate = app.add_subcommand("simulate", "integrate one configuration and write CSV + summary");
  simulate->add_option("--config", config, "config file")->required();
  simulate->add_flag("--strict", strict, "exit 1 if any guaranteed envelope is violated");

  auto* sweep = app.add_subcommand("sweep", "kappa0 sweep with shared draws");
  sweep->add_option("--config", config, "config file")->required();

  auto* check = app.add_subcommand("check", "thresholds, rates and roots only, no integration");
  check->add_option("--config", config, "config file")->required();

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "built-in invariant suites");
  verify->add_option("--suite", suite, "conservation|splitting|reduction|meanfield|all")
      ->check(CLI::IsMember({"conservation", "splitting", "reduction", "meanfield", "all"}));

  app.add_subcommand("version", "print version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (*simulate) return cmd_simulate(config, strict);
    if (*sweep) return cmd_sweep(config);
    if (*check) return cmd_check(config);
    if (*verify) return cmd_verify(suite);
    std::cout << version_string << "\n";
    return exit_ok;
  } catch (const lhs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_runtime;
  }
}
