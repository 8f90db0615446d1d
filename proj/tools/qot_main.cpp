#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "qot/experiment.hpp"

// Experiment runner: run | list | verify.
// Exit codes: 0 all assertions pass, 1 assertion failure, 2 config error,
// 3 solver non-convergence.

namespace {

int cmd_run(const std::string& config_path, const std::string& name, const std::string& out,
            long seed, bool seed_set, bool trace) {
  qot::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = qot::parse_config_file(config_path);
  if (!name.empty()) cfg.experiment = name;
  if (!out.empty()) cfg.out_dir = out;
  if (seed_set) cfg.seed = static_cast<std::uint64_t>(seed);
  if (trace) cfg.trace = true;
  if (cfg.experiment.empty()) throw qot::ConfigError("no experiment named (config or argument)");

  std::vector<qot::ResultRecord> records = qot::run_experiment(cfg);
  bool all = true;
  for (const auto& r : records) {
    std::printf("[%s] %-32s %-28s measured=%.10g bound=%.10g (%s tol=%.3g)\n",
                r.pass ? "PASS" : "FAIL", r.quantity.c_str(), r.param.c_str(), r.measured,
                r.bound, r.cmp.c_str(), r.tolerance);
    all = all && r.pass;
  }
  std::printf("%s: %s (%zu records) -> %s\n", cfg.experiment.c_str(), all ? "PASS" : "FAIL",
              records.size(), cfg.out_dir.c_str());
  return all ? 0 : 1;
}

int cmd_list() {
  for (const auto& e : qot::experiment_catalog())
    std::printf("%-20s %s\n", e.name.c_str(), e.description.c_str());
  return 0;
}

int cmd_verify(const std::string& csv_path) {
  std::vector<qot::ResultRecord> records = qot::read_records_csv(csv_path);
  qot::VerifySummary s = qot::verify_records(records);
  std::printf("verified %d records: %d failing, %d inconsistent flags\n", s.total, s.failing,
              s.inconsistent);
  return s.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum Wasserstein pseudometric toolkit"};
  app.require_subcommand(1);

  std::string config_path, name, out, csv_path;
  long seed = 0;
  bool trace = false;

  CLI::App* run = app.add_subcommand("run", "run a named experiment");
  run->add_option("experiment", name, "experiment name (see list)");
  run->add_option("--config", config_path, "config file (key=value with [sections])");
  run->add_option("--out", out, "output directory");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "64-bit seed");
  run->add_flag("--trace", trace, "stream solver residuals to CSV");

  CLI::App* list = app.add_subcommand("list", "list experiments");
  CLI::App* verify = app.add_subcommand("verify", "recompute pass/fail from a stored CSV");
  verify->add_option("--csv", csv_path, "records CSV produced by run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run)) return cmd_run(config_path, name, out, seed, seed_opt->count() > 0, trace);
    if (app.got_subcommand(list)) return cmd_list();
    if (app.got_subcommand(verify)) return cmd_verify(csv_path);
  } catch (const qot::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const qot::SolverNonConvergence& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
