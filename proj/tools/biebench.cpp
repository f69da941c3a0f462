// Experiment driver for the locally-perturbed boundary integral solver:
// runs the perturbation/refinement benchmark families and emits CSV/JSON
// tables plus a plain-text summary.

#include <CLI11.hpp>
#include <iostream>

#include "bie/harness.hpp"

namespace {

bie::ExperimentConfig resolve_config(const std::string& config_path,
                                     const std::string& experiment, std::int64_t seed) {
  bie::ExperimentConfig cfg;
  if (!config_path.empty())
    cfg = bie::load_config(config_path);
  else if (!experiment.empty())
    cfg = bie::default_config(bie::tag_from_string(experiment));
  else
    throw bie::ConfigError("pass --config FILE or --experiment TAG");
  if (seed >= 0) {
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.seed_set = true;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"biebench: fast direct solver benchmarks on locally perturbed geometries"};
  app.require_subcommand(1);

  std::string config_path, experiment, out_dir = "results", results_path;
  std::int64_t seed = -1;
  int point_index = 0;

  auto* run = app.add_subcommand("run", "run an experiment sweep and emit result tables");
  run->add_option("--config", config_path, "JSON experiment config");
  run->add_option("--experiment", experiment,
                  "built-in experiment tag (laplace-refine, helmholtz-refine, "
                  "laplace-reshape-fixed-cut, laplace-reshape-growing-cut)");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed, "override the RNG seed");

  auto* verify = app.add_subcommand("verify", "solve one sweep point and report field error");
  verify->add_option("--config", config_path, "JSON experiment config");
  verify->add_option("--experiment", experiment, "built-in experiment tag");
  verify->add_option("--point", point_index, "sweep point index");
  verify->add_option("--seed", seed, "override the RNG seed");

  auto* table = app.add_subcommand("table", "re-emit tables from a results JSON");
  table->add_option("--results", results_path, "experiment results JSON")->required();
  table->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const bie::ExperimentConfig cfg = resolve_config(config_path, experiment, seed);
      const bie::ExperimentResult result = bie::run_experiment(cfg);
      std::cout << bie::emit_all(result, out_dir);
      return result.invariants_ok ? 0 : 1;
    }
    if (verify->parsed()) {
      const bie::ExperimentConfig cfg = resolve_config(config_path, experiment, seed);
      if (point_index < 0 || point_index >= static_cast<int>(cfg.sweep.size()))
        throw bie::ConfigError("--point out of range");
      const auto outcome = bie::verify_against_analytic(cfg, cfg.sweep[point_index]);
      std::cout << "max relative field error over " << outcome.n_points
                << " test points: " << outcome.max_rel_error << "\n";
      return 0;
    }
    if (table->parsed()) {
      const bie::ExperimentResult result = bie::load_result_json(results_path);
      std::cout << bie::emit_all(result, out_dir);
      return result.invariants_ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
