#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bie/extended.hpp"

namespace bie {

enum class ExperimentTag {
  kLaplaceReshapeFixedCut,
  kLaplaceReshapeGrowingCut,
  kLaplaceRefine,
  kHelmholtzRefine,
};

std::string to_string(ExperimentTag tag);
ExperimentTag tag_from_string(const std::string& s);

struct CurveConfig {
  std::string name = "star";  // "circle" | "star"
  double base = 1.0;
  double amplitude = 0.2;
  int frequency = 5;
};

/// One sweep point, fully resolved: geometry resolution plus the
/// perturbation descriptor for the experiment family.
struct SweepPoint {
  int n_panels = 0;        // original geometry
  int cut_first_panel = 0;
  int cut_panel_count = 0;
  int refine_factor = 0;   // refinement families
  int new_panel_count = 0; // reshape families
  double bump_height_rel = 2.0;  // reshape: radial bump height over cut width
};

struct ExperimentConfig {
  ExperimentTag tag = ExperimentTag::kLaplaceRefine;
  CurveConfig curve;
  int nodes_per_panel = 16;
  double epsilon = 1e-10;
  std::uint64_t seed = 0;
  bool seed_set = false;  // mandatory in config files
  double omega = 20.0;    // helmholtz families
  int timing_reps = 5;
  int n_charges = 10;
  int n_test_points = 20;
  int dense_oracle_limit = 2048;
  std::vector<SweepPoint> sweep;
  std::string output_stem;

  bool is_helmholtz() const { return tag == ExperimentTag::kHelmholtzRefine; }
  void validate() const;
};

/// Built-in experiment definitions at desk scale.
ExperimentConfig default_config(ExperimentTag tag);

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& config, const std::string& path);

struct ResultRow {
  int n_o = 0, n_c = 0, n_k = 0, n_p = 0;
  int k_kc = -1, k_pk = -1, k_kp = -1, k_op = -1, k_new = -1, k_orig = -1;
  double t_orig_p = -1.0, t_new_p = -1.0, t_hbs_p = -1.0, r_p = -1.0;
  double t_orig_s = -1.0, t_new_s = -1.0, t_hbs_s = -1.0, r_s = -1.0;
  double err_analytic = -1.0;
  double err_equiv = -1.0;  // dense-oracle equivalence, small N only
  bool breakdown = false;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ResultRow> rows;
  std::vector<std::string> notes;
  bool invariants_ok = true;
};

/// Runs every sweep point: builds the original-geometry solver, both
/// extended solvers (the original formulation is skipped for Helmholtz, as
/// in the published tables), the from-scratch comparison, timings, rank
/// ledgers, and the analytic-solution verification.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Solution accuracy against an exact field: exterior charges for Laplace,
/// an interior point source for Helmholtz.  Returns the max relative error
/// over the test points.
struct VerifyOutcome {
  double max_rel_error = -1.0;
  int n_points = 0;
};
VerifyOutcome verify_against_analytic(const ExperimentConfig& config, const SweepPoint& point);

std::string csv_header();
void emit_csv(const ExperimentResult& result, const std::string& path);
void emit_json(const ExperimentResult& result, const std::string& path);
ExperimentResult load_result_json(const std::string& path);
void emit_summary(const ExperimentResult& result, std::ostream& os);

/// Writes <stem>_results.csv, <stem>_results.json and a plain-text summary
/// under out_dir; returns the summary text.
std::string emit_all(const ExperimentResult& result, const std::string& out_dir);

}  // namespace bie
