#include "bie/harness.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "bie/dense.hpp"
#include "bie/kernels.hpp"
#include "bie/timing.hpp"

namespace bie {

using nlohmann::json;

std::string to_string(ExperimentTag tag) {
  switch (tag) {
    case ExperimentTag::kLaplaceReshapeFixedCut: return "laplace-reshape-fixed-cut";
    case ExperimentTag::kLaplaceReshapeGrowingCut: return "laplace-reshape-growing-cut";
    case ExperimentTag::kLaplaceRefine: return "laplace-refine";
    case ExperimentTag::kHelmholtzRefine: return "helmholtz-refine";
  }
  throw ConfigError("unknown experiment tag");
}

ExperimentTag tag_from_string(const std::string& s) {
  if (s == "laplace-reshape-fixed-cut") return ExperimentTag::kLaplaceReshapeFixedCut;
  if (s == "laplace-reshape-growing-cut") return ExperimentTag::kLaplaceReshapeGrowingCut;
  if (s == "laplace-refine") return ExperimentTag::kLaplaceRefine;
  if (s == "helmholtz-refine") return ExperimentTag::kHelmholtzRefine;
  throw ConfigError("unknown experiment tag: " + s);
}

void ExperimentConfig::validate() const {
  if (!seed_set) throw ConfigError("config: seed is mandatory");
  if (sweep.empty()) throw ConfigError("config: sweep must not be empty");
  if (nodes_per_panel != 8 && nodes_per_panel != 16)
    throw ConfigError("config: nodes_per_panel must be 8 or 16");
  if (!(epsilon > 0.0)) throw ConfigError("config: epsilon must be positive");
  if (is_helmholtz() && !(omega > 0.0)) throw ConfigError("config: omega must be positive");
  const bool refine = (tag == ExperimentTag::kLaplaceRefine || is_helmholtz());
  for (size_t i = 0; i < sweep.size(); ++i) {
    const SweepPoint& p = sweep[i];
    if (p.n_panels < 2 || p.cut_panel_count < 1) throw ConfigError("config: bad sweep point");
    if (refine && p.refine_factor < 2)
      throw ConfigError("config: refinement factor must be at least 2");
    if (!refine && p.new_panel_count < 1)
      throw ConfigError("config: reshape needs a new panel count");
    if (i > 0) {
      const bool ascending = refine ? sweep[i - 1].refine_factor < p.refine_factor
                                    : sweep[i - 1].n_panels < p.n_panels;
      if (!ascending) throw ConfigError("config: sweep must be sorted ascending");
    }
  }
}

ExperimentConfig default_config(ExperimentTag tag) {
  ExperimentConfig c;
  c.tag = tag;
  c.seed = 20240612ULL;
  c.seed_set = true;
  c.output_stem = to_string(tag);
  for (auto& ch : c.output_stem)
    if (ch == '-') ch = '_';
  switch (tag) {
    case ExperimentTag::kLaplaceRefine:
    case ExperimentTag::kHelmholtzRefine:
      c.curve = {"star", 1.0, 0.3, 30};  // the sunflower
      for (int f : {2, 4, 8, 16, 32}) c.sweep.push_back({400, 60, 3, f, 0, 0.0});
      break;
    case ExperimentTag::kLaplaceReshapeFixedCut:
      c.curve = {"star", 1.0, 0.2, 5};
      for (int np : {146, 292, 584, 1168})
        c.sweep.push_back({np, np / 3, 1, 0, 56, 2.0});
      break;
    case ExperimentTag::kLaplaceReshapeGrowingCut:
      c.curve = {"star", 1.0, 0.2, 5};
      for (int s : {1, 2, 4, 8})
        c.sweep.push_back({146 * s, (146 * s) / 3, 8 * s, 0, 56, 2.0});
      break;
  }
  return c;
}

namespace {

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = to_string(c.tag);
  j["curve"] = {{"name", c.curve.name},
                {"base", c.curve.base},
                {"amplitude", c.curve.amplitude},
                {"frequency", c.curve.frequency}};
  j["nodes_per_panel"] = c.nodes_per_panel;
  j["epsilon"] = c.epsilon;
  j["seed"] = c.seed;
  j["omega"] = c.omega;
  j["timing_reps"] = c.timing_reps;
  j["n_charges"] = c.n_charges;
  j["n_test_points"] = c.n_test_points;
  j["dense_oracle_limit"] = c.dense_oracle_limit;
  j["output_stem"] = c.output_stem;
  json sw = json::array();
  for (const auto& p : c.sweep) {
    sw.push_back({{"n_panels", p.n_panels},
                  {"cut_first_panel", p.cut_first_panel},
                  {"cut_panel_count", p.cut_panel_count},
                  {"refine_factor", p.refine_factor},
                  {"new_panel_count", p.new_panel_count},
                  {"bump_height_rel", p.bump_height_rel}});
  }
  j["sweep"] = sw;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.contains("experiment")) throw ConfigError("config: missing 'experiment'");
  ExperimentConfig c = default_config(tag_from_string(j.at("experiment").get<std::string>()));
  c.seed_set = false;
  if (j.contains("curve")) {
    const auto& jc = j.at("curve");
    if (jc.contains("name")) c.curve.name = jc.at("name").get<std::string>();
    if (jc.contains("base")) c.curve.base = jc.at("base").get<double>();
    if (jc.contains("amplitude")) c.curve.amplitude = jc.at("amplitude").get<double>();
    if (jc.contains("frequency")) c.curve.frequency = jc.at("frequency").get<int>();
  }
  if (j.contains("nodes_per_panel")) c.nodes_per_panel = j.at("nodes_per_panel").get<int>();
  if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
  if (j.contains("seed")) {
    c.seed = j.at("seed").get<std::uint64_t>();
    c.seed_set = true;
  }
  if (j.contains("omega")) c.omega = j.at("omega").get<double>();
  if (j.contains("timing_reps")) c.timing_reps = j.at("timing_reps").get<int>();
  if (j.contains("n_charges")) c.n_charges = j.at("n_charges").get<int>();
  if (j.contains("n_test_points")) c.n_test_points = j.at("n_test_points").get<int>();
  if (j.contains("dense_oracle_limit"))
    c.dense_oracle_limit = j.at("dense_oracle_limit").get<int>();
  if (j.contains("output_stem")) c.output_stem = j.at("output_stem").get<std::string>();
  if (j.contains("sweep")) {
    c.sweep.clear();
    for (const auto& jp : j.at("sweep")) {
      SweepPoint p;
      p.n_panels = jp.at("n_panels").get<int>();
      p.cut_first_panel = jp.value("cut_first_panel", p.n_panels / 3);
      p.cut_panel_count = jp.value("cut_panel_count", 1);
      p.refine_factor = jp.value("refine_factor", 0);
      p.new_panel_count = jp.value("new_panel_count", 0);
      p.bump_height_rel = jp.value("bump_height_rel", 2.0);
      c.sweep.push_back(p);
    }
  }
  c.validate();
  return c;
}

std::shared_ptr<const StarLikeCurve> make_curve(const CurveConfig& c) {
  if (c.name == "circle") return std::make_shared<StarCurve>(c.base, 0.0, 0);
  if (c.name == "star") return std::make_shared<StarCurve>(c.base, c.amplitude, c.frequency);
  throw ConfigError("unknown curve: " + c.name);
}

struct PointSetup {
  std::shared_ptr<Discretization> disc;
  PerturbationPlan plan;
  CombinedDiscretization comb;
};

PointSetup build_point(const ExperimentConfig& cfg, const SweepPoint& pt) {
  PointSetup s;
  auto curve = make_curve(cfg.curve);
  s.disc = std::make_shared<Discretization>(
      build_panels(curve, pt.n_panels, cfg.nodes_per_panel));
  const bool refine = (cfg.tag == ExperimentTag::kLaplaceRefine || cfg.is_helmholtz());
  if (refine) {
    s.plan = make_refinement_plan(s.disc, pt.cut_first_panel, pt.cut_panel_count,
                                  pt.refine_factor);
  } else {
    const double a = s.disc->panels[pt.cut_first_panel].a;
    const double b = s.disc->panels[pt.cut_first_panel + pt.cut_panel_count - 1].b;
    auto bump = std::make_shared<RadialBumpCurve>(curve, a, b, pt.bump_height_rel * (b - a));
    s.plan = make_reshape_plan(s.disc, pt.cut_first_panel, pt.cut_panel_count, bump,
                               pt.new_panel_count);
  }
  s.comb = combine(s.plan);
  return s;
}

// Exterior charge locations: n points on a circle of three times the
// bounding radius, alternating unit charges.
std::vector<std::pair<Vec2, double>> charge_ring(const Discretization& disc, int n) {
  const double r = 3.0 * std::sqrt((disc.x0.square() + disc.x1.square()).maxCoeff());
  std::vector<std::pair<Vec2, double>> charges;
  for (int j = 0; j < n; ++j) {
    const double a = kTwoPi * (j + 0.21) / n;
    charges.push_back({{r * std::cos(a), r * std::sin(a)}, (j % 2 == 0) ? 1.0 : -1.0});
  }
  return charges;
}

std::vector<Vec2> interior_ring(const Discretization& disc, int n) {
  const double rmin = std::sqrt((disc.x0.square() + disc.x1.square()).minCoeff());
  // largest centered ring whose points clear the evaluator's distance rule
  for (double f = 0.35; f > 0.005; f *= 0.7) {
    std::vector<Vec2> pts;
    bool ok = true;
    for (int k = 0; k < n && ok; ++k) {
      const double a = kTwoPi * (k + 0.37) / n;
      pts.push_back({f * rmin * std::cos(a), f * rmin * std::sin(a)});
      ok = eval_distance_ok(disc, pts.back());
    }
    if (ok) return pts;
  }
  throw NearEvaluationError("no interior test ring clears the distance rule");
}

std::vector<Vec2> exterior_ring(const Discretization& disc, int n) {
  const double rmax = std::sqrt((disc.x0.square() + disc.x1.square()).maxCoeff());
  std::vector<Vec2> pts;
  for (int k = 0; k < n; ++k) {
    const double a = kTwoPi * (k + 0.37) / n;
    pts.push_back({2.5 * rmax * std::cos(a), 2.5 * rmax * std::sin(a)});
  }
  return pts;
}

template <class Scalar>
VectorX<Scalar> scatter_solution(const PointSetup& s, const VectorX<Scalar>& s_k,
                                 const VectorX<Scalar>& s_p) {
  VectorX<Scalar> sig(s.comb.disc.n());
  for (int i = 0; i < s.plan.n_kept(); ++i) sig[s.comb.from_kept[i]] = s_k[i];
  for (int j = 0; j < s.plan.n_piece(); ++j) sig[s.comb.from_piece[j]] = s_p[j];
  return sig;
}

// Analytic-field verification on the perturbed geometry via the new
// formulation: exterior charges (Laplace) or an interior source (Helmholtz).
template <class Scalar>
double analytic_field_error(const ExperimentConfig& cfg, const PointSetup& s,
                            const ExtendedSolver<Scalar>& solver, const KernelSpec& spec) {
  const Discretization& comb = s.comb.disc;
  VectorX<Scalar> g_k(s.plan.n_kept()), g_p(s.plan.n_piece());
  if constexpr (std::is_same_v<Scalar, double>) {
    const auto charges = charge_ring(comb, cfg.n_charges);
    const auto data = [&](const Vec2& x) {
      double v = 0.0;
      for (const auto& [sj, qj] : charges) v += qj * laplace_green(x, sj);
      return v;
    };
    for (int i = 0; i < s.plan.n_kept(); ++i) g_k[i] = data(s.disc->point(s.plan.kept[i]));
    for (int j = 0; j < s.plan.n_piece(); ++j) g_p[j] = data(s.plan.piece.point(j));
    const auto [s_k, s_p] = solver.solve(g_k, g_p);
    const VectorX<double> sig = scatter_solution(s, s_k, s_p);
    const std::vector<Vec2> targets = interior_ring(comb, cfg.n_test_points);
    const VectorX<double> u = eval_potential<double>(comb, sig, targets, spec);
    double err = 0.0, scale = 0.0;
    for (size_t k = 0; k < targets.size(); ++k) {
      err = std::max(err, std::abs(u[k] - data(targets[k])));
      scale = std::max(scale, std::abs(data(targets[k])));
    }
    return err / std::max(scale, 1e-300);
  } else {
    const Vec2 src(0.13, 0.07);  // inside every shipped geometry
    const auto data = [&](const Vec2& x) { return helmholtz_slp(x, src, spec.omega); };
    for (int i = 0; i < s.plan.n_kept(); ++i) g_k[i] = data(s.disc->point(s.plan.kept[i]));
    for (int j = 0; j < s.plan.n_piece(); ++j) g_p[j] = data(s.plan.piece.point(j));
    const auto [s_k, s_p] = solver.solve(g_k, g_p);
    const VectorX<Complex> sig = scatter_solution(s, s_k, s_p);
    const std::vector<Vec2> targets = exterior_ring(comb, cfg.n_test_points);
    const VectorX<Complex> u = eval_potential<Complex>(comb, sig, targets, spec);
    double err = 0.0, scale = 0.0;
    for (size_t k = 0; k < targets.size(); ++k) {
      err = std::max(err, std::abs(u[k] - data(targets[k])));
      scale = std::max(scale, std::abs(data(targets[k])));
    }
    return err / std::max(scale, 1e-300);
  }
}

template <class Scalar>
void run_point(const ExperimentConfig& cfg, const SweepPoint& pt, ResultRow& row,
               std::vector<std::string>& notes, bool& invariants_ok) {
  const KernelSpec spec =
      cfg.is_helmholtz() ? KernelSpec::helmholtz(cfg.omega) : KernelSpec::laplace();
  const PointSetup s = build_point(cfg, pt);
  s.plan.check_partition();

  row.n_o = s.plan.n_original();
  row.n_c = s.plan.n_cut();
  row.n_k = s.plan.n_kept();
  row.n_p = s.plan.n_piece();
  if (row.n_k != row.n_o - row.n_c) {
    invariants_ok = false;
    notes.push_back("N_k identity violated");
  }

  ExtendedOptions opts;
  opts.eps = cfg.epsilon;
  HbsOptions hopts;
  hopts.eps = cfg.epsilon;

  // the pre-existing solver for the original geometry
  const NystromSource<Scalar> src_o(*s.disc, spec);
  auto tree_o = std::make_shared<const HbsTree<Scalar>>(hbs_compress(src_o, hopts));
  auto inv_o = std::make_shared<const HbsInverse<Scalar>>(hbs_invert(tree_o));

  std::optional<ExtendedSolver<Scalar>> solver_new, solver_orig;
  try {
    row.t_new_p = median_time(
        [&] {
          solver_new.emplace(
              build_extended_solver<Scalar>(inv_o, s.plan, spec, Formulation::kNew, opts));
        },
        cfg.timing_reps);
  } catch (const FormulationBreakdownError& e) {
    row.breakdown = true;
    notes.push_back(std::string("new formulation breakdown: ") + e.what());
  }
  if (!cfg.is_helmholtz()) {
    try {
      row.t_orig_p = median_time(
          [&] {
            solver_orig.emplace(
                build_extended_solver<Scalar>(inv_o, s.plan, spec, Formulation::kOriginal, opts));
          },
          cfg.timing_reps);
    } catch (const FormulationBreakdownError& e) {
      row.breakdown = true;
      notes.push_back(std::string("original formulation breakdown: ") + e.what());
    }
  }

  // from-scratch comparison on the perturbed geometry
  const NystromSource<Scalar> src_n(s.comb.disc, spec);
  std::shared_ptr<const HbsInverse<Scalar>> inv_n;
  row.t_hbs_p = median_time(
      [&] {
        auto tree_n = std::make_shared<const HbsTree<Scalar>>(hbs_compress(src_n, hopts));
        inv_n = std::make_shared<const HbsInverse<Scalar>>(hbs_invert(tree_n));
      },
      cfg.timing_reps);

  // solve timings on one right-hand side
  std::mt19937_64 rng(cfg.seed + 1000003ULL * static_cast<std::uint64_t>(row.n_o) + row.n_p);
  const VectorX<Scalar> g_k = gaussian_matrix<Scalar>(row.n_k, 1, rng);
  const VectorX<Scalar> g_p = gaussian_matrix<Scalar>(row.n_p, 1, rng);
  const VectorX<Scalar> g_comb = gaussian_matrix<Scalar>(s.comb.disc.n(), 1, rng);
  if (solver_new)
    row.t_new_s = median_time([&] { auto r = solver_new->solve(g_k, g_p); (void)r; },
                              cfg.timing_reps);
  if (solver_orig)
    row.t_orig_s = median_time([&] { auto r = solver_orig->solve(g_k, g_p); (void)r; },
                               cfg.timing_reps);
  row.t_hbs_s =
      median_time([&] { auto r = inv_n->apply(g_comb); (void)r; }, cfg.timing_reps);
  if (row.t_new_p > 0.0) row.r_p = row.t_hbs_p / row.t_new_p;
  if (row.t_new_s > 0.0) row.r_s = row.t_hbs_s / row.t_new_s;

  // rank ledgers
  if (solver_new) {
    const RankLedger& ln = solver_new->ledger();
    row.k_kc = ln.k_kc;
    row.k_pk = ln.k_pk;
    row.k_kp = ln.k_kp;
    row.k_new = ln.total();
    if (row.k_new != ln.k_kc + ln.k_pk + ln.k_kp) {
      invariants_ok = false;
      notes.push_back("k_new ledger identity violated");
    }
  }
  if (solver_orig) {
    const RankLedger& lo = solver_orig->ledger();
    row.k_op = lo.k_op;
    row.k_orig = lo.total();
    if (row.k_orig != lo.k_op + lo.k_kc + lo.k_pk + lo.n_c) {
      invariants_ok = false;
      notes.push_back("k_orig ledger identity violated");
    }
    if (solver_new && lo.k_kc != solver_new->ledger().k_kc)
      notes.push_back("k_kc differs between formulations");
  }

  // solution accuracy against the analytic field
  if (solver_new) {
    try {
      row.err_analytic = analytic_field_error<Scalar>(cfg, s, *solver_new, spec);
    } catch (const NearEvaluationError& e) {
      notes.push_back(std::string("analytic verification skipped: ") + e.what());
    }
  }

  // dense-oracle equivalence at small N
  if (solver_new && row.n_o <= cfg.dense_oracle_limit) {
    const DenseSolve<Scalar> dense(s.comb.disc, spec);
    VectorX<Scalar> g(s.comb.disc.n());
    for (int i = 0; i < s.plan.n_kept(); ++i) g[s.comb.from_kept[i]] = g_k[i];
    for (int j = 0; j < s.plan.n_piece(); ++j) g[s.comb.from_piece[j]] = g_p[j];
    const VectorX<Scalar> ref = dense.solve(g);
    const auto [s_k, s_p] = solver_new->solve(g_k, g_p);
    const VectorX<Scalar> got = scatter_solution(s, s_k, s_p);
    row.err_equiv = (got - ref).norm() / ref.norm();
  }
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

void save_config(const ExperimentConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config: " + path);
  out << config_to_json(config).dump(2) << "\n";
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.config = config;
  for (const SweepPoint& pt : config.sweep) {
    ResultRow row;
    try {
      if (config.is_helmholtz())
        run_point<Complex>(config, pt, row, result.notes, result.invariants_ok);
      else
        run_point<double>(config, pt, row, result.notes, result.invariants_ok);
    } catch (const Error& e) {
      row.breakdown = true;
      result.invariants_ok = false;
      result.notes.push_back(std::string("sweep point failed: ") + e.what());
    }
    result.rows.push_back(row);
  }
  return result;
}

VerifyOutcome verify_against_analytic(const ExperimentConfig& config, const SweepPoint& point) {
  const auto run = [&](auto scalar_tag) -> VerifyOutcome {
    using Scalar = decltype(scalar_tag);
    const KernelSpec spec =
        config.is_helmholtz() ? KernelSpec::helmholtz(config.omega) : KernelSpec::laplace();
    const PointSetup s = build_point(config, point);
    HbsOptions hopts;
    hopts.eps = config.epsilon;
    ExtendedOptions opts;
    opts.eps = config.epsilon;
    const NystromSource<Scalar> src(*s.disc, spec);
    auto tree = std::make_shared<const HbsTree<Scalar>>(hbs_compress(src, hopts));
    auto inv = std::make_shared<const HbsInverse<Scalar>>(hbs_invert(tree));
    const auto solver =
        build_extended_solver<Scalar>(inv, s.plan, spec, Formulation::kNew, opts);
    VerifyOutcome out;
    out.n_points = config.n_test_points;
    out.max_rel_error = analytic_field_error<Scalar>(config, s, solver, spec);
    return out;
  };
  if (config.is_helmholtz()) return run(Complex{});
  return run(double{});
}

std::string csv_header() {
  return "N_o,N_c,N_k,N_p,k_kc,k_pk,k_kp,k_op,k_new,k_orig,T_orig_p,T_new_p,T_hbs_p,r_p,"
         "T_orig_s,T_new_s,T_hbs_s,r_s,err_analytic,err_equiv";
}

namespace {

std::string cell(double v) {
  if (v < 0.0) return "";
  std::ostringstream os;
  os.precision(6);
  os << std::scientific << v;
  return os.str();
}

std::string cell(int v) { return v < 0 ? std::string{} : std::to_string(v); }

json row_to_json(const ResultRow& r) {
  json j;
  j["N_o"] = r.n_o;
  j["N_c"] = r.n_c;
  j["N_k"] = r.n_k;
  j["N_p"] = r.n_p;
  const auto opt_int = [](int v) { return v < 0 ? json() : json(v); };
  const auto opt_dbl = [](double v) { return v < 0.0 ? json() : json(v); };
  j["k_kc"] = opt_int(r.k_kc);
  j["k_pk"] = opt_int(r.k_pk);
  j["k_kp"] = opt_int(r.k_kp);
  j["k_op"] = opt_int(r.k_op);
  j["k_new"] = opt_int(r.k_new);
  j["k_orig"] = opt_int(r.k_orig);
  j["T_orig_p"] = opt_dbl(r.t_orig_p);
  j["T_new_p"] = opt_dbl(r.t_new_p);
  j["T_hbs_p"] = opt_dbl(r.t_hbs_p);
  j["r_p"] = opt_dbl(r.r_p);
  j["T_orig_s"] = opt_dbl(r.t_orig_s);
  j["T_new_s"] = opt_dbl(r.t_new_s);
  j["T_hbs_s"] = opt_dbl(r.t_hbs_s);
  j["r_s"] = opt_dbl(r.r_s);
  j["err_analytic"] = opt_dbl(r.err_analytic);
  j["err_equiv"] = opt_dbl(r.err_equiv);
  j["breakdown"] = r.breakdown;
  return j;
}

ResultRow row_from_json(const json& j) {
  ResultRow r;
  r.n_o = j.at("N_o").get<int>();
  r.n_c = j.at("N_c").get<int>();
  r.n_k = j.at("N_k").get<int>();
  r.n_p = j.at("N_p").get<int>();
  const auto geti = [&](const char* key) {
    return j.at(key).is_null() ? -1 : j.at(key).get<int>();
  };
  const auto getd = [&](const char* key) {
    return j.at(key).is_null() ? -1.0 : j.at(key).get<double>();
  };
  r.k_kc = geti("k_kc");
  r.k_pk = geti("k_pk");
  r.k_kp = geti("k_kp");
  r.k_op = geti("k_op");
  r.k_new = geti("k_new");
  r.k_orig = geti("k_orig");
  r.t_orig_p = getd("T_orig_p");
  r.t_new_p = getd("T_new_p");
  r.t_hbs_p = getd("T_hbs_p");
  r.r_p = getd("r_p");
  r.t_orig_s = getd("T_orig_s");
  r.t_new_s = getd("T_new_s");
  r.t_hbs_s = getd("T_hbs_s");
  r.r_s = getd("r_s");
  r.err_analytic = getd("err_analytic");
  r.err_equiv = getd("err_equiv");
  r.breakdown = j.value("breakdown", false);
  return r;
}

}  // namespace

void emit_csv(const ExperimentResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << csv_header() << "\n";
  for (const ResultRow& r : result.rows) {
    out << r.n_o << ',' << r.n_c << ',' << r.n_k << ',' << r.n_p << ',' << cell(r.k_kc) << ','
        << cell(r.k_pk) << ',' << cell(r.k_kp) << ',' << cell(r.k_op) << ',' << cell(r.k_new)
        << ',' << cell(r.k_orig) << ',' << cell(r.t_orig_p) << ',' << cell(r.t_new_p) << ','
        << cell(r.t_hbs_p) << ',' << cell(r.r_p) << ',' << cell(r.t_orig_s) << ','
        << cell(r.t_new_s) << ',' << cell(r.t_hbs_s) << ',' << cell(r.r_s) << ','
        << cell(r.err_analytic) << ',' << cell(r.err_equiv) << "\n";
  }
}

void emit_json(const ExperimentResult& result, const std::string& path) {
  json j;
  j["config"] = config_to_json(result.config);
  j["invariants_ok"] = result.invariants_ok;
  j["notes"] = result.notes;
  json rows = json::array();
  for (const ResultRow& r : result.rows) rows.push_back(row_to_json(r));
  j["rows"] = rows;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << "\n";
}

ExperimentResult load_result_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  json j;
  in >> j;
  ExperimentResult result;
  result.config = config_from_json(j.at("config"));
  result.invariants_ok = j.at("invariants_ok").get<bool>();
  result.notes = j.at("notes").get<std::vector<std::string>>();
  for (const auto& jr : j.at("rows")) result.rows.push_back(row_from_json(jr));
  return result;
}

void emit_summary(const ExperimentResult& result, std::ostream& os) {
  os << "experiment: " << to_string(result.config.tag) << "\n";
  os << "seed: " << result.config.seed << "  epsilon: " << result.config.epsilon;
  if (result.config.is_helmholtz()) os << "  omega: " << result.config.omega;
  os << "\n\n";
  os << csv_header() << "\n";
  for (const ResultRow& r : result.rows) {
    os << r.n_o << ',' << r.n_c << ',' << r.n_k << ',' << r.n_p << ',' << cell(r.k_kc) << ','
       << cell(r.k_pk) << ',' << cell(r.k_kp) << ',' << cell(r.k_op) << ',' << cell(r.k_new)
       << ',' << cell(r.k_orig) << ',' << cell(r.t_orig_p) << ',' << cell(r.t_new_p) << ','
       << cell(r.t_hbs_p) << ',' << cell(r.r_p) << ',' << cell(r.t_orig_s) << ','
       << cell(r.t_new_s) << ',' << cell(r.t_hbs_s) << ',' << cell(r.r_s) << ','
       << cell(r.err_analytic) << ',' << cell(r.err_equiv) << (r.breakdown ? ",BREAKDOWN" : "")
       << "\n";
  }
  os << "\ninvariants: " << (result.invariants_ok ? "ok" : "VIOLATED") << "\n";
  for (const auto& n : result.notes) os << "note: " << n << "\n";
}

std::string emit_all(const ExperimentResult& result, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::string stem = result.config.output_stem.empty()
                               ? to_string(result.config.tag)
                               : result.config.output_stem;
  const auto base = std::filesystem::path(out_dir) / stem;
  emit_csv(result, base.string() + "_results.csv");
  emit_json(result, base.string() + "_results.json");
  std::ostringstream ss;
  emit_summary(result, ss);
  std::ofstream txt(base.string() + "_summary.txt");
  txt << ss.str();
  return ss.str();
}

}  // namespace bie
