#include "bie/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bie {

Vec2 StarLikeCurve::position(double t) const {
  const double r = radius(t);
  return center() + Vec2(r * std::cos(t), r * std::sin(t));
}

Vec2 StarLikeCurve::derivative(double t) const {
  const double r = radius(t), dr = radius_d1(t);
  const double c = std::cos(t), s = std::sin(t);
  return {dr * c - r * s, dr * s + r * c};
}

Vec2 StarLikeCurve::second_derivative(double t) const {
  const double r = radius(t), dr = radius_d1(t), d2r = radius_d2(t);
  const double c = std::cos(t), s = std::sin(t);
  return {d2r * c - 2.0 * dr * s - r * c, d2r * s + 2.0 * dr * c - r * s};
}

StarCurve::StarCurve(double base, double amplitude, int frequency, Vec2 center)
    : base_(base), amplitude_(amplitude), frequency_(frequency), center_(center) {
  if (base <= std::abs(amplitude))
    throw InvalidCurveError("StarCurve: radius must stay positive");
}

double StarCurve::radius(double t) const { return base_ + amplitude_ * std::sin(frequency_ * t); }
double StarCurve::radius_d1(double t) const {
  return amplitude_ * frequency_ * std::cos(frequency_ * t);
}
double StarCurve::radius_d2(double t) const {
  return -amplitude_ * frequency_ * frequency_ * std::sin(frequency_ * t);
}

RadialBumpCurve::RadialBumpCurve(std::shared_ptr<const StarLikeCurve> base, double t0, double t1,
                                 double height)
    : base_(std::move(base)), t0_(t0), t1_(t1), height_(height) {
  if (!(t0 < t1) || t0 < 0.0 || t1 > kTwoPi)
    throw InvalidCurveError("RadialBumpCurve: support must satisfy 0 <= t0 < t1 <= 2*pi");
}

void RadialBumpCurve::bump(double t, double& b, double& db, double& d2b) const {
  b = db = d2b = 0.0;
  const double u = (t - t0_) / (t1_ - t0_);
  // exp(4 - 1/u - 1/(1-u)) underflows to an exact zero well before the
  // support edges, so the branch below is seamless.
  if (u <= 1e-3 || u >= 1.0 - 1e-3) return;
  const double g = 1.0 / u + 1.0 / (1.0 - u);
  const double dg = -1.0 / (u * u) + 1.0 / ((1.0 - u) * (1.0 - u));
  const double d2g = 2.0 / (u * u * u) + 2.0 / ((1.0 - u) * (1.0 - u) * (1.0 - u));
  const double phi = std::exp(4.0 - g);
  const double ut = 1.0 / (t1_ - t0_);
  b = height_ * phi;
  db = -height_ * dg * phi * ut;
  d2b = height_ * (dg * dg - d2g) * phi * ut * ut;
}

double RadialBumpCurve::radius(double t) const {
  double b, db, d2b;
  bump(t, b, db, d2b);
  return base_->radius(t) * (1.0 + b);
}

double RadialBumpCurve::radius_d1(double t) const {
  double b, db, d2b;
  bump(t, b, db, d2b);
  return base_->radius_d1(t) * (1.0 + b) + base_->radius(t) * db;
}

double RadialBumpCurve::radius_d2(double t) const {
  double b, db, d2b;
  bump(t, b, db, d2b);
  return base_->radius_d2(t) * (1.0 + b) + 2.0 * base_->radius_d1(t) * db +
         base_->radius(t) * d2b;
}

Discretization build_panels(std::shared_ptr<const Curve> curve, int n_panels, int p,
                            double t_begin, double t_end, bool closed) {
  if (n_panels < (closed ? 2 : 1)) throw PlanError("build_panels: too few panels");
  if (p != 8 && p != 16) throw PlanError("build_panels: nodes per panel must be 8 or 16");
  if (!(t_begin < t_end)) throw PlanError("build_panels: empty parameter interval");

  const GaussRule rule = gauss_legendre(p);
  const int n = n_panels * p;

  Discretization d;
  d.curve = curve;
  d.nodes_per_panel = p;
  d.closed = closed;
  d.panels.resize(n_panels);
  d.t.resize(n);
  d.w.resize(n);
  d.speed.resize(n);
  d.curvature.resize(n);
  d.x0.resize(n);
  d.x1.resize(n);
  d.n0.resize(n);
  d.n1.resize(n);
  d.panel_of.resize(n);

  const double dt = (t_end - t_begin) / n_panels;
  double signed_area2 = 0.0;  // shoelace integral, orientation check
  for (int ip = 0; ip < n_panels; ++ip) {
    const double a = t_begin + ip * dt, b = a + dt;
    d.panels[ip] = {a, b, curve.get()};
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int j = 0; j < p; ++j) {
      const int i = ip * p + j;
      const double t = mid + half * rule.nodes[j];
      const Vec2 x = curve->position(t);
      const Vec2 dx = curve->derivative(t);
      const Vec2 d2x = curve->second_derivative(t);
      const double sp = dx.norm();
      if (!(sp > 1e-13)) throw InvalidCurveError("build_panels: zero speed at t=" + std::to_string(t));
      d.t[i] = t;
      d.speed[i] = sp;
      d.w[i] = rule.weights[j] * half * sp;
      d.x0[i] = x[0];
      d.x1[i] = x[1];
      d.n0[i] = dx[1] / sp;
      d.n1[i] = -dx[0] / sp;
      d.curvature[i] = (dx[0] * d2x[1] - dx[1] * d2x[0]) / (sp * sp * sp);
      d.panel_of[i] = ip;
      signed_area2 += (x[0] * dx[1] - x[1] * dx[0]) * rule.weights[j] * half;
    }
  }
  if (closed && signed_area2 <= 0.0)
    throw InvalidCurveError("build_panels: curve must be parameterized counterclockwise");
  return d;
}

void PerturbationPlan::check_partition() const {
  const int n = original->n();
  if (static_cast<int>(kept.size() + cut.size()) != n)
    throw PlanError("plan partition: |kept| + |cut| != N_o");
  std::vector<char> seen(n, 0);
  for (int i : kept) {
    if (i < 0 || i >= n || seen[i]) throw PlanError("plan partition: bad kept index");
    seen[i] = 1;
  }
  for (int i : cut) {
    if (i < 0 || i >= n || seen[i]) throw PlanError("plan partition: kept/cut overlap");
    seen[i] = 1;
  }
}

namespace {

// Node-index split for a contiguous run of whole panels (wrap allowed).
void split_indices(const Discretization& disc, int first_panel, int n_cut_panels,
                   std::vector<int>& kept, std::vector<int>& cut, std::vector<int>& cut_panels) {
  const int np = disc.n_panels(), p = disc.nodes_per_panel;
  if (n_cut_panels < 1 || n_cut_panels >= np) throw PlanError("cut panel count out of range");
  if (first_panel < 0 || first_panel >= np) throw PlanError("cut panel start out of range");
  if (first_panel + n_cut_panels > np)
    throw PlanError("cut runs past the parameter seam; start the cut elsewhere");
  std::vector<char> is_cut(np, 0);
  for (int k = 0; k < n_cut_panels; ++k) {
    cut_panels.push_back(first_panel + k);
    is_cut[first_panel + k] = 1;
  }
  for (int ip = 0; ip < np; ++ip)
    for (int j = 0; j < p; ++j) (is_cut[ip] ? cut : kept).push_back(ip * p + j);
}

}  // namespace

PerturbationPlan make_refinement_plan(std::shared_ptr<const Discretization> disc,
                                      int first_panel, int n_cut_panels, int factor) {
  if (factor < 2) throw PlanError("refinement factor must be at least 2");
  PerturbationPlan plan;
  plan.original = disc;
  plan.refinement = true;
  split_indices(*disc, first_panel, n_cut_panels, plan.kept, plan.cut, plan.cut_panels);
  const double a = disc->panels[first_panel].a;
  const double b = disc->panels[first_panel + n_cut_panels - 1].b;
  plan.piece = build_panels(disc->curve, n_cut_panels * factor, disc->nodes_per_panel, a, b,
                            /*closed=*/false);
  plan.check_partition();
  return plan;
}

PerturbationPlan make_reshape_plan(std::shared_ptr<const Discretization> disc, int first_panel,
                                   int n_cut_panels, std::shared_ptr<const Curve> new_curve,
                                   int n_new_panels) {
  PerturbationPlan plan;
  plan.original = disc;
  plan.refinement = false;
  split_indices(*disc, first_panel, n_cut_panels, plan.kept, plan.cut, plan.cut_panels);
  const double a = disc->panels[first_panel].a;
  const double b = disc->panels[first_panel + n_cut_panels - 1].b;
  const double mism = std::max((new_curve->position(a) - disc->curve->position(a)).norm(),
                               (new_curve->position(b) - disc->curve->position(b)).norm());
  if (mism > 1e-12)
    throw GeometryMismatchError("reshape arc endpoints off by " + std::to_string(mism));
  plan.piece =
      build_panels(new_curve, n_new_panels, disc->nodes_per_panel, a, b, /*closed=*/false);
  plan.check_partition();
  return plan;
}

CombinedDiscretization combine(const PerturbationPlan& plan) {
  const Discretization& orig = *plan.original;
  const Discretization& piece = plan.piece;
  const int p = orig.nodes_per_panel;

  // For a reshape every panel of the perturbed boundary is re-pointed at the
  // new curve; kept node data is copied verbatim, and the new curve matches
  // the original outside the cut by the reshape contract.
  const Curve* kept_curve = plan.refinement ? orig.panels[0].curve : piece.panels[0].curve;

  struct Entry {
    double sort_key;
    const Discretization* src;
    int panel;
    int node_begin;  // within src
  };
  std::vector<Entry> entries;
  for (int ip = 0; ip < orig.n_panels(); ++ip) {
    if (std::find(plan.cut_panels.begin(), plan.cut_panels.end(), ip) != plan.cut_panels.end())
      continue;
    entries.push_back({orig.panels[ip].a, &orig, ip, ip * p});
  }
  for (int ip = 0; ip < piece.n_panels(); ++ip)
    entries.push_back({piece.panels[ip].a, &piece, ip, ip * p});
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.sort_key < b.sort_key; });

  CombinedDiscretization out;
  Discretization& d = out.disc;
  const int n = plan.n_kept() + plan.n_piece();
  d.curve = plan.refinement ? orig.curve : piece.curve;
  d.nodes_per_panel = p;
  d.closed = true;
  d.t.resize(n);
  d.w.resize(n);
  d.speed.resize(n);
  d.curvature.resize(n);
  d.x0.resize(n);
  d.x1.resize(n);
  d.n0.resize(n);
  d.n1.resize(n);
  d.panel_of.resize(n);
  out.from_kept.resize(plan.n_kept());
  out.from_piece.resize(plan.n_piece());

  // Plan-local row of each original kept node.
  std::vector<int> kept_rank(orig.n(), -1);
  for (size_t r = 0; r < plan.kept.size(); ++r) kept_rank[plan.kept[r]] = static_cast<int>(r);

  int row = 0;
  for (const Entry& e : entries) {
    const Discretization& src = *e.src;
    Panel panel = src.panels[e.panel];
    panel.curve = (&src == &orig) ? kept_curve : piece.panels[e.panel].curve;
    d.panels.push_back(panel);
    const int panel_id = static_cast<int>(d.panels.size()) - 1;
    for (int j = 0; j < p; ++j, ++row) {
      const int i = e.node_begin + j;
      d.t[row] = src.t[i];
      d.w[row] = src.w[i];
      d.speed[row] = src.speed[i];
      d.curvature[row] = src.curvature[i];
      d.x0[row] = src.x0[i];
      d.x1[row] = src.x1[i];
      d.n0[row] = src.n0[i];
      d.n1[row] = src.n1[i];
      d.panel_of[row] = panel_id;
      if (&src == &orig)
        out.from_kept[kept_rank[i]] = row;
      else
        out.from_piece[i] = row;
    }
  }
  return out;
}

}  // namespace bie
