#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "bie/quadrature.hpp"
#include "bie/types.hpp"

namespace bie {

/// Smooth closed curve parameterized over t in [0, 2*pi).
class Curve {
 public:
  virtual ~Curve() = default;
  virtual Vec2 position(double t) const = 0;
  virtual Vec2 derivative(double t) const = 0;
  virtual Vec2 second_derivative(double t) const = 0;
};

/// Curves of the form x(t) = c + r(t) (cos t, sin t).
class StarLikeCurve : public Curve {
 public:
  virtual double radius(double t) const = 0;
  virtual double radius_d1(double t) const = 0;
  virtual double radius_d2(double t) const = 0;
  virtual Vec2 center() const = 0;

  Vec2 position(double t) const override;
  Vec2 derivative(double t) const override;
  Vec2 second_derivative(double t) const override;
};

/// r(t) = base + amplitude * sin(frequency * t).  frequency = 0 gives a
/// circle; (1, 0.3, 30) is the sunflower.
class StarCurve : public StarLikeCurve {
 public:
  StarCurve(double base, double amplitude, int frequency, Vec2 center = Vec2::Zero());

  double radius(double t) const override;
  double radius_d1(double t) const override;
  double radius_d2(double t) const override;
  Vec2 center() const override { return center_; }

 private:
  double base_, amplitude_;
  int frequency_;
  Vec2 center_;
};

/// Axis-aligned ellipse (a cos t, b sin t); test geometry.
class EllipseCurve : public Curve {
 public:
  EllipseCurve(double a, double b) : a_(a), b_(b) {}
  Vec2 position(double t) const override { return {a_ * std::cos(t), b_ * std::sin(t)}; }
  Vec2 derivative(double t) const override { return {-a_ * std::sin(t), b_ * std::cos(t)}; }
  Vec2 second_derivative(double t) const override {
    return {-a_ * std::cos(t), -b_ * std::sin(t)};
  }

 private:
  double a_, b_;
};

/// Star-like base curve with a compactly supported radial bump on
/// [t0, t1].  Coincides with the base curve, to the last bit, outside the
/// support, so the perturbed boundary stays C-infinity smooth and the kept
/// panels of the base discretization remain valid.
class RadialBumpCurve : public StarLikeCurve {
 public:
  RadialBumpCurve(std::shared_ptr<const StarLikeCurve> base, double t0, double t1,
                  double height);

  double radius(double t) const override;
  double radius_d1(double t) const override;
  double radius_d2(double t) const override;
  Vec2 center() const override { return base_->center(); }

  double support_begin() const { return t0_; }
  double support_end() const { return t1_; }

 private:
  void bump(double t, double& b, double& db, double& d2b) const;

  std::shared_ptr<const StarLikeCurve> base_;
  double t0_, t1_, height_;
};

/// One quadrature panel: parameter interval plus the curve it lives on.
struct Panel {
  double a = 0, b = 0;
  const Curve* curve = nullptr;
};

/// Composite-Gauss panelization of a curve (or curve segment).
struct Discretization {
  std::shared_ptr<const Curve> curve;  // keeps ownership for single-curve builds
  std::vector<Panel> panels;
  int nodes_per_panel = 16;
  bool closed = false;

  // Per-node data, length n().
  Eigen::ArrayXd t, w, speed, curvature;
  Eigen::ArrayXd x0, x1;  // positions
  Eigen::ArrayXd n0, n1;  // outward unit normals
  std::vector<int> panel_of;

  int n() const { return static_cast<int>(t.size()); }
  int n_panels() const { return static_cast<int>(panels.size()); }
  Vec2 point(int i) const { return {x0[i], x1[i]}; }
  Vec2 normal(int i) const { return {n0[i], n1[i]}; }
  double perimeter() const { return w.sum(); }
};

/// Builds `n_panels` panels of `p` Gauss-Legendre nodes on uniform parameter
/// intervals of [t_begin, t_end].  `closed` marks a full closed curve (the
/// default span [0, 2*pi]); closed builds are checked for counterclockwise
/// orientation so the normals point outward.
Discretization build_panels(std::shared_ptr<const Curve> curve, int n_panels, int p = 16,
                            double t_begin = 0.0, double t_end = kTwoPi, bool closed = true);

/// Kept/cut split of an original discretization plus the replacement piece.
struct PerturbationPlan {
  std::shared_ptr<const Discretization> original;
  std::vector<int> kept;        // node indices into *original, ascending
  std::vector<int> cut;         // node indices into *original, ascending
  std::vector<int> cut_panels;  // panel ids, contiguous along the curve
  Discretization piece;         // discretization of the new boundary piece
  bool refinement = false;

  int n_original() const { return original->n(); }
  int n_kept() const { return static_cast<int>(kept.size()); }
  int n_cut() const { return static_cast<int>(cut.size()); }
  int n_piece() const { return piece.n(); }

  // Exact set algebra on the kept/cut partition; throws PlanError on
  // violation.
  void check_partition() const;
};

/// Replaces `n_cut_panels` panels starting at `first_panel` by `factor`
/// times as many panels on the identical parameter interval.
PerturbationPlan make_refinement_plan(std::shared_ptr<const Discretization> disc,
                                      int first_panel, int n_cut_panels, int factor);

/// Replaces the cut panels by a new arc discretized with `n_new_panels`
/// panels.  `new_curve` is the perturbed closed curve; it must coincide with
/// the original at the cut endpoints (checked to 1e-12) and, by contract,
/// everywhere outside the cut interval.
PerturbationPlan make_reshape_plan(std::shared_ptr<const Discretization> disc, int first_panel,
                                   int n_cut_panels, std::shared_ptr<const Curve> new_curve,
                                   int n_new_panels);

/// Discretization of the perturbed boundary: kept panels plus the new piece,
/// ordered by parameter.  `from_kept[i]`/`from_piece[j]` map plan-local
/// indices to rows of the combined discretization.
struct CombinedDiscretization {
  Discretization disc;
  std::vector<int> from_kept;
  std::vector<int> from_piece;
};
CombinedDiscretization combine(const PerturbationPlan& plan);

}  // namespace bie
