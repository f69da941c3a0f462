#pragma once

#include <Eigen/Dense>

#include "bie/geometry.hpp"
#include "bie/types.hpp"

namespace bie {

enum class Equation {
  kLaplaceDlp,         // interior Dirichlet, double-layer representation
  kHelmholtzCombined,  // exterior Dirichlet, combined-field representation
};

struct KernelSpec {
  Equation equation = Equation::kLaplaceDlp;
  double omega = 0.0;           // wave number, radians per unit length
  Complex eta{0.0, 0.0};        // combined-field coupling, default -i*omega

  static KernelSpec laplace() { return {}; }
  static KernelSpec helmholtz(double omega) {
    if (!(omega > 0)) throw Error("helmholtz spec requires omega > 0");
    KernelSpec s;
    s.equation = Equation::kHelmholtzCombined;
    s.omega = omega;
    s.eta = Complex(0.0, -omega);
    return s;
  }

  bool is_laplace() const { return equation == Equation::kLaplaceDlp; }
  bool has_log_singularity() const { return !is_laplace(); }
  // Jump term added on the diagonal of the assembled system: -1/2 for the
  // interior Laplace equation, +1/2 for the exterior Helmholtz equation.
  double jump() const { return is_laplace() ? -0.5 : 0.5; }
};

// G(x,y) = -log|x-y| / (2*pi)
double laplace_green(const Vec2& x, const Vec2& y);
// D(x,y) = d/dn(y) G(x,y) = -(y-x).n(y) / (2*pi*|x-y|^2)
double laplace_dlp(const Vec2& x, const Vec2& y, const Vec2& ny);

// Hankel functions of the first kind, H0^(1) and H1^(1).
Complex hankel_h0(double z);
Complex hankel_h1(double z);

// S_w = (i/4) H0^(1)(w r),  D_w = -(i w/4) H1^(1)(w r) (y-x).n(y)/r
Complex helmholtz_slp(const Vec2& x, const Vec2& y, double omega);
Complex helmholtz_dlp(const Vec2& x, const Vec2& y, const Vec2& ny, double omega);
// D_w + eta S_w with eta from the spec (default -i*omega).
Complex combined_kernel(const Vec2& x, const Vec2& y, const Vec2& ny, const KernelSpec& spec);

/// Kernel split K = smooth + logcoef * log|x-y| used by the corrected panel
/// quadrature.  For Laplace the log part vanishes identically.
struct HelmholtzSplit {
  Complex smooth;
  Complex logcoef;
};
HelmholtzSplit helmholtz_combined_split(double r, double rdotn_over_r, const KernelSpec& spec);

// Diagonal (y -> x on the curve) limits of the split parts.
double laplace_dlp_diagonal_limit(double curvature);
Complex helmholtz_diag_smooth(double curvature, const KernelSpec& spec);
Complex helmholtz_diag_logcoef(const KernelSpec& spec);

/// True when the target clears every panel by five of that panel's arc
/// lengths (the distance rule eval_potential enforces).
bool eval_distance_ok(const Discretization& disc, const Vec2& target);

/// u(x) = sum_j K(x, y_j) sigma_j w_j at off-boundary targets.  Targets
/// closer to the boundary than five panel lengths are rejected; this naive
/// evaluator has no near-boundary quadrature.
template <class Scalar>
VectorX<Scalar> eval_potential(const Discretization& disc, const VectorX<Scalar>& density,
                               const std::vector<Vec2>& targets, const KernelSpec& spec);

extern template VectorX<double> eval_potential<double>(const Discretization&,
                                                       const VectorX<double>&,
                                                       const std::vector<Vec2>&,
                                                       const KernelSpec&);
extern template VectorX<Complex> eval_potential<Complex>(const Discretization&,
                                                         const VectorX<Complex>&,
                                                         const std::vector<Vec2>&,
                                                         const KernelSpec&);

}  // namespace bie
