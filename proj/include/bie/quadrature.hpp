#pragma once

#include <Eigen/Dense>

#include "bie/types.hpp"

namespace bie {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  Eigen::ArrayXd nodes;    // ascending in (-1, 1)
  Eigen::ArrayXd weights;  // sum to 2
};

// Nodes/weights via Newton iteration on P_n; accurate to machine precision.
GaussRule gauss_legendre(int n);

// P_0(x) .. P_{n-1}(x).
Eigen::ArrayXd legendre_values(int n, double x);

// Legendre functions of the second kind Q_0(x) .. Q_{n}(x).  On the cut
// (|x| < 1) these are the principal-value integrals; outside they decay and
// are computed by Miller's backward recurrence.
Eigen::ArrayXd legendre_q(int n, double x);

// Moments M_k(x) = int_{-1}^{1} P_k(t) log|x - t| dt for k = 0 .. n-1.
// Valid for any real x (inside or outside the interval).
Eigen::ArrayXd log_moments(int n, double x);

/// Product-integration weights for the log kernel on one panel.
///
/// For f known at the nodes of `rule`, sum_j lam_j f(x_j) approximates
/// int_{-1}^{1} f(t) log|s - t| dt, exactly when f is a polynomial of
/// degree < p.  `s` is the target in panel coordinates and may lie inside
/// or outside [-1, 1].
Eigen::ArrayXd log_quadrature_weights(const GaussRule& rule, double s);

}  // namespace bie
