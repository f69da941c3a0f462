#include "bie/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace bie {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
void legendre_pair(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = p0;
    dp = 0.0;
    return;
  }
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

GaussRule gauss_legendre(int n) {
  if (n < 1) throw Error("gauss_legendre: order must be positive");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, then Newton.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double p, dp;
    for (int it = 0; it < 100; ++it) {
      legendre_pair(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    legendre_pair(n, x, p, dp);
    rule.nodes[n - 1 - i] = x;  // ascending order
    rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

Eigen::ArrayXd legendre_values(int n, double x) {
  Eigen::ArrayXd p(n);
  if (n > 0) p[0] = 1.0;
  if (n > 1) p[1] = x;
  for (int k = 1; k + 1 < n; ++k) p[k + 1] = ((2 * k + 1) * x * p[k] - k * p[k - 1]) / (k + 1);
  return p;
}

namespace {

Eigen::ArrayXd legendre_q_forward(int n, double x) {
  // Stable on the cut; |x| must not equal 1.
  Eigen::ArrayXd q(n + 1);
  q[0] = 0.5 * std::log(std::abs((1.0 + x) / (1.0 - x)));
  if (n >= 1) q[1] = x * q[0] - 1.0;
  for (int k = 1; k < n; ++k) q[k + 1] = ((2 * k + 1) * x * q[k] - k * q[k - 1]) / (k + 1);
  return q;
}

Eigen::ArrayXd legendre_q_miller(int n, double x) {
  // Backward recurrence for |x| > 1 where Q decays and forward is unstable.
  const double ax = std::abs(x);
  const double rho = ax + std::sqrt(ax * ax - 1.0);
  const int extra = static_cast<int>(std::ceil(40.0 / std::log(rho))) + 12;
  const int top = n + extra;
  Eigen::ArrayXd q = Eigen::ArrayXd::Zero(n + 1);
  double qp = 0.0, qc = 1.0;
  for (int m = top; m >= 1; --m) {
    const double qm = ((2 * m + 1) * ax * qc - (m + 1) * qp) / m;
    qp = qc;
    qc = qm;
    if (m - 1 <= n) q[m - 1] = qc;
    if (std::abs(qc) > 1e250) {
      qp *= 1e-250;
      qc *= 1e-250;
      q *= 1e-250;
    }
  }
  const double q0 = 0.5 * std::log((ax + 1.0) / (ax - 1.0));
  q *= q0 / q[0];
  if (x < 0)  // parity: Q_k(-x) = (-1)^{k+1} Q_k(x)
    for (int k = 0; k <= n; k += 2) q[k] = -q[k];
  return q;
}

// Direct quadrature fallback for targets just outside [-1, 1], where neither
// recurrence direction is comfortable.  Panels refine geometrically toward
// the endpoint nearest the singularity.
Eigen::ArrayXd log_moments_dyadic(int n, double x) {
  static const GaussRule rule = gauss_legendre(16);
  Eigen::ArrayXd m = Eigen::ArrayXd::Zero(n);
  const double e = (x >= 0) ? 1.0 : -1.0;
  auto add_panel = [&](double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int j = 0; j < rule.nodes.size(); ++j) {
      const double t = c + h * rule.nodes[j];
      m += legendre_values(n, t) * (rule.weights[j] * h * std::log(std::abs(x - t)));
    }
  };
  double w = 2.0;
  double prev = -e;
  while (w > 1e-16) {
    const double next = e - e * (w * 0.5);
    add_panel(std::min(prev, next), std::max(prev, next));
    prev = next;
    w *= 0.5;
  }
  add_panel(std::min(prev, e), std::max(prev, e));
  return m;
}

// P_k(node_j) for k = 0..p-1, cached per rule size.
const Eigen::MatrixXd& legendre_node_matrix(const GaussRule& rule) {
  static std::mutex mu;
  static std::map<int, Eigen::MatrixXd> cache;
  const int p = static_cast<int>(rule.nodes.size());
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(p);
  if (it == cache.end()) {
    Eigen::MatrixXd mat(p, p);
    for (int j = 0; j < p; ++j) mat.col(j) = legendre_values(p, rule.nodes[j]).matrix();
    it = cache.emplace(p, std::move(mat)).first;
  }
  return it->second;
}

}  // namespace

Eigen::ArrayXd legendre_q(int n, double x) {
  if (std::abs(x) < 1.0) return legendre_q_forward(n, x);
  return legendre_q_miller(n, x);
}

Eigen::ArrayXd log_moments(int n, double x) {
  const double ax = std::abs(x);
  if (ax >= 1.0 && ax < 1.005) return log_moments_dyadic(n, x);
  Eigen::ArrayXd m(n);
  const double u = 1.0 - x, v = 1.0 + x;
  m[0] = (u == 0.0 ? 0.0 : u * std::log(std::abs(u))) +
         (v == 0.0 ? 0.0 : v * std::log(std::abs(v))) - 2.0;
  if (n == 1) return m;
  const Eigen::ArrayXd q = legendre_q(n, x);
  for (int k = 1; k < n; ++k) m[k] = 2.0 * (q[k + 1] - q[k - 1]) / (2 * k + 1);
  return m;
}

Eigen::ArrayXd log_quadrature_weights(const GaussRule& rule, double s) {
  const int p = static_cast<int>(rule.nodes.size());
  Eigen::ArrayXd c = log_moments(p, s);
  for (int k = 0; k < p; ++k) c[k] *= (2 * k + 1) * 0.5;
  const Eigen::MatrixXd& pmat = legendre_node_matrix(rule);
  return rule.weights * (pmat.transpose() * c.matrix()).array();
}

}  // namespace bie
