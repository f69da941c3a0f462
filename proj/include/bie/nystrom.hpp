#pragma once

#include <Eigen/Dense>
#include <numeric>
#include <vector>

#include "bie/kernels.hpp"

namespace bie {

/// A subset of a discretization's nodes, identified by node indices.
struct Subset {
  const Discretization* disc = nullptr;
  std::vector<int> idx;

  static Subset all(const Discretization& d) {
    Subset s;
    s.disc = &d;
    s.idx.resize(d.n());
    std::iota(s.idx.begin(), s.idx.end(), 0);
    return s;
  }
  static Subset of(const Discretization& d, std::vector<int> indices) {
    return Subset{&d, std::move(indices)};
  }
  int size() const { return static_cast<int>(idx.size()); }
};

// Continuous diagonal limit of the Laplace double-layer kernel at node i.
inline double laplace_dlp_diagonal(const Discretization& disc, int i) {
  return laplace_dlp_diagonal_limit(disc.curvature[i]);
}

// Largest |shat| (target in source-panel coordinates) at which the native
// Gauss rule still resolves the log kernel to ~1e-12; closer targets route
// through the corrected product-integration rule.
inline double corrected_shat_limit(int p) {
  const double rho = std::pow(10.0, 12.0 / (2.0 * p));
  return 0.5 * (rho + 1.0 / rho);
}

/// Dense Nystrom blocks of the discretized boundary integral operator.
///
/// Entry (i,j) is K(x_i, y_j, n_j) w_j for well-separated pairs.  When the
/// kernel carries a log singularity (Helmholtz) and target i lies on the
/// same curve within reach of source panel P(j), the entry instead carries
/// the kernel-split corrected weight: the smooth part keeps the native
/// Gauss weight and the log part is integrated by panelwise product
/// integration against a Legendre interpolant.  The jump term is added
/// whenever target and source are the same node of the same discretization,
/// so slicing a full system matrix and assembling sub-blocks directly agree
/// entry for entry.
template <class Scalar>
class Assembler {
 public:
  explicit Assembler(const KernelSpec& spec) : spec_(spec) {
    if (spec.is_laplace() != std::is_same_v<Scalar, double>)
      throw Error("Assembler: scalar type does not match equation");
  }

  const KernelSpec& spec() const { return spec_; }

  MatrixX<Scalar> assemble(const Subset& trg, const Subset& src) const;

  // Kernel rows at arbitrary off-curve target points (sources keep their
  // quadrature weights); used for proxy compression.
  MatrixX<Scalar> outgoing(const Eigen::Matrix2Xd& pts, const Subset& src) const;

  // Single- and double-layer sources at arbitrary points, evaluated at the
  // target nodes (no weights); spans incoming fields for proxy compression.
  MatrixX<Scalar> incoming(const Subset& trg, const Eigen::Matrix2Xd& pts,
                           const Eigen::Matrix2Xd& pt_normals) const;

 private:
  KernelSpec spec_;
};

template <class Scalar>
MatrixX<Scalar> assemble_system(const Assembler<Scalar>& assembler, const Discretization& disc) {
  const Subset s = Subset::all(disc);
  return assembler.assemble(s, s);
}

// ---------------------------------------------------------------------------
// implementation

namespace detail {

struct GatheredNodes {
  Eigen::ArrayXd x0, x1, n0, n1, w, speed, t;
  std::vector<int> panel;  // panel id per gathered column
  std::vector<int> global;

  static GatheredNodes from(const Subset& s) {
    const Discretization& d = *s.disc;
    const int n = s.size();
    GatheredNodes g;
    g.x0.resize(n);
    g.x1.resize(n);
    g.n0.resize(n);
    g.n1.resize(n);
    g.w.resize(n);
    g.speed.resize(n);
    g.t.resize(n);
    g.panel.resize(n);
    g.global.resize(n);
    for (int j = 0; j < n; ++j) {
      const int gj = s.idx[j];
      g.x0[j] = d.x0[gj];
      g.x1[j] = d.x1[gj];
      g.n0[j] = d.n0[gj];
      g.n1[j] = d.n1[gj];
      g.w[j] = d.w[gj];
      g.speed[j] = d.speed[gj];
      g.t[j] = d.t[gj];
      g.panel[j] = d.panel_of[gj];
      g.global[j] = gj;
    }
    return g;
  }
};

inline double wrapped_shat(double s, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  const double sw = s - kTwoPi * std::round((s - mid) / kTwoPi);
  return (sw - mid) / half;
}

}  // namespace detail

template <>
inline MatrixX<double> Assembler<double>::assemble(const Subset& trg, const Subset& src) const {
  const auto g = detail::GatheredNodes::from(src);
  const int m = trg.size(), n = src.size();
  const Discretization& td = *trg.disc;
  MatrixX<double> out(m, n);
  const bool same_disc = (trg.disc == src.disc);
  Eigen::ArrayXd dx(n), dy(n), r2(n);
  for (int i = 0; i < m; ++i) {
    const int gi = trg.idx[i];
    dx = g.x0 - td.x0[gi];
    dy = g.x1 - td.x1[gi];
    r2 = dx.square() + dy.square();
    out.row(i) = (-(dx * g.n0 + dy * g.n1) / (kTwoPi * r2) * g.w).matrix();
    if (same_disc) {
      for (int j = 0; j < n; ++j) {
        if (g.global[j] == gi)
          out(i, j) = laplace_dlp_diagonal(td, gi) * g.w[j] + spec_.jump();
      }
    }
  }
  return out;
}

template <>
inline MatrixX<Complex> Assembler<Complex>::assemble(const Subset& trg, const Subset& src) const {
  const auto g = detail::GatheredNodes::from(src);
  const int m = trg.size(), n = src.size();
  const Discretization& td = *trg.disc;
  const Discretization& sd = *src.disc;
  const bool same_disc = (trg.disc == src.disc);
  const int p = sd.nodes_per_panel;
  const GaussRule rule = gauss_legendre(p);
  const double shat_max = corrected_shat_limit(p);
  MatrixX<Complex> out(m, n);

  for (int i = 0; i < m; ++i) {
    const int gi = trg.idx[i];
    const Vec2 xi = td.point(gi);
    const double si = td.t[gi];
    const Curve* ci = td.panels[td.panel_of[gi]].curve;
    int j = 0;
    while (j < n) {
      // one source panel group at a time
      const int panel_id = g.panel[j];
      int j_end = j;
      while (j_end < n && g.panel[j_end] == panel_id) ++j_end;
      const Panel& panel = sd.panels[panel_id];
      const double half = 0.5 * (panel.b - panel.a);
      const double shat = detail::wrapped_shat(si, panel.a, panel.b);
      const bool corrected = (panel.curve == ci) && std::abs(shat) <= shat_max;
      if (!corrected) {
        for (int k = j; k < j_end; ++k) {
          const Vec2 y(g.x0[k], g.x1[k]), ny(g.n0[k], g.n1[k]);
          out(i, k) = combined_kernel(xi, y, ny, spec_) * g.w[k];
        }
      } else {
        const Eigen::ArrayXd lam = log_quadrature_weights(rule, shat);
        for (int k = j; k < j_end; ++k) {
          const int gk = g.global[k];
          const int node_in_panel = gk - panel_id * p;
          if (same_disc && gk == gi) {
            const Complex ks = helmholtz_diag_smooth(td.curvature[gi], spec_);
            const Complex kl = helmholtz_diag_logcoef(spec_);
            const double hspeed = half * g.speed[k];
            out(i, k) = ks * g.w[k] +
                        kl * (std::log(hspeed) * g.w[k] + hspeed * lam[node_in_panel]) +
                        spec_.jump();
          } else {
            const Vec2 y(g.x0[k], g.x1[k]), ny(g.n0[k], g.n1[k]);
            const Vec2 d = y - xi;
            const double r = d.norm();
            const auto split = helmholtz_combined_split(r, d.dot(ny) / r, spec_);
            const Complex full = split.smooth + split.logcoef * std::log(r);
            out(i, k) = full * g.w[k] +
                        split.logcoef * (half * g.speed[k] * lam[node_in_panel] -
                                         g.w[k] * std::log(std::abs(shat - rule.nodes[node_in_panel])));
          }
        }
      }
      j = j_end;
    }
  }
  return out;
}

template <>
inline MatrixX<double> Assembler<double>::outgoing(const Eigen::Matrix2Xd& pts,
                                                   const Subset& src) const {
  const auto g = detail::GatheredNodes::from(src);
  const int q = static_cast<int>(pts.cols()), n = src.size();
  MatrixX<double> out(q, n);
  Eigen::ArrayXd dx(n), dy(n), r2(n);
  for (int i = 0; i < q; ++i) {
    dx = g.x0 - pts(0, i);
    dy = g.x1 - pts(1, i);
    r2 = dx.square() + dy.square();
    out.row(i) = (-(dx * g.n0 + dy * g.n1) / (kTwoPi * r2) * g.w).matrix();
  }
  return out;
}

template <>
inline MatrixX<Complex> Assembler<Complex>::outgoing(const Eigen::Matrix2Xd& pts,
                                                     const Subset& src) const {
  const auto g = detail::GatheredNodes::from(src);
  const int q = static_cast<int>(pts.cols()), n = src.size();
  MatrixX<Complex> out(q, n);
  for (int i = 0; i < q; ++i) {
    const Vec2 xi = pts.col(i);
    for (int j = 0; j < n; ++j) {
      const Vec2 y(g.x0[j], g.x1[j]), ny(g.n0[j], g.n1[j]);
      out(i, j) = combined_kernel(xi, y, ny, spec_) * g.w[j];
    }
  }
  return out;
}

template <>
inline MatrixX<double> Assembler<double>::incoming(const Subset& trg, const Eigen::Matrix2Xd& pts,
                                                   const Eigen::Matrix2Xd& pt_normals) const {
  const int m = trg.size(), q = static_cast<int>(pts.cols());
  const Discretization& d = *trg.disc;
  MatrixX<double> out(m, 2 * q);
  for (int i = 0; i < m; ++i) {
    const Vec2 xi = d.point(trg.idx[i]);
    for (int k = 0; k < q; ++k) {
      out(i, k) = laplace_green(xi, pts.col(k));
      out(i, q + k) = laplace_dlp(xi, pts.col(k), pt_normals.col(k));
    }
  }
  return out;
}

template <>
inline MatrixX<Complex> Assembler<Complex>::incoming(const Subset& trg,
                                                     const Eigen::Matrix2Xd& pts,
                                                     const Eigen::Matrix2Xd& pt_normals) const {
  const int m = trg.size(), q = static_cast<int>(pts.cols());
  const Discretization& d = *trg.disc;
  MatrixX<Complex> out(m, 2 * q);
  for (int i = 0; i < m; ++i) {
    const Vec2 xi = d.point(trg.idx[i]);
    for (int k = 0; k < q; ++k) {
      out(i, k) = helmholtz_slp(xi, pts.col(k), spec_.omega);
      out(i, q + k) = helmholtz_dlp(xi, pts.col(k), pt_normals.col(k), spec_.omega);
    }
  }
  return out;
}

}  // namespace bie
