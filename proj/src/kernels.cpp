#include "bie/kernels.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include <cmath>
#include <mutex>

namespace bie {

namespace {

void disable_gsl_abort() {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
}

double bessel(int (*f)(double, gsl_sf_result*), double z, const char* name) {
  disable_gsl_abort();
  gsl_sf_result res;
  if (f(z, &res) != GSL_SUCCESS)
    throw SpecialFunctionError(std::string("bessel ") + name + " failed at z=" + std::to_string(z));
  return res.val;
}

struct Bessel01 {
  double j0, y0, j1, y1;
};

Bessel01 bessel01(double z) {
  return {bessel(gsl_sf_bessel_J0_e, z, "J0"), bessel(gsl_sf_bessel_Y0_e, z, "Y0"),
          bessel(gsl_sf_bessel_J1_e, z, "J1"), bessel(gsl_sf_bessel_Y1_e, z, "Y1")};
}

}  // namespace

double laplace_green(const Vec2& x, const Vec2& y) {
  const double r = (x - y).norm();
  if (r == 0.0) throw SingularityError("laplace_green: coincident points");
  return -std::log(r) / kTwoPi;
}

double laplace_dlp(const Vec2& x, const Vec2& y, const Vec2& ny) {
  const Vec2 d = y - x;
  const double r2 = d.squaredNorm();
  if (r2 == 0.0) throw SingularityError("laplace_dlp: coincident points");
  return -d.dot(ny) / (kTwoPi * r2);
}

Complex hankel_h0(double z) {
  if (z <= 0.0) throw SingularityError("hankel_h0: argument must be positive");
  return {bessel(gsl_sf_bessel_J0_e, z, "J0"), bessel(gsl_sf_bessel_Y0_e, z, "Y0")};
}

Complex hankel_h1(double z) {
  if (z <= 0.0) throw SingularityError("hankel_h1: argument must be positive");
  return {bessel(gsl_sf_bessel_J1_e, z, "J1"), bessel(gsl_sf_bessel_Y1_e, z, "Y1")};
}

Complex helmholtz_slp(const Vec2& x, const Vec2& y, double omega) {
  const double r = (x - y).norm();
  if (r == 0.0) throw SingularityError("helmholtz_slp: coincident points");
  return Complex(0.0, 0.25) * hankel_h0(omega * r);
}

Complex helmholtz_dlp(const Vec2& x, const Vec2& y, const Vec2& ny, double omega) {
  const Vec2 d = y - x;
  const double r = d.norm();
  if (r == 0.0) throw SingularityError("helmholtz_dlp: coincident points");
  return Complex(0.0, -0.25 * omega) * hankel_h1(omega * r) * (d.dot(ny) / r);
}

Complex combined_kernel(const Vec2& x, const Vec2& y, const Vec2& ny, const KernelSpec& spec) {
  return helmholtz_dlp(x, y, ny, spec.omega) + spec.eta * helmholtz_slp(x, y, spec.omega);
}

HelmholtzSplit helmholtz_combined_split(double r, double rdotn_over_r, const KernelSpec& spec) {
  // S = -J0(wr)/(2 pi) log r + S_smooth
  // D = (w/(2 pi)) J1(wr) (d.n/r) log r + D_smooth
  const double omega = spec.omega;
  const double z = omega * r;
  const Bessel01 b = bessel01(z);
  const double logr = std::log(r);
  const Complex slp = Complex(0.0, 0.25) * Complex(b.j0, b.y0);
  const Complex dlp = Complex(0.0, -0.25 * omega) * Complex(b.j1, b.y1) * rdotn_over_r;
  const double slp_log = -b.j0 / kTwoPi;
  const double dlp_log = omega / kTwoPi * b.j1 * rdotn_over_r;
  HelmholtzSplit out;
  out.logcoef = Complex(dlp_log, 0.0) + spec.eta * slp_log;
  out.smooth = (dlp + spec.eta * slp) - out.logcoef * logr;
  return out;
}

double laplace_dlp_diagonal_limit(double curvature) { return -curvature / (4.0 * kPi); }

Complex helmholtz_diag_smooth(double curvature, const KernelSpec& spec) {
  // D_smooth -> -kappa/(4 pi);  S_smooth -> i/4 - (gamma + log(w/2))/(2 pi)
  const Complex s_diag =
      Complex(0.0, 0.25) - (kEulerGamma + std::log(0.5 * spec.omega)) / kTwoPi;
  return Complex(laplace_dlp_diagonal_limit(curvature), 0.0) + spec.eta * s_diag;
}

Complex helmholtz_diag_logcoef(const KernelSpec& spec) {
  return spec.eta * (-1.0 / kTwoPi);  // D part vanishes on the diagonal
}

bool eval_distance_ok(const Discretization& disc, const Vec2& target) {
  std::vector<double> panel_len(disc.n_panels(), 0.0), panel_dist(disc.n_panels(), 1e300);
  for (int j = 0; j < disc.n(); ++j) {
    panel_len[disc.panel_of[j]] += disc.w[j];
    const double dj = std::hypot(disc.x0[j] - target[0], disc.x1[j] - target[1]);
    panel_dist[disc.panel_of[j]] = std::min(panel_dist[disc.panel_of[j]], dj);
  }
  for (int ip = 0; ip < disc.n_panels(); ++ip)
    if (panel_dist[ip] < 5.0 * panel_len[ip]) return false;
  return true;
}

template <class Scalar>
VectorX<Scalar> eval_potential(const Discretization& disc, const VectorX<Scalar>& density,
                               const std::vector<Vec2>& targets, const KernelSpec& spec) {
  if (density.size() != disc.n()) throw DimensionError("eval_potential: density size mismatch");
  if (spec.is_laplace() != std::is_same_v<Scalar, double>)
    throw Error("eval_potential: scalar type does not match equation");
  VectorX<Scalar> out(targets.size());
  for (size_t k = 0; k < targets.size(); ++k) {
    const Vec2 xt = targets[k];
    if (!eval_distance_ok(disc, xt))
      throw NearEvaluationError("eval_potential: target within five panel lengths of boundary");
    Scalar acc{};
    for (int j = 0; j < disc.n(); ++j) {
      const Vec2 y = disc.point(j), ny = disc.normal(j);
      if constexpr (std::is_same_v<Scalar, double>)
        acc += laplace_dlp(xt, y, ny) * density[j] * disc.w[j];
      else
        acc += combined_kernel(xt, y, ny, spec) * density[j] * disc.w[j];
    }
    out[k] = acc;
  }
  return out;
}

template VectorX<double> eval_potential<double>(const Discretization&, const VectorX<double>&,
                                                const std::vector<Vec2>&, const KernelSpec&);
template VectorX<Complex> eval_potential<Complex>(const Discretization&, const VectorX<Complex>&,
                                                  const std::vector<Vec2>&, const KernelSpec&);

}  // namespace bie
