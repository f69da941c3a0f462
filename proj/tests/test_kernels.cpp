#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "bie/kernels.hpp"
#include "oracles.hpp"

using namespace bie;

TEST_CASE("laplace green closed-form values") {
  CHECK(laplace_green({0, 0}, {1, 0}) == doctest::Approx(0.0).epsilon(1e-15));
  // |x-y| = e^{-2 pi}  ->  G = 1
  CHECK(laplace_green({0, 0}, {std::exp(-kTwoPi), 0}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(laplace_green({0.5, 0.5}, {0.5, 0.5}), SingularityError);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 20; ++i) {
    const Vec2 x(u(rng), u(rng)), y(u(rng), u(rng));
    if ((x - y).norm() < 1e-6) continue;
    CHECK(laplace_green(x, y) == doctest::Approx(laplace_green(y, x)).epsilon(1e-15));
  }
}

TEST_CASE("laplace dlp: circle value and finite-difference consistency") {
  // x at the center of the unit circle, y on it, n(y) = y  ->  -1/(2 pi)
  const Vec2 y(std::cos(0.7), std::sin(0.7));
  CHECK(laplace_dlp({0, 0}, y, y) == doctest::Approx(-1.0 / kTwoPi).epsilon(1e-14));

  // directional derivative of G along n(y), second order in h
  const Vec2 x(0.3, -0.2), n = Vec2(1.0, 2.0).normalized();
  const double d = laplace_dlp(x, y, n);
  double err_prev = 0.0;
  for (double h : {1e-2, 5e-3}) {
    const double fd = (laplace_green(x, y + h * n) - laplace_green(x, y - h * n)) / (2 * h);
    const double err = std::abs(fd - d);
    if (err_prev != 0.0) CHECK(err < 0.3 * err_prev);  // ~ h^2
    err_prev = err;
  }
}

TEST_CASE("laplace dlp integrates to -1 inside a closed curve") {
  // Gauss identity via an adaptive quadrature oracle on the ellipse
  const EllipseCurve ell(1.3, 0.8);
  const Vec2 x(0.2, 0.1);
  const auto f = [&](double t) {
    const Vec2 y = ell.position(t), dy = ell.derivative(t);
    const double sp = dy.norm();
    const Vec2 n(dy[1] / sp, -dy[0] / sp);
    return laplace_dlp(x, y, n) * sp;
  };
  CHECK(oracles::adaptive_simpson(f, 0.0, kTwoPi, 1e-13) == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("hankel evaluations match frozen multiprecision references") {
  struct Ref {
    double z, h0re, h0im, h1re, h1im;
  };
  const Ref refs[] = {
      {1e-6, 0.99999999999975, -8.8690314816594437029, 4.999999999999375e-7,
       -636619.77237217501376},
      {0.1, 0.99750156206604003228, -1.5342386513503668441, 0.049937526036241997556,
       -6.4589510947020269877},
      {1.0, 0.76519768655796655145, 0.088256964215676957983, 0.44005058574493351596,
       -0.78121282130028871655},
      {17.5, -0.10311039822868592217, -0.16041119250501116909, -0.16341996942575490589,
       0.098572798734216046215},
      {1000.0, 0.024786686152420174561, 0.0047159179776228133998, 0.0047283119070895239176,
       -0.024784331292351778915},
  };
  for (const auto& r : refs) {
    const Complex h0 = hankel_h0(r.z), h1 = hankel_h1(r.z);
    CHECK(h0.real() == doctest::Approx(r.h0re).epsilon(1e-12));
    CHECK(h0.imag() == doctest::Approx(r.h0im).epsilon(1e-12));
    CHECK(h1.real() == doctest::Approx(r.h1re).epsilon(1e-12));
    CHECK(h1.imag() == doctest::Approx(r.h1im).epsilon(1e-12));
  }
}

TEST_CASE("bessel wronskian J1 Y0 - J0 Y1 = 2/(pi z)") {
  for (double z = 0.1; z <= 100.0; z *= 1.37) {
    const Complex h0 = hankel_h0(z), h1 = hankel_h1(z);
    const double j0 = h0.real(), y0 = h0.imag(), j1 = h1.real(), y1 = h1.imag();
    const double w = j1 * y0 - j0 * y1;
    CHECK(w == doctest::Approx(2.0 / (kPi * z)).epsilon(1e-12));
  }
}

TEST_CASE("helmholtz slp small-r behavior matches the series oracle") {
  // Re S_w = -Y0(w r)/4 carries the -log(r)/(2 pi) singularity of the
  // Laplace kernel; check against an independent power-series evaluation.
  const double omega = 3.0;
  for (double r : {1e-4, 1e-5}) {
    const Complex s = helmholtz_slp({0, 0}, {r, 0}, omega);
    CHECK(s.real() == doctest::Approx(-0.25 * oracles::y0_series(omega * r)).epsilon(1e-10));
    CHECK(s.imag() == doctest::Approx(0.25 * oracles::j0_series(omega * r)).epsilon(1e-12));
    // the log coefficient: d(Re S)/d(log r) ~ -1/(2 pi)
    const Complex s2 = helmholtz_slp({0, 0}, {2.0 * r, 0}, omega);
    CHECK((s2.real() - s.real()) / std::log(2.0) ==
          doctest::Approx(-1.0 / kTwoPi).epsilon(1e-6));
  }
}

TEST_CASE("helmholtz slp radiation decay at large distance") {
  const double omega = 2.0;
  const double r = 1000.0 / omega;
  const Complex s = helmholtz_slp({0, 0}, {r, 0}, omega);
  CHECK(std::abs(s) == doctest::Approx(1.0 / std::sqrt(8.0 * kPi * omega * r)).epsilon(0.01));
}

TEST_CASE("combined kernel is dlp + eta slp and approaches laplace as omega -> 0") {
  const Vec2 x(0.0, 0.0), y(1.3, 0.4), n = Vec2(0.5, -1.0).normalized();
  const KernelSpec spec = KernelSpec::helmholtz(2.5);
  const Complex lhs = combined_kernel(x, y, n, spec);
  const Complex rhs = helmholtz_dlp(x, y, n, 2.5) + spec.eta * helmholtz_slp(x, y, 2.5);
  CHECK(std::abs(lhs - rhs) == doctest::Approx(0.0).epsilon(1e-16));

  // omega r = 1e-4: D_w approaches the laplace dlp
  const double r = (x - y).norm();
  const double omega_small = 1e-4 / r;
  const Complex dw = helmholtz_dlp(x, y, n, omega_small);
  CHECK(std::abs(dw - laplace_dlp(x, y, n)) / std::abs(laplace_dlp(x, y, n)) < 1e-6);
}

TEST_CASE("kernels are invariant under rigid motions") {
  const Vec2 x(0.4, -0.1), y(1.1, 0.8), n = Vec2(-0.3, 1.0).normalized();
  const double c = std::cos(0.77), s = std::sin(0.77);
  Eigen::Matrix2d rot;
  rot << c, -s, s, c;
  const Vec2 shift(3.0, -2.0);
  const Vec2 xr = rot * x + shift, yr = rot * y + shift, nr = rot * n;
  CHECK(laplace_dlp(x, y, n) == doctest::Approx(laplace_dlp(xr, yr, nr)).epsilon(1e-13));
  const KernelSpec spec = KernelSpec::helmholtz(4.2);
  CHECK(std::abs(combined_kernel(x, y, n, spec) - combined_kernel(xr, yr, nr, spec)) < 1e-13);
}

TEST_CASE("helmholtz slp satisfies the helmholtz equation away from the source") {
  const double omega = 3.0;
  const Vec2 y(0.0, 0.0);
  const auto u = [&](const Vec2& x) { return helmholtz_slp(x, y, omega); };
  const Vec2 x0(0.9, 0.4);
  double prev = 0.0;
  for (double h : {1e-2, 5e-3}) {
    const Complex lap = (u({x0[0] + h, x0[1]}) + u({x0[0] - h, x0[1]}) + u({x0[0], x0[1] + h}) +
                         u({x0[0], x0[1] - h}) - 4.0 * u(x0)) /
                        (h * h);
    const double resid = std::abs(lap + omega * omega * u(x0));
    if (prev != 0.0) CHECK(resid < 0.3 * prev);  // O(h^2)
    prev = resid;
  }
}

TEST_CASE("kernel split: smooth part plus log part reconstructs the kernel") {
  const KernelSpec spec = KernelSpec::helmholtz(5.0);
  const Vec2 x(0.0, 0.0);
  for (double r : {1e-3, 0.05, 0.4}) {
    const Vec2 y(r * std::cos(0.3), r * std::sin(0.3));
    const Vec2 n = Vec2(0.8, 0.6).normalized();
    const Vec2 d = y - x;
    const auto split = helmholtz_combined_split(r, d.dot(n) / r, spec);
    const Complex recon = split.smooth + split.logcoef * std::log(r);
    const Complex direct = combined_kernel(x, y, n, spec);
    CHECK(std::abs(recon - direct) / std::abs(direct) < 1e-13);
  }
}

TEST_CASE("eval_potential: gauss identity, zero density, near-target guard") {
  auto circle = std::make_shared<StarCurve>(1.0, 0.0, 0);
  const Discretization d = build_panels(circle, 64, 16);
  const KernelSpec spec = KernelSpec::laplace();

  VectorX<double> ones = VectorX<double>::Ones(d.n());
  const std::vector<Vec2> inside = {{0.0, 0.0}, {0.2, -0.1}};
  const VectorX<double> u = eval_potential<double>(d, ones, inside, spec);
  CHECK(u[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(u[1] == doctest::Approx(-1.0).epsilon(1e-12));

  const std::vector<Vec2> outside = {{3.0, 1.0}};
  CHECK(std::abs(eval_potential<double>(d, ones, outside, spec)[0]) < 1e-12);

  VectorX<double> zero = VectorX<double>::Zero(d.n());
  CHECK(eval_potential<double>(d, zero, inside, spec).norm() == 0.0);

  const std::vector<Vec2> too_close = {{0.99, 0.0}};
  CHECK_THROWS_AS(eval_potential<double>(d, ones, too_close, spec), NearEvaluationError);
}
