#include <doctest.h>

#include <memory>

#include "bie/dense.hpp"
#include "bie/hbs.hpp"
#include "oracles.hpp"

using namespace bie;

namespace {

// Synthetic sources on a line of points; zero far-field candidates.
template <class Scalar>
class DiagonalSource : public MatrixSource<Scalar> {
 public:
  explicit DiagonalSource(int n) : n_(n) {}
  int size() const override { return n_; }
  Vec2 point(int i) const override { return {static_cast<double>(i) / n_, 0.0}; }
  MatrixX<Scalar> block(const std::vector<int>& rows,
                        const std::vector<int>& cols) const override {
    MatrixX<Scalar> b = MatrixX<Scalar>::Zero(rows.size(), cols.size());
    for (size_t i = 0; i < rows.size(); ++i)
      for (size_t j = 0; j < cols.size(); ++j)
        if (rows[i] == cols[j]) b(i, j) = Scalar(2.0 + rows[i] % 5);
    return b;
  }
  MatrixX<Scalar> outgoing(const Eigen::Matrix2Xd& pts,
                           const std::vector<int>& cols) const override {
    return MatrixX<Scalar>::Zero(pts.cols(), cols.size());
  }
  MatrixX<Scalar> incoming(const std::vector<int>& rows, const Eigen::Matrix2Xd& pts,
                           const Eigen::Matrix2Xd&) const override {
    return MatrixX<Scalar>::Zero(rows.size(), 2 * pts.cols());
  }

 private:
  int n_;
};

struct CircleFixture {
  std::shared_ptr<const StarCurve> curve;
  Discretization disc;
  explicit CircleFixture(int panels)
      : curve(std::make_shared<StarCurve>(1.0, 0.0, 0)),
        disc(build_panels(curve, panels, 16)) {}
};

}  // namespace

TEST_CASE("hbs compression of the circle laplace system matches dense apply") {
  const CircleFixture fx(64);  // N = 1024
  const KernelSpec spec = KernelSpec::laplace();
  const NystromSource<double> src(fx.disc, spec);
  const HbsTree<double> tree = hbs_compress(src, HbsOptions{});

  // structural invariants
  for (const auto& nd : tree.nodes) {
    if (!nd.leaf()) {
      CHECK(tree.nodes[nd.child0].begin == nd.begin);
      CHECK(tree.nodes[nd.child0].end == tree.nodes[nd.child1].begin);
      CHECK(tree.nodes[nd.child1].end == nd.end);
    }
    CHECK(static_cast<int>(nd.skel.size()) <= static_cast<int>(nd.active.size()));
  }

  const Assembler<double> assembler(spec);
  const MatrixX<double> a = assemble_system(assembler, fx.disc);
  std::mt19937_64 rng(21);
  const MatrixX<double> x = gaussian_matrix<double>(fx.disc.n(), 3, rng);
  const MatrixX<double> err = tree.apply(x) - a * x;
  const double anorm = oracles::spectral_norm<double>(a);
  CHECK(err.norm() < 1e-9 * anorm * x.norm());
}

TEST_CASE("hbs inverse solves the circle system to dense-LU accuracy") {
  const CircleFixture fx(64);
  const KernelSpec spec = KernelSpec::laplace();
  const NystromSource<double> src(fx.disc, spec);
  auto tree = std::make_shared<const HbsTree<double>>(hbs_compress(src, HbsOptions{}));
  const HbsInverse<double> inv = hbs_invert(tree);

  const DenseSolve<double> dense(fx.disc, spec);
  std::mt19937_64 rng(22);
  const VectorX<double> g = gaussian_matrix<double>(fx.disc.n(), 1, rng);
  const VectorX<double> x_hbs = inv.apply(g);
  const VectorX<double> x_lu = dense.solve(g);
  CHECK((x_hbs - x_lu).norm() < 1e-8 * x_lu.norm());

  // round trip through the dense operator
  const VectorX<double> rt = inv.apply(VectorX<double>(dense.matrix * x_lu));
  CHECK((rt - x_lu).norm() < 10.0 * 1e-10 * dense.condition_estimate() * x_lu.norm());
}

TEST_CASE("hbs apply is linear and sends zero to zero") {
  const CircleFixture fx(16);
  const NystromSource<double> src(fx.disc, KernelSpec::laplace());
  const HbsTree<double> tree = hbs_compress(src, HbsOptions{});
  const int n = fx.disc.n();
  CHECK(tree.apply(VectorX<double>(VectorX<double>::Zero(n))).norm() == 0.0);
  std::mt19937_64 rng(23);
  const VectorX<double> x = gaussian_matrix<double>(n, 1, rng);
  const VectorX<double> y = gaussian_matrix<double>(n, 1, rng);
  const VectorX<double> lhs = tree.apply(VectorX<double>(2.0 * x - 3.0 * y));
  const VectorX<double> rhs = 2.0 * tree.apply(x) - 3.0 * tree.apply(y);
  CHECK((lhs - rhs).norm() < 1e-13 * rhs.norm());
}

TEST_CASE("identity operator inverts to the identity") {
  struct IdentitySource : DiagonalSource<double> {
    using DiagonalSource::DiagonalSource;
    MatrixX<double> block(const std::vector<int>& rows,
                          const std::vector<int>& cols) const override {
      MatrixX<double> b = MatrixX<double>::Zero(rows.size(), cols.size());
      for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j)
          if (rows[i] == cols[j]) b(i, j) = 1.0;
      return b;
    }
  };
  IdentitySource src(300);
  auto tree = std::make_shared<const HbsTree<double>>(hbs_compress(src, HbsOptions{}));
  const HbsInverse<double> inv = hbs_invert(tree);
  std::mt19937_64 rng(24);
  const VectorX<double> g = gaussian_matrix<double>(300, 1, rng);
  CHECK((inv.apply(g) - g).norm() < 1e-14 * g.norm());
}

TEST_CASE("an operator with zero off-diagonal interaction has empty skeletons") {
  DiagonalSource<double> src(256);
  const HbsTree<double> tree = hbs_compress(src, HbsOptions{});
  for (const auto& nd : tree.nodes)
    if (nd.parent >= 0) CHECK(nd.skel.empty());
  // and the inverse is the diagonal inverse
  auto tp = std::make_shared<const HbsTree<double>>(tree);
  const HbsInverse<double> inv = hbs_invert(tp);
  VectorX<double> g = VectorX<double>::Ones(256);
  const VectorX<double> x = inv.apply(g);
  for (int i = 0; i < 256; ++i) CHECK(x[i] == doctest::Approx(1.0 / (2.0 + i % 5)).epsilon(1e-14));
}

TEST_CASE("helmholtz hbs on the star curve: apply and inverse residuals") {
  auto star = std::make_shared<StarCurve>(1.0, 0.3, 5);
  const Discretization disc = build_panels(star, 48, 16);  // N = 768
  const KernelSpec spec = KernelSpec::helmholtz(6.0);
  const NystromSource<Complex> src(disc, spec);
  auto tree = std::make_shared<const HbsTree<Complex>>(hbs_compress(src, HbsOptions{}));
  const HbsInverse<Complex> inv = hbs_invert(tree);

  const Assembler<Complex> assembler(spec);
  const MatrixX<Complex> a = assemble_system(assembler, disc);
  std::mt19937_64 rng(25);
  const VectorX<Complex> x = gaussian_matrix<Complex>(disc.n(), 1, rng);
  const double anorm = oracles::spectral_norm<Complex>(a);
  CHECK((tree->apply(x) - a * x).norm() < 10.0 * 1e-10 * anorm * x.norm());
  CHECK((inv.apply(VectorX<Complex>(a * x)) - x).norm() < 1e-7 * x.norm());
}

TEST_CASE("batched inverse apply equals column-by-column") {
  const CircleFixture fx(32);
  const NystromSource<double> src(fx.disc, KernelSpec::laplace());
  auto tree = std::make_shared<const HbsTree<double>>(hbs_compress(src, HbsOptions{}));
  const HbsInverse<double> inv = hbs_invert(tree);
  std::mt19937_64 rng(26);
  const MatrixX<double> b = gaussian_matrix<double>(fx.disc.n(), 4, rng);
  const MatrixX<double> batched = inv.apply(b);
  for (int j = 0; j < 4; ++j) {
    const VectorX<double> single = inv.apply(VectorX<double>(b.col(j)));
    CHECK((batched.col(j) - single).norm() < 1e-14 * single.norm());
  }
}

TEST_CASE("skeleton storage grows roughly linearly with N") {
  std::vector<std::size_t> bytes;
  for (int panels : {64, 128}) {
    const CircleFixture fx(panels);
    const NystromSource<double> src(fx.disc, KernelSpec::laplace());
    const HbsTree<double> tree = hbs_compress(src, HbsOptions{});
    bytes.push_back(tree.storage_bytes());
  }
  CHECK(static_cast<double>(bytes[1]) / bytes[0] <= 2.4);
}
