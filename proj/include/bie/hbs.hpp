#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "bie/lowrank.hpp"
#include "bie/nystrom.hpp"

namespace bie {

/// Entry/geometry access to a square operator, enough to drive the
/// hierarchical compression: exact sub-blocks, kernel rows to arbitrary
/// proxy targets, and source fields from arbitrary proxy points.
template <class Scalar>
class MatrixSource {
 public:
  virtual ~MatrixSource() = default;
  virtual int size() const = 0;
  virtual Vec2 point(int i) const = 0;
  virtual MatrixX<Scalar> block(const std::vector<int>& rows,
                                const std::vector<int>& cols) const = 0;
  virtual MatrixX<Scalar> outgoing(const Eigen::Matrix2Xd& pts,
                                   const std::vector<int>& cols) const = 0;
  virtual MatrixX<Scalar> incoming(const std::vector<int>& rows, const Eigen::Matrix2Xd& pts,
                                   const Eigen::Matrix2Xd& normals) const = 0;
  virtual double wave_number() const { return 0.0; }
};

/// The discretized boundary integral operator as a MatrixSource.
template <class Scalar>
class NystromSource : public MatrixSource<Scalar> {
 public:
  NystromSource(const Discretization& disc, const KernelSpec& spec)
      : disc_(&disc), assembler_(spec) {}

  int size() const override { return disc_->n(); }
  Vec2 point(int i) const override { return disc_->point(i); }
  MatrixX<Scalar> block(const std::vector<int>& rows,
                        const std::vector<int>& cols) const override {
    return assembler_.assemble(Subset::of(*disc_, rows), Subset::of(*disc_, cols));
  }
  MatrixX<Scalar> outgoing(const Eigen::Matrix2Xd& pts,
                           const std::vector<int>& cols) const override {
    return assembler_.outgoing(pts, Subset::of(*disc_, cols));
  }
  MatrixX<Scalar> incoming(const std::vector<int>& rows, const Eigen::Matrix2Xd& pts,
                           const Eigen::Matrix2Xd& normals) const override {
    return assembler_.incoming(Subset::of(*disc_, rows), pts, normals);
  }
  double wave_number() const override { return assembler_.spec().omega; }
  const Assembler<Scalar>& assembler() const { return assembler_; }

 private:
  const Discretization* disc_;
  Assembler<Scalar> assembler_;
};

struct HbsOptions {
  int leaf_size = 64;
  double proxy_radius_factor = 1.75;
  double eps = 1e-10;
};

/// Hierarchically block separable compression of a square operator over a
/// binary tree of contiguous index ranges.
///
/// Per node the interpolation matrix T gives both bases at once: for the
/// node's active indices I (leaf range, or the children's stacked
/// skeletons), A(F, I) ~= A(F, skel) T and A(I, F) ~= T^t A(skel, F), with F
/// the rest of the index set.  T comes from one column ID of the stacked
/// candidate [near rows; proxy rows; near cols^t; proxy sources^t].
template <class Scalar>
struct HbsTree {
  struct Node {
    int begin = 0, end = 0;
    int child0 = -1, child1 = -1, parent = -1;
    int level = 0;
    std::vector<int> active;
    std::vector<int> skel;
    MatrixX<Scalar> interp;     // k x |active|
    MatrixX<Scalar> b01, b10;   // sibling skeleton interactions (internal + root)
    MatrixX<Scalar> diag;       // leaf diagonal block
    bool leaf() const { return child0 < 0; }
  };

  std::vector<Node> nodes;                 // 0 is the root
  std::vector<std::vector<int>> by_level;  // by_level[0] = {root}
  int n = 0;
  HbsOptions opts;
  std::vector<std::string> warnings;

  int depth() const { return static_cast<int>(by_level.size()); }

  std::size_t storage_bytes() const {
    std::size_t b = 0;
    for (const auto& nd : nodes)
      b += sizeof(Scalar) *
           (nd.interp.size() + nd.b01.size() + nd.b10.size() + nd.diag.size());
    return b;
  }

  // Forward application of the compressed operator.
  MatrixX<Scalar> apply(const MatrixX<Scalar>& x) const;
  VectorX<Scalar> apply(const VectorX<Scalar>& x) const {
    return apply(MatrixX<Scalar>(x));
  }
};

template <class Scalar>
HbsTree<Scalar> hbs_compress(const MatrixSource<Scalar>& source, const HbsOptions& opts = {});

/// Factorized inverse of an HbsTree; application is O(N k) per vector.
template <class Scalar>
struct HbsInverse {
  struct Node {
    MatrixX<Scalar> e;  // n_act x k
    MatrixX<Scalar> f;  // k x n_act
    MatrixX<Scalar> g;  // n_act x n_act
  };
  std::shared_ptr<const HbsTree<Scalar>> tree;
  std::vector<Node> nodes;
  Eigen::PartialPivLU<MatrixX<Scalar>> root_lu;
  int root_k0 = 0, root_k1 = 0;

  int size() const { return tree->n; }
  MatrixX<Scalar> apply(const MatrixX<Scalar>& b) const;
  VectorX<Scalar> apply(const VectorX<Scalar>& b) const {
    return apply(MatrixX<Scalar>(b));
  }
};

template <class Scalar>
HbsInverse<Scalar> hbs_invert(std::shared_ptr<const HbsTree<Scalar>> tree);

// ---------------------------------------------------------------------------
// implementation

namespace detail {

template <class Scalar>
void hbs_build_topology(HbsTree<Scalar>& tree) {
  using Node = typename HbsTree<Scalar>::Node;
  tree.nodes.clear();
  tree.nodes.push_back(Node{0, tree.n, -1, -1, -1, 0});
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    Node nd = tree.nodes[i];  // copy: push_back may reallocate
    if (nd.end - nd.begin > tree.opts.leaf_size) {
      const int mid = nd.begin + (nd.end - nd.begin) / 2;
      const int c0 = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(Node{nd.begin, mid, -1, -1, static_cast<int>(i), nd.level + 1});
      tree.nodes.push_back(Node{mid, nd.end, -1, -1, static_cast<int>(i), nd.level + 1});
      tree.nodes[i].child0 = c0;
      tree.nodes[i].child1 = c0 + 1;
    }
  }
  tree.by_level.clear();
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const int lv = tree.nodes[i].level;
    if (lv >= static_cast<int>(tree.by_level.size())) tree.by_level.resize(lv + 1);
    tree.by_level[lv].push_back(static_cast<int>(i));
  }
}

}  // namespace detail

template <class Scalar>
HbsTree<Scalar> hbs_compress(const MatrixSource<Scalar>& source, const HbsOptions& opts) {
  HbsTree<Scalar> tree;
  tree.n = source.size();
  tree.opts = opts;
  if (tree.n < 4) throw Error("hbs_compress: operator too small");
  detail::hbs_build_topology(tree);

  const double omega = source.wave_number();
  for (int lv = tree.depth() - 1; lv >= 1; --lv) {
    for (int ni : tree.by_level[lv]) {
      auto& nd = tree.nodes[ni];
      if (nd.leaf()) {
        nd.active.resize(nd.end - nd.begin);
        std::iota(nd.active.begin(), nd.active.end(), nd.begin);
        nd.diag = source.block(nd.active, nd.active);
      } else {
        nd.active.clear();
        const auto& s0 = tree.nodes[nd.child0].skel;
        const auto& s1 = tree.nodes[nd.child1].skel;
        nd.active.insert(nd.active.end(), s0.begin(), s0.end());
        nd.active.insert(nd.active.end(), s1.begin(), s1.end());
        nd.b01 = source.block(s0, s1);
        nd.b10 = source.block(s1, s0);
      }

      // bounding circle of the active points
      Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
      for (int i : nd.active) {
        lo = lo.cwiseMin(source.point(i));
        hi = hi.cwiseMax(source.point(i));
      }
      const Vec2 center = 0.5 * (lo + hi);
      double radius = 1e-12;
      for (int i : nd.active) radius = std::max(radius, (source.point(i) - center).norm());
      const double r_proxy = opts.proxy_radius_factor * radius;
      const int q = std::max(64, static_cast<int>(std::ceil(6.0 * omega * r_proxy)));
      const Eigen::Matrix2Xd proxy = detail::proxy_circle(center, r_proxy, q);
      Eigen::Matrix2Xd proxy_normals(2, q);
      for (int i = 0; i < q; ++i) proxy_normals.col(i) = (proxy.col(i) - center).normalized();

      std::vector<int> near;
      for (int i = 0; i < tree.n; ++i) {
        if (i >= nd.begin && i < nd.end) continue;
        if ((source.point(i) - center).norm() <= r_proxy) near.push_back(i);
      }

      const int na = static_cast<int>(nd.active.size());
      const int nn = static_cast<int>(near.size());
      MatrixX<Scalar> cand(2 * nn + 3 * q, na);
      cand.topRows(nn) = source.block(near, nd.active);
      cand.middleRows(nn, q) = source.outgoing(proxy, nd.active);
      cand.middleRows(nn + q, nn) = source.block(nd.active, near).transpose();
      cand.bottomRows(2 * q) = source.incoming(nd.active, proxy, proxy_normals).transpose();

      // the interpolation constant eats about an order of magnitude, so the
      // pivot cut runs tighter than the advertised tolerance
      auto id = detail::column_id<Scalar>(cand, 0.02 * opts.eps);
      nd.skel.clear();
      for (int j : id.skeleton) nd.skel.push_back(nd.active[j]);
      nd.interp = std::move(id.interp);
      if (static_cast<int>(nd.skel.size()) > std::max(8, na / 2) && lv < tree.depth() - 1)
        tree.warnings.push_back("rank " + std::to_string(nd.skel.size()) + " of block " +
                                std::to_string(na) + " at node " + std::to_string(ni));
    }
  }
  // root: only the sibling interaction between its children
  auto& root = tree.nodes[0];
  root.active.clear();
  const auto& s0 = tree.nodes[root.child0].skel;
  const auto& s1 = tree.nodes[root.child1].skel;
  root.b01 = source.block(s0, s1);
  root.b10 = source.block(s1, s0);
  return tree;
}

template <class Scalar>
MatrixX<Scalar> HbsTree<Scalar>::apply(const MatrixX<Scalar>& x) const {
  if (x.rows() != n) throw DimensionError("hbs apply: dimension mismatch");
  const int m = static_cast<int>(x.cols());
  std::vector<MatrixX<Scalar>> xh(nodes.size()), yh(nodes.size());
  // upward: skeleton coefficients
  for (int lv = depth() - 1; lv >= 1; --lv) {
    for (int ni : by_level[lv]) {
      const Node& nd = nodes[ni];
      if (nd.leaf()) {
        xh[ni] = nd.interp * x.middleRows(nd.begin, nd.end - nd.begin);
      } else {
        const int k0 = static_cast<int>(nodes[nd.child0].skel.size());
        const int k1 = static_cast<int>(nodes[nd.child1].skel.size());
        MatrixX<Scalar> stacked(k0 + k1, m);
        stacked.topRows(k0) = xh[nd.child0];
        stacked.bottomRows(k1) = xh[nd.child1];
        xh[ni] = nd.interp * stacked;
      }
    }
  }
  // downward: incoming skeleton data
  {
    const Node& root = nodes[0];
    yh[root.child0] = root.b01 * xh[root.child1];
    yh[root.child1] = root.b10 * xh[root.child0];
  }
  MatrixX<Scalar> out(n, m);
  for (int lv = 1; lv < depth(); ++lv) {
    for (int ni : by_level[lv]) {
      const Node& nd = nodes[ni];
      if (nd.leaf()) {
        out.middleRows(nd.begin, nd.end - nd.begin) =
            nd.diag * x.middleRows(nd.begin, nd.end - nd.begin) +
            nd.interp.transpose() * yh[ni];
      } else {
        const int k0 = static_cast<int>(nodes[nd.child0].skel.size());
        const int k1 = static_cast<int>(nodes[nd.child1].skel.size());
        MatrixX<Scalar> w = nd.interp.transpose() * yh[ni];
        yh[nd.child0] = w.topRows(k0) + nd.b01 * xh[nd.child1];
        yh[nd.child1] = w.bottomRows(k1) + nd.b10 * xh[nd.child0];
      }
    }
  }
  return out;
}

template <class Scalar>
HbsInverse<Scalar> hbs_invert(std::shared_ptr<const HbsTree<Scalar>> tree_ptr) {
  const HbsTree<Scalar>& tree = *tree_ptr;
  HbsInverse<Scalar> inv;
  inv.tree = tree_ptr;
  inv.nodes.resize(tree.nodes.size());
  std::vector<MatrixX<Scalar>> dhat(tree.nodes.size());

  for (int lv = tree.depth() - 1; lv >= 1; --lv) {
    for (int ni : tree.by_level[lv]) {
      const auto& nd = tree.nodes[ni];
      MatrixX<Scalar> dloc;
      if (nd.leaf()) {
        dloc = nd.diag;
      } else {
        const auto& d0 = dhat[nd.child0];
        const auto& d1 = dhat[nd.child1];
        const int k0 = static_cast<int>(d0.rows()), k1 = static_cast<int>(d1.rows());
        dloc.resize(k0 + k1, k0 + k1);
        dloc.topLeftCorner(k0, k0) = d0;
        dloc.topRightCorner(k0, k1) = nd.b01;
        dloc.bottomLeftCorner(k1, k0) = nd.b10;
        dloc.bottomRightCorner(k1, k1) = d1;
      }
      Eigen::PartialPivLU<MatrixX<Scalar>> lu(dloc);
      MatrixX<Scalar> dinv = lu.inverse();
      if (!dinv.allFinite())
        throw SolverSingularError("hbs_invert: singular diagonal block at node " +
                                  std::to_string(ni));
      const int k = static_cast<int>(nd.skel.size());
      const int na = static_cast<int>(dloc.rows());
      auto& out = inv.nodes[ni];
      if (k == 0) {
        dhat[ni] = MatrixX<Scalar>::Zero(0, 0);
        out.e = MatrixX<Scalar>::Zero(na, 0);
        out.f = MatrixX<Scalar>::Zero(0, na);
        out.g = std::move(dinv);
        continue;
      }
      const MatrixX<Scalar> u = nd.interp.transpose();
      MatrixX<Scalar> dinv_u = lu.solve(u);
      MatrixX<Scalar> v_dinv = nd.interp * dinv;
      MatrixX<Scalar> vdu = nd.interp * dinv_u;
      Eigen::PartialPivLU<MatrixX<Scalar>> vdu_lu(vdu);
      dhat[ni] = vdu_lu.inverse();
      if (!dhat[ni].allFinite())
        throw SolverSingularError("hbs_invert: singular skeleton system at node " +
                                  std::to_string(ni));
      out.e.noalias() = dinv_u * dhat[ni];
      out.f.noalias() = dhat[ni] * v_dinv;
      out.g = dinv - out.e * v_dinv;
    }
  }
  const auto& root = tree.nodes[0];
  const auto& d0 = dhat[root.child0];
  const auto& d1 = dhat[root.child1];
  inv.root_k0 = static_cast<int>(d0.rows());
  inv.root_k1 = static_cast<int>(d1.rows());
  if (inv.root_k0 + inv.root_k1 > 0) {
    MatrixX<Scalar> droot(inv.root_k0 + inv.root_k1, inv.root_k0 + inv.root_k1);
    droot.topLeftCorner(inv.root_k0, inv.root_k0) = d0;
    droot.topRightCorner(inv.root_k0, inv.root_k1) = root.b01;
    droot.bottomLeftCorner(inv.root_k1, inv.root_k0) = root.b10;
    droot.bottomRightCorner(inv.root_k1, inv.root_k1) = d1;
    inv.root_lu = Eigen::PartialPivLU<MatrixX<Scalar>>(droot);
    if (!inv.root_lu.inverse().allFinite())
      throw SolverSingularError("hbs_invert: singular top-level system");
  }
  return inv;
}

template <class Scalar>
MatrixX<Scalar> HbsInverse<Scalar>::apply(const MatrixX<Scalar>& b) const {
  const HbsTree<Scalar>& t = *tree;
  if (b.rows() != t.n) throw DimensionError("hbs inverse apply: dimension mismatch");
  const int m = static_cast<int>(b.cols());
  std::vector<MatrixX<Scalar>> u(t.nodes.size()), bloc(t.nodes.size()), y(t.nodes.size());

  for (int lv = t.depth() - 1; lv >= 1; --lv) {
    for (int ni : t.by_level[lv]) {
      const auto& nd = t.nodes[ni];
      if (nd.leaf()) {
        bloc[ni] = b.middleRows(nd.begin, nd.end - nd.begin);
      } else {
        const int k0 = static_cast<int>(u[nd.child0].rows());
        const int k1 = static_cast<int>(u[nd.child1].rows());
        bloc[ni].resize(k0 + k1, m);
        bloc[ni].topRows(k0) = u[nd.child0];
        bloc[ni].bottomRows(k1) = u[nd.child1];
      }
      u[ni].noalias() = nodes[ni].f * bloc[ni];
    }
  }
  {
    const auto& root = t.nodes[0];
    if (root_k0 + root_k1 > 0) {
      MatrixX<Scalar> broot(root_k0 + root_k1, m);
      broot.topRows(root_k0) = u[root.child0];
      broot.bottomRows(root_k1) = u[root.child1];
      MatrixX<Scalar> yroot = root_lu.solve(broot);
      y[root.child0] = yroot.topRows(root_k0);
      y[root.child1] = yroot.bottomRows(root_k1);
    } else {
      y[root.child0].resize(0, m);
      y[root.child1].resize(0, m);
    }
  }
  MatrixX<Scalar> out(t.n, m);
  for (int lv = 1; lv < t.depth(); ++lv) {
    for (int ni : t.by_level[lv]) {
      const auto& nd = t.nodes[ni];
      MatrixX<Scalar> xl = nodes[ni].e * y[ni] + nodes[ni].g * bloc[ni];
      if (nd.leaf()) {
        out.middleRows(nd.begin, nd.end - nd.begin) = xl;
      } else {
        const int k0 = static_cast<int>(u[nd.child0].rows());
        y[nd.child0] = xl.topRows(k0);
        y[nd.child1] = xl.bottomRows(xl.rows() - k0);
      }
    }
  }
  return out;
}

}  // namespace bie
