#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <random>

#include "bie/nystrom.hpp"

namespace bie {

/// Rank bookkeeping for a factored update matrix.  k_op and n_c only
/// participate in the original formulation.
struct RankLedger {
  int k_kc = 0;
  int k_pk = 0;
  int k_kp = 0;
  int k_op = -1;
  int n_c = -1;

  bool original_formulation() const { return n_c >= 0; }
  int total() const {
    return original_formulation() ? k_op + k_kc + k_pk + n_c : k_kc + k_pk + k_kp;
  }
};

template <class Scalar>
struct LowRankFactor {
  MatrixX<Scalar> left;   // m x k
  MatrixX<Scalar> right;  // k x n
  double epsilon = 0.0;
  bool warn_dense = false;

  int rank() const { return static_cast<int>(left.cols()); }
};

// ---------------------------------------------------------------------------
// generic randomized factorization (matrix-action oracles)

template <class Scalar>
using MatrixAction = std::function<MatrixX<Scalar>(const MatrixX<Scalar>&)>;

template <class Scalar>
MatrixX<Scalar> gaussian_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  MatrixX<Scalar> m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      if constexpr (std::is_same_v<Scalar, double>)
        m(i, j) = dist(rng);
      else
        m(i, j) = Complex(dist(rng), dist(rng));
    }
  return m;
}

// Spectral norm estimate by power iteration on A^H A.
template <class Scalar>
double spectral_norm_estimate(const MatrixAction<Scalar>& apply,
                              const MatrixAction<Scalar>& apply_adjoint, int n, int iters,
                              std::mt19937_64& rng) {
  MatrixX<Scalar> v = gaussian_matrix<Scalar>(n, 1, rng);
  double norm = v.norm();
  if (norm == 0.0) return 0.0;
  v /= norm;
  double sigma = 0.0;
  for (int it = 0; it < iters; ++it) {
    MatrixX<Scalar> av = apply(v);
    sigma = av.norm();
    if (sigma == 0.0) return 0.0;
    v = apply_adjoint(av);
    const double vn = v.norm();
    if (vn == 0.0) return sigma;
    v /= vn;
  }
  return sigma;
}

/// Adaptive randomized range finder + SVD truncation.  Rank is the smallest
/// k whose estimated residual falls below eps * ||A||; deterministic under a
/// fixed seed.  Sets warn_dense when the rank exceeds min(m,n)/2.
template <class Scalar>
LowRankFactor<Scalar> id_factor(const MatrixAction<Scalar>& apply,
                                const MatrixAction<Scalar>& apply_adjoint, int m, int n,
                                double eps, std::uint64_t seed = 20211ULL);

// ---------------------------------------------------------------------------
// geometry-aware factorization of kernel blocks

enum class CompressSide { kColumns, kRows };

/// Proxy-accelerated interpolative factorization of the Nystrom block
/// A(trg, src), followed by an SVD recompression that trims the rank to the
/// eps-numerical rank.  `side` names the geometrically local set: columns
/// for blocks like A_kc / A_kp / A_op (local sources), rows for A_pk (local
/// targets).  Cost is O((m + n) k^2), never O(m n).
template <class Scalar>
LowRankFactor<Scalar> factor_kernel_block(const Assembler<Scalar>& assembler, const Subset& trg,
                                          const Subset& src, double eps, CompressSide side);

// ---------------------------------------------------------------------------
// structured update factors

/// Block-structured L * R for an update matrix on the extended index space
/// (original nodes first, then piece nodes).  Keeping the blocks separate
/// preserves the per-block rank ledger and avoids materializing the wide
/// right factor of the original formulation.
template <class Scalar>
struct UpdateFactor {
  struct BlockPair {
    std::vector<int> rows;  // extended row indices for left's rows
    std::vector<int> cols;  // extended col indices for right's cols
    MatrixX<Scalar> left;
    MatrixX<Scalar> right;
    bool right_is_identity = false;  // B_cc carries an implicit identity
    int rank() const { return static_cast<int>(left.cols()); }
  };

  std::vector<BlockPair> blocks;
  int n_ext = 0;
  RankLedger ledger;
  double epsilon = 0.0;
  bool warn_dense = false;

  int rank() const {
    int k = 0;
    for (const auto& b : blocks) k += b.rank();
    return k;
  }

  // Columns of L scattered into the extended index space.
  MatrixX<Scalar> dense_left() const {
    MatrixX<Scalar> L = MatrixX<Scalar>::Zero(n_ext, rank());
    int c = 0;
    for (const auto& b : blocks) {
      for (int r = 0; r < static_cast<int>(b.rows.size()); ++r)
        L.block(b.rows[r], c, 1, b.rank()) = b.left.row(r);
      c += b.rank();
    }
    return L;
  }

  MatrixX<Scalar> dense_right() const {
    MatrixX<Scalar> R = MatrixX<Scalar>::Zero(rank(), n_ext);
    int c = 0;
    for (const auto& b : blocks) {
      for (int j = 0; j < static_cast<int>(b.cols.size()); ++j) {
        if (b.right_is_identity)
          R(c + j, b.cols[j]) = Scalar(1);
        else
          R.block(c, b.cols[j], b.rank(), 1) = b.right.col(j);
      }
      c += b.rank();
    }
    return R;
  }

  // R * X for X on the extended index space.
  MatrixX<Scalar> apply_right(const MatrixX<Scalar>& x) const {
    MatrixX<Scalar> out(rank(), x.cols());
    int c = 0;
    for (const auto& b : blocks) {
      MatrixX<Scalar> xg(b.cols.size(), x.cols());
      for (size_t j = 0; j < b.cols.size(); ++j) xg.row(j) = x.row(b.cols[j]);
      if (b.right_is_identity)
        out.middleRows(c, b.rank()) = xg;
      else
        out.middleRows(c, b.rank()).noalias() = b.right * xg;
      c += b.rank();
    }
    return out;
  }
};

template <class Scalar>
UpdateFactor<Scalar> make_update_new(LowRankFactor<Scalar> kc, LowRankFactor<Scalar> kp,
                                     LowRankFactor<Scalar> pk, const PerturbationPlan& plan);

template <class Scalar>
UpdateFactor<Scalar> make_update_orig(LowRankFactor<Scalar> kc, LowRankFactor<Scalar> op,
                                      MatrixX<Scalar> b_cc, LowRankFactor<Scalar> pk,
                                      const PerturbationPlan& plan);

/// Factors the blocks the new formulation needs (A_kc, A_kp, A_pk) and
/// assembles the structured update; the c-rows of the left factor are zero.
template <class Scalar>
UpdateFactor<Scalar> factor_update_new(const Assembler<Scalar>& assembler,
                                       const PerturbationPlan& plan, double eps);

/// Original formulation: additionally factors A_op (which contains A_cp)
/// and carries B_cc (A_cc with zero diagonal) at full rank N_c.
template <class Scalar>
UpdateFactor<Scalar> factor_update_orig(const Assembler<Scalar>& assembler,
                                        const PerturbationPlan& plan, double eps);

// ---------------------------------------------------------------------------
// implementation

namespace detail {

template <class Scalar>
struct ColumnId {
  std::vector<int> skeleton;
  MatrixX<Scalar> interp;  // k x n, identity on skeleton columns
};

// Column interpolative decomposition via column-pivoted QR:
// M ~= M(:, skeleton) * interp with relative tolerance `tol`.
template <class Scalar>
ColumnId<Scalar> column_id(const MatrixX<Scalar>& m, double tol) {
  ColumnId<Scalar> out;
  const int n = static_cast<int>(m.cols());
  if (m.rows() == 0 || n == 0 || m.norm() == 0.0) {
    out.interp = MatrixX<Scalar>::Zero(0, n);
    return out;
  }
  Eigen::ColPivHouseholderQR<MatrixX<Scalar>> qr(m);
  const auto& qrmat = qr.matrixQR();
  const int kmax = static_cast<int>(std::min(m.rows(), m.cols()));
  const double d0 = std::abs(qrmat(0, 0));
  int k = kmax;
  for (int i = 1; i < kmax; ++i) {
    if (std::abs(qrmat(i, i)) <= tol * d0) {
      k = i;
      break;
    }
  }
  const auto perm = qr.colsPermutation().indices();
  out.skeleton.resize(k);
  for (int i = 0; i < k; ++i) out.skeleton[i] = perm(i);
  MatrixX<Scalar> r11 = qrmat.topLeftCorner(k, k).template triangularView<Eigen::Upper>();
  MatrixX<Scalar> t12 = r11.template triangularView<Eigen::Upper>().solve(
      qrmat.topRightCorner(k, n - k));
  out.interp = MatrixX<Scalar>::Zero(k, n);
  for (int i = 0; i < k; ++i) out.interp(i, perm(i)) = Scalar(1);
  for (int j = 0; j < n - k; ++j) out.interp.col(perm(k + j)) = t12.col(j);
  return out;
}

// SVD recompression of a factored pair: L*R with L tall.  Truncates at
// eps * sigma_max.
template <class Scalar>
LowRankFactor<Scalar> recompress(const MatrixX<Scalar>& left, const MatrixX<Scalar>& right,
                                 double eps) {
  LowRankFactor<Scalar> out;
  out.epsilon = eps;
  const int kin = static_cast<int>(left.cols());
  if (kin == 0) {
    out.left = MatrixX<Scalar>::Zero(left.rows(), 0);
    out.right = MatrixX<Scalar>::Zero(0, right.cols());
    return out;
  }
  Eigen::HouseholderQR<MatrixX<Scalar>> qr(left);
  MatrixX<Scalar> rl = qr.matrixQR().topRows(kin).template triangularView<Eigen::Upper>();
  MatrixX<Scalar> core = rl * right;
  Eigen::BDCSVD<MatrixX<Scalar>> svd(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  int k = 0;
  while (k < sv.size() && sv[k] > eps * sv[0]) ++k;
  MatrixX<Scalar> thin_q = qr.householderQ() * MatrixX<Scalar>::Identity(left.rows(), kin);
  out.left = thin_q * svd.matrixU().leftCols(k) * sv.head(k).asDiagonal();
  out.right = svd.matrixV().leftCols(k).adjoint();
  return out;
}

inline Eigen::Matrix2Xd proxy_circle(const Vec2& center, double radius, int count) {
  Eigen::Matrix2Xd pts(2, count);
  for (int i = 0; i < count; ++i) {
    const double a = kTwoPi * i / count;
    pts.col(i) = center + radius * Vec2(std::cos(a), std::sin(a));
  }
  return pts;
}

struct BoundingCircle {
  Vec2 center;
  double radius;
};

template <class Sub>
BoundingCircle bounding_circle(const Sub& s) {
  const Discretization& d = *s.disc;
  Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
  for (int i : s.idx) {
    lo = lo.cwiseMin(d.point(i));
    hi = hi.cwiseMax(d.point(i));
  }
  const Vec2 c = 0.5 * (lo + hi);
  double r = 1e-12;
  for (int i : s.idx) r = std::max(r, (d.point(i) - c).norm());
  return {c, r};
}

}  // namespace detail

template <class Scalar>
LowRankFactor<Scalar> id_factor(const MatrixAction<Scalar>& apply,
                                const MatrixAction<Scalar>& apply_adjoint, int m, int n,
                                double eps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);

  {  // adjoint consistency: <A u, v> must equal <u, A^H v>
    const MatrixX<Scalar> u = gaussian_matrix<Scalar>(n, 1, rng);
    const MatrixX<Scalar> v = gaussian_matrix<Scalar>(m, 1, rng);
    const Scalar a = (v.adjoint() * apply(u))(0, 0);
    const Scalar b = (apply_adjoint(v).adjoint() * u)(0, 0);
    const double scale = std::abs(a) + std::abs(b) + 1e-300;
    if (std::abs(a - b) > 1e-12 * std::max(1.0, scale))
      throw Error("id_factor: apply/apply_adjoint are inconsistent");
  }

  const double anorm =
      spectral_norm_estimate<Scalar>(apply, apply_adjoint, n, 10, rng);
  LowRankFactor<Scalar> out;
  out.epsilon = eps;
  if (anorm == 0.0) {
    out.left = MatrixX<Scalar>::Zero(m, 0);
    out.right = MatrixX<Scalar>::Zero(0, n);
    return out;
  }

  const int kcap = std::min(m, n);
  int block = std::min(kcap, 32);
  MatrixX<Scalar> q(m, 0);
  while (true) {
    MatrixX<Scalar> y = apply(gaussian_matrix<Scalar>(n, block, rng));
    if (q.cols() > 0) y -= q * (q.adjoint() * y);
    Eigen::HouseholderQR<MatrixX<Scalar>> qr(y);
    MatrixX<Scalar> qy = qr.householderQ() * MatrixX<Scalar>::Identity(m, y.cols());
    MatrixX<Scalar> qnew(m, q.cols() + qy.cols());
    qnew << q, qy;
    q = std::move(qnew);
    if (q.cols() >= kcap) break;
    // residual estimate: power iteration on (I - QQ^H) A
    const MatrixAction<Scalar> rapply = [&](const MatrixX<Scalar>& x) {
      MatrixX<Scalar> ax = apply(x);
      ax -= q * (q.adjoint() * ax);
      return ax;
    };
    const MatrixAction<Scalar> rapply_adj = [&](const MatrixX<Scalar>& x) {
      return apply_adjoint(MatrixX<Scalar>(x - q * (q.adjoint() * x)));
    };
    const double rnorm = spectral_norm_estimate<Scalar>(rapply, rapply_adj, n, 10, rng);
    if (rnorm <= eps * anorm) break;
    block = std::min(2 * block, kcap - static_cast<int>(q.cols()));
  }

  // B = Q^H A, then SVD truncation at eps * ||A||.
  MatrixX<Scalar> b = apply_adjoint(q).adjoint();
  Eigen::BDCSVD<MatrixX<Scalar>> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  int k = 0;
  while (k < sv.size() && sv[k] > eps * anorm) ++k;
  out.left = q * svd.matrixU().leftCols(k) * sv.head(k).asDiagonal();
  out.right = svd.matrixV().leftCols(k).adjoint();
  out.warn_dense = (k > std::min(m, n) / 2);
  return out;
}

template <class Scalar>
LowRankFactor<Scalar> factor_kernel_block(const Assembler<Scalar>& assembler, const Subset& trg,
                                          const Subset& src, double eps, CompressSide side) {
  const bool cols = (side == CompressSide::kColumns);
  const Subset& local = cols ? src : trg;
  const Subset& other = cols ? trg : src;
  const auto circle = detail::bounding_circle(local);
  const double r_proxy = 1.75 * circle.radius;
  const double omega = assembler.spec().omega;
  const int q = std::max(64, static_cast<int>(std::ceil(6.0 * omega * r_proxy)));
  const Eigen::Matrix2Xd proxy = detail::proxy_circle(circle.center, r_proxy, q);
  Eigen::Matrix2Xd proxy_normals(2, q);
  for (int i = 0; i < q; ++i) proxy_normals.col(i) = (proxy.col(i) - circle.center).normalized();

  Subset near;
  near.disc = other.disc;
  for (int i : other.idx)
    if ((other.disc->point(i) - circle.center).norm() <= r_proxy) near.idx.push_back(i);

  const double tol_id = 0.1 * eps;
  if (cols) {
    MatrixX<Scalar> cand(near.size() + q, src.size());
    if (near.size() > 0) cand.topRows(near.size()) = assembler.assemble(near, src);
    cand.bottomRows(q) = assembler.outgoing(proxy, src);
    auto id = detail::column_id<Scalar>(cand, tol_id);
    Subset skel;
    skel.disc = src.disc;
    for (int j : id.skeleton) skel.idx.push_back(src.idx[j]);
    MatrixX<Scalar> lcols = skel.idx.empty()
                                ? MatrixX<Scalar>::Zero(trg.size(), 0)
                                : assembler.assemble(trg, skel);
    auto out = detail::recompress<Scalar>(lcols, id.interp, eps);
    out.warn_dense = out.rank() > std::min(trg.size(), src.size()) / 2;
    return out;
  }
  MatrixX<Scalar> cand(trg.size(), near.size() + 2 * q);
  if (near.size() > 0) cand.leftCols(near.size()) = assembler.assemble(trg, near);
  cand.rightCols(2 * q) = assembler.incoming(trg, proxy, proxy_normals);
  auto id = detail::column_id<Scalar>(MatrixX<Scalar>(cand.transpose()), tol_id);
  Subset skel;
  skel.disc = trg.disc;
  for (int j : id.skeleton) skel.idx.push_back(trg.idx[j]);
  MatrixX<Scalar> rrows = skel.idx.empty() ? MatrixX<Scalar>::Zero(0, src.size())
                                           : assembler.assemble(skel, src);
  // A ~= interp^T * A(skel, :), recompressed through a QR of the right factor.
  MatrixX<Scalar> l0 = id.interp.transpose();
  if (l0.cols() == 0) {
    LowRankFactor<Scalar> out;
    out.epsilon = eps;
    out.left = MatrixX<Scalar>::Zero(trg.size(), 0);
    out.right = MatrixX<Scalar>::Zero(0, src.size());
    return out;
  }
  Eigen::HouseholderQR<MatrixX<Scalar>> qr(MatrixX<Scalar>(rrows.adjoint()));
  const int kin = static_cast<int>(rrows.rows());
  MatrixX<Scalar> rt = qr.matrixQR().topRows(kin).template triangularView<Eigen::Upper>();
  MatrixX<Scalar> core = l0 * rt.adjoint();
  Eigen::BDCSVD<MatrixX<Scalar>> svd(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  int k = 0;
  while (k < sv.size() && sv[k] > eps * sv[0]) ++k;
  MatrixX<Scalar> thin_q =
      qr.householderQ() * MatrixX<Scalar>::Identity(rrows.cols(), kin);
  LowRankFactor<Scalar> out;
  out.epsilon = eps;
  out.left = svd.matrixU().leftCols(k) * sv.head(k).asDiagonal();
  out.right = (thin_q * svd.matrixV().leftCols(k)).adjoint();
  out.warn_dense = k > std::min(trg.size(), src.size()) / 2;
  return out;
}

namespace detail {

inline std::vector<int> shift_indices(int n, int offset) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), offset);
  return v;
}

}  // namespace detail

template <class Scalar>
UpdateFactor<Scalar> make_update_new(LowRankFactor<Scalar> kc, LowRankFactor<Scalar> kp,
                                     LowRankFactor<Scalar> pk, const PerturbationPlan& plan) {
  const int n_o = plan.n_original(), n_p = plan.n_piece();
  UpdateFactor<Scalar> out;
  out.n_ext = n_o + n_p;
  out.epsilon = kc.epsilon;
  out.warn_dense = kc.warn_dense || kp.warn_dense || pk.warn_dense;
  out.ledger.k_kc = kc.rank();
  out.ledger.k_kp = kp.rank();
  out.ledger.k_pk = pk.rank();
  const std::vector<int> piece_rows = detail::shift_indices(n_p, n_o);
  out.blocks.push_back({plan.kept, plan.cut, -kc.left, std::move(kc.right)});
  out.blocks.push_back({plan.kept, piece_rows, std::move(kp.left), std::move(kp.right)});
  out.blocks.push_back({piece_rows, plan.kept, std::move(pk.left), std::move(pk.right)});
  return out;
}

template <class Scalar>
UpdateFactor<Scalar> make_update_orig(LowRankFactor<Scalar> kc, LowRankFactor<Scalar> op,
                                      MatrixX<Scalar> b_cc, LowRankFactor<Scalar> pk,
                                      const PerturbationPlan& plan) {
  const int n_o = plan.n_original(), n_p = plan.n_piece();
  UpdateFactor<Scalar> out;
  out.n_ext = n_o + n_p;
  out.epsilon = kc.epsilon;
  out.warn_dense = kc.warn_dense || op.warn_dense || pk.warn_dense;
  out.ledger.k_kc = kc.rank();
  out.ledger.k_op = op.rank();
  out.ledger.k_pk = pk.rank();
  out.ledger.n_c = plan.n_cut();
  const std::vector<int> piece_rows = detail::shift_indices(n_p, n_o);
  const std::vector<int> all_orig = detail::shift_indices(n_o, 0);
  out.blocks.push_back({plan.kept, plan.cut, -kc.left, std::move(kc.right)});
  out.blocks.push_back({all_orig, piece_rows, std::move(op.left), std::move(op.right)});
  typename UpdateFactor<Scalar>::BlockPair bcc;
  bcc.rows = plan.cut;
  bcc.cols = plan.cut;
  bcc.left = -b_cc;
  bcc.right_is_identity = true;
  out.blocks.push_back(std::move(bcc));
  out.blocks.push_back({piece_rows, plan.kept, std::move(pk.left), std::move(pk.right)});
  return out;
}

template <class Scalar>
UpdateFactor<Scalar> factor_update_new(const Assembler<Scalar>& assembler,
                                       const PerturbationPlan& plan, double eps) {
  const Subset kept = Subset::of(*plan.original, plan.kept);
  const Subset cut = Subset::of(*plan.original, plan.cut);
  const Subset piece = Subset::all(plan.piece);
  auto kc = factor_kernel_block(assembler, kept, cut, eps, CompressSide::kColumns);
  auto kp = factor_kernel_block(assembler, kept, piece, eps, CompressSide::kColumns);
  auto pk = factor_kernel_block(assembler, piece, kept, eps, CompressSide::kRows);
  auto out = make_update_new(std::move(kc), std::move(kp), std::move(pk), plan);
  out.epsilon = eps;
  return out;
}

template <class Scalar>
UpdateFactor<Scalar> factor_update_orig(const Assembler<Scalar>& assembler,
                                        const PerturbationPlan& plan, double eps) {
  const Subset kept = Subset::of(*plan.original, plan.kept);
  const Subset cut = Subset::of(*plan.original, plan.cut);
  const Subset all_orig = Subset::all(*plan.original);
  const Subset piece = Subset::all(plan.piece);
  auto kc = factor_kernel_block(assembler, kept, cut, eps, CompressSide::kColumns);
  auto op = factor_kernel_block(assembler, all_orig, piece, eps, CompressSide::kColumns);
  auto pk = factor_kernel_block(assembler, piece, kept, eps, CompressSide::kRows);
  MatrixX<Scalar> b_cc = assembler.assemble(cut, cut);
  b_cc.diagonal().setZero();
  auto out = make_update_orig(std::move(kc), std::move(op), std::move(b_cc), std::move(pk), plan);
  out.epsilon = eps;
  return out;
}

}  // namespace bie
