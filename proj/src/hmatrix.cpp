#include "qscare/hmatrix.hpp"

#include "qscare/error.hpp"

#include <algorithm>

namespace qscare {

namespace {

Index first_half(Index m) { return (m + 1) / 2; }

// Sum of pieces, recompressed relative to the largest piece.
LowRankFactor sum_recompress(const std::vector<LowRankFactor>& pieces, Index rows, Index cols, double tol) {
  LowRankFactor acc = LowRankFactor::zero(rows, cols);
  double scale = 0.0;
  int nonzero = 0;
  for (const auto& p : pieces) {
    if (p.rank() == 0) continue;
    ++nonzero;
    if (pieces.size() > 1) scale = std::max(scale, lowrank_norm2(p));
    acc = lowrank_sum(acc, p);
  }
  if (nonzero == 0) return acc;
  acc.symmetric = false;
  return lowrank_recompress(acc, tol, scale);
}

LowRankFactor embed(const LowRankFactor& p, Index rows, Index cols, Index r_off, Index c_off) {
  Mat u = Mat::Zero(rows, p.rank()), v = Mat::Zero(cols, p.rank());
  u.middleRows(r_off, p.rows()) = p.u;
  v.middleRows(c_off, p.cols()) = p.v;
  return LowRankFactor(std::move(u), p.d, std::move(v));
}

struct Range {
  Index lo, hi;
  Index len() const { return hi - lo; }
  bool empty() const { return hi <= lo; }
};

Range intersect(Index a0, Index a1, Index b0, Index b1) { return {std::max(a0, b0), std::min(a1, b1)}; }

void extract_dense_into(const HMatrix& h, Index r0, Index c0, Index rows, Index cols, Eigen::Ref<Mat> out) {
  if (rows <= 0 || cols <= 0) return;
  if (h.is_leaf()) {
    out = h.dense().block(r0, c0, rows, cols);
    return;
  }
  const Index s = h.split(), n = h.n();
  const Range ri[2] = {intersect(r0, r0 + rows, 0, s), intersect(r0, r0 + rows, s, n)};
  const Range ci[2] = {intersect(c0, c0 + cols, 0, s), intersect(c0, c0 + cols, s, n)};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const Range& r = ri[a];
      const Range& c = ci[b];
      if (r.empty() || c.empty()) continue;
      auto dst = out.block(r.lo - r0, c.lo - c0, r.len(), c.len());
      const Index ro = a ? s : 0, co = b ? s : 0;
      if (a == b) {
        extract_dense_into(h.child(a), r.lo - ro, c.lo - co, r.len(), c.len(), dst);
      } else {
        const LowRankFactor& f = a == 0 ? h.upper() : h.lower();
        dst = f.u.middleRows(r.lo - ro, r.len()) * f.d * f.v.middleRows(c.lo - co, c.len()).transpose();
      }
    }
}

Mat extract_dense(const HMatrix& h, Index r0, Index c0, Index rows, Index cols) {
  Mat out = Mat::Zero(rows, cols);
  extract_dense_into(h, r0, c0, rows, cols, out);
  return out;
}

LowRankFactor extract_lowrank(const HMatrix& h, Index r0, Index c0, Index rows, Index cols, double tol) {
  if (h.is_leaf()) return compress_block(h.dense().block(r0, c0, rows, cols), tol);
  const Index s = h.split(), n = h.n();
  const Range ri[2] = {intersect(r0, r0 + rows, 0, s), intersect(r0, r0 + rows, s, n)};
  const Range ci[2] = {intersect(c0, c0 + cols, 0, s), intersect(c0, c0 + cols, s, n)};
  std::vector<LowRankFactor> pieces;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const Range& r = ri[a];
      const Range& c = ci[b];
      if (r.empty() || c.empty()) continue;
      const Index ro = a ? s : 0, co = b ? s : 0;
      LowRankFactor p;
      if (a == b) {
        p = extract_lowrank(h.child(a), r.lo - ro, c.lo - co, r.len(), c.len(), tol);
      } else {
        const LowRankFactor& f = a == 0 ? h.upper() : h.lower();
        p = LowRankFactor(f.u.middleRows(r.lo - ro, r.len()), f.d, f.v.middleRows(c.lo - co, c.len()));
      }
      pieces.push_back(embed(p, rows, cols, r.lo - r0, c.lo - c0));
    }
  return sum_recompress(pieces, rows, cols, tol);
}

HMatrix reproject_rec(const HMatrix& h, Index off, const HMatrix& shape, double tol) {
  const Index m = shape.n();
  if (shape.is_leaf()) return HMatrix::leaf(extract_dense(h, off, off, m, m));
  const Index s = shape.split();
  return HMatrix::node(reproject_rec(h, off, shape.child(0), tol), reproject_rec(h, off + s, shape.child(1), tol),
                       extract_lowrank(h, off, off + s, s, m - s, tol),
                       extract_lowrank(h, off + s, off, m - s, s, tol));
}

HMatrix from_dense_rec(const Eigen::Ref<const Mat>& m, double tol, Index n_min) {
  const Index n = m.rows();
  if (n <= n_min) return HMatrix::leaf(m);
  const Index s = first_half(n);
  return HMatrix::node(from_dense_rec(m.topLeftCorner(s, s), tol, n_min),
                       from_dense_rec(m.bottomRightCorner(n - s, n - s), tol, n_min),
                       compress_block(m.topRightCorner(s, n - s), tol),
                       compress_block(m.bottomLeftCorner(n - s, s), tol));
}

HMatrix from_banded_rec(const BandedMatrix& b, Index off, Index m, Index n_min) {
  if (m <= n_min) {
    Mat d(m, m);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < m; ++j) d(i, j) = b(off + i, off + j);
    return HMatrix::leaf(std::move(d));
  }
  const Index s = first_half(m);
  auto corner = [&](Index bw, Index rows, Index cols, bool upper) {
    const Index p = std::min({bw, rows, cols});
    Mat u = Mat::Zero(rows, p), v = Mat::Zero(cols, p), d(p, p);
    for (Index a = 0; a < p; ++a) {
      if (upper) {
        u(rows - p + a, a) = 1.0;  // last rows of the top block
        v(a, a) = 1.0;             // first columns of the right block
      } else {
        u(a, a) = 1.0;
        v(cols - p + a, a) = 1.0;
      }
    }
    for (Index a = 0; a < p; ++a)
      for (Index c = 0; c < p; ++c)
        d(a, c) = upper ? b(off + s - p + a, off + s + c) : b(off + s + a, off + s - p + c);
    return LowRankFactor(std::move(u), std::move(d), std::move(v));
  };
  return HMatrix::node(from_banded_rec(b, off, s, n_min), from_banded_rec(b, off + s, m - s, n_min),
                       corner(b.upper(), s, m - s, true), corner(b.lower(), m - s, s, false));
}

HMatrix constant_diag_rec(Index n, Index n_min, double scale) {
  if (n <= n_min) return HMatrix::leaf(scale * Mat::Identity(n, n));
  const Index s = first_half(n);
  return HMatrix::node(constant_diag_rec(s, n_min, scale), constant_diag_rec(n - s, n_min, scale),
                       LowRankFactor::zero(s, n - s), LowRankFactor::zero(n - s, s));
}

HMatrix axpby_rec(double alpha, const HMatrix& a, double beta, const HMatrix& b, double tol) {
  if (a.is_leaf()) return HMatrix::leaf(alpha * a.dense() + beta * b.dense());
  const Index s = a.split(), m = a.n();
  return HMatrix::node(axpby_rec(alpha, a.child(0), beta, b.child(0), tol),
                       axpby_rec(alpha, a.child(1), beta, b.child(1), tol),
                       sum_recompress({a.upper().scaled(alpha), b.upper().scaled(beta)}, s, m - s, tol),
                       sum_recompress({a.lower().scaled(alpha), b.lower().scaled(beta)}, m - s, s, tol));
}

HMatrix lowrank_update_rec(const HMatrix& h, const Mat& u, const Mat& d, const Mat& v, bool sym, double tol) {
  if (h.is_leaf()) return HMatrix::leaf(h.dense() + u * d * v.transpose());
  const Index s = h.split(), m = h.n();
  LowRankFactor p12(u.topRows(s), d, v.bottomRows(m - s));
  LowRankFactor p21(u.bottomRows(m - s), d, v.topRows(s));
  return HMatrix::node(lowrank_update_rec(h.child(0), u.topRows(s), d, v.topRows(s), sym, tol),
                       lowrank_update_rec(h.child(1), u.bottomRows(m - s), d, v.bottomRows(m - s), sym, tol),
                       sum_recompress({h.upper(), p12}, s, m - s, tol),
                       sum_recompress({h.lower(), p21}, m - s, s, tol));
}

HMatrix matmul_rec(const HMatrix& a, const HMatrix& b, double tol) {
  if (a.is_leaf()) return HMatrix::leaf(a.dense() * b.dense());
  const Index s = a.split(), m = a.n();
  const LowRankFactor& a12 = a.upper();
  const LowRankFactor& a21 = a.lower();
  const LowRankFactor& b12 = b.upper();
  const LowRankFactor& b21 = b.lower();

  // C11 = A11 B11 + A12 B21, C22 = A22 B22 + A21 B12
  HMatrix c11 = matmul_rec(a.child(0), b.child(0), tol);
  HMatrix c22 = matmul_rec(a.child(1), b.child(1), tol);
  if (a12.rank() > 0 && b21.rank() > 0) {
    LowRankFactor p(a12.u * (a12.d * (a12.v.transpose() * b21.u) * b21.d), Mat::Identity(b21.rank(), b21.rank()),
                    b21.v);
    c11 = hm_lowrank_update(c11, p, tol);
  }
  if (a21.rank() > 0 && b12.rank() > 0) {
    LowRankFactor p(a21.u * (a21.d * (a21.v.transpose() * b12.u) * b12.d), Mat::Identity(b12.rank(), b12.rank()),
                    b12.v);
    c22 = hm_lowrank_update(c22, p, tol);
  }
  // C12 = A11 B12 + A12 B22, C21 = A21 B11 + A22 B21
  std::vector<LowRankFactor> p12, p21;
  if (b12.rank() > 0) p12.emplace_back(a.child(0).apply(b12.u), b12.d, b12.v);
  if (a12.rank() > 0) p12.emplace_back(a12.u, a12.d, b.child(1).apply_transpose(a12.v));
  if (a21.rank() > 0) p21.emplace_back(a21.u, a21.d, b.child(0).apply_transpose(a21.v));
  if (b21.rank() > 0) p21.emplace_back(a.child(1).apply(b21.u), b21.d, b21.v);
  return HMatrix::node(std::move(c11), std::move(c22), sum_recompress(p12, s, m - s, tol),
                       sum_recompress(p21, m - s, s, tol));
}

HMatrix recompress_rec(const HMatrix& h, double tol) {
  if (h.is_leaf()) return h;
  return HMatrix::node(recompress_rec(h.child(0), tol), recompress_rec(h.child(1), tol),
                       lowrank_recompress(h.upper(), tol), lowrank_recompress(h.lower(), tol));
}

HMatrix symmetrize_rec(const HMatrix& h, double tol) {
  if (h.is_leaf()) return HMatrix::leaf(0.5 * (h.dense() + h.dense().transpose()));
  const Index s = h.split(), m = h.n();
  LowRankFactor up = sum_recompress({h.upper().scaled(0.5), h.lower().transpose().scaled(0.5)}, s, m - s, tol);
  LowRankFactor lo = up.transpose();
  return HMatrix::node(symmetrize_rec(h.child(0), tol), symmetrize_rec(h.child(1), tol), std::move(up), std::move(lo));
}

}  // namespace

// ---- HMatrix -------------------------------------------------------------

HMatrix HMatrix::leaf(Mat d) {
  require(d.rows() == d.cols(), "HMatrix::leaf: block must be square");
  auto nd = std::make_shared<Node>();
  nd->n = d.rows();
  nd->leaf = true;
  nd->d = std::move(d);
  HMatrix h;
  h.node_ = std::move(nd);
  return h;
}

HMatrix HMatrix::node(HMatrix a11, HMatrix a22, LowRankFactor a12, LowRankFactor a21) {
  require(a12.rows() == a11.n() && a12.cols() == a22.n() && a21.rows() == a22.n() && a21.cols() == a11.n(),
          "HMatrix::node: offdiagonal factor shapes do not match the diagonal blocks");
  auto nd = std::make_shared<Node>();
  nd->n = a11.n() + a22.n();
  nd->leaf = false;
  nd->c11 = std::move(a11);
  nd->c22 = std::move(a22);
  nd->a12 = std::move(a12);
  nd->a21 = std::move(a21);
  HMatrix h;
  h.node_ = std::move(nd);
  return h;
}

HMatrix HMatrix::from_dense(const Mat& m, double tol, Index n_min) {
  require(m.rows() == m.cols(), "hm_from_dense: matrix must be square");
  require(tol > 0.0 && n_min >= 1, "hm_from_dense: tol and n_min must be positive");
  return from_dense_rec(m, tol, n_min);
}

HMatrix HMatrix::from_banded(const BandedMatrix& b, Index n_min) {
  require(n_min >= 1, "hm_from_banded: n_min must be positive");
  return from_banded_rec(b, 0, b.n(), n_min);
}

HMatrix HMatrix::identity(Index n, Index n_min, double scale) { return constant_diag_rec(n, n_min, scale); }
HMatrix HMatrix::zero(Index n, Index n_min) { return constant_diag_rec(n, n_min, 0.0); }

Index HMatrix::n() const { return node_ ? node_->n : 0; }
bool HMatrix::is_leaf() const { return !node_ || node_->leaf; }
const Mat& HMatrix::dense() const { return node_->d; }
const HMatrix& HMatrix::child(int i) const { return i == 0 ? node_->c11 : node_->c22; }
const LowRankFactor& HMatrix::upper() const { return node_->a12; }
const LowRankFactor& HMatrix::lower() const { return node_->a21; }

Mat HMatrix::to_dense() const { return extract_dense(*this, 0, 0, n(), n()); }

Mat HMatrix::apply(const Mat& x) const {
  require(x.rows() == n(), "hm_matvec: shape mismatch");
  if (is_leaf()) return dense() * x;
  const Index s = split(), m = n();
  Mat y(m, x.cols());
  y.topRows(s) = child(0).apply(x.topRows(s)) + upper().apply(x.bottomRows(m - s));
  y.bottomRows(m - s) = lower().apply(x.topRows(s)) + child(1).apply(x.bottomRows(m - s));
  return y;
}

Mat HMatrix::apply_transpose(const Mat& x) const {
  require(x.rows() == n(), "hm_matvec: shape mismatch");
  if (is_leaf()) return dense().transpose() * x;
  const Index s = split(), m = n();
  Mat y(m, x.cols());
  y.topRows(s) = child(0).apply_transpose(x.topRows(s)) + lower().apply_transpose(x.bottomRows(m - s));
  y.bottomRows(m - s) = upper().apply_transpose(x.topRows(s)) + child(1).apply_transpose(x.bottomRows(m - s));
  return y;
}

HMatrix HMatrix::transpose() const {
  if (is_leaf()) return leaf(dense().transpose());
  return node(child(0).transpose(), child(1).transpose(), lower().transpose(), upper().transpose());
}

HMatrix HMatrix::scaled(double s) const {
  if (is_leaf()) return leaf(s * dense());
  return node(child(0).scaled(s), child(1).scaled(s), upper().scaled(s), lower().scaled(s));
}

Index HMatrix::max_rank() const {
  if (is_leaf()) return 0;
  return std::max({upper().rank(), lower().rank(), child(0).max_rank(), child(1).max_rank()});
}

Index HMatrix::depth() const {
  if (is_leaf()) return 0;
  return 1 + std::max(child(0).depth(), child(1).depth());
}

Index HMatrix::leaf_count() const { return is_leaf() ? 1 : child(0).leaf_count() + child(1).leaf_count(); }

size_t HMatrix::storage() const {
  if (is_leaf()) return static_cast<size_t>(dense().size());
  auto fs = [](const LowRankFactor& f) { return static_cast<size_t>(f.u.size() + f.d.size() + f.v.size()); };
  return child(0).storage() + child(1).storage() + fs(upper()) + fs(lower());
}

bool HMatrix::same_shape(const HMatrix& o) const {
  if (n() != o.n() || is_leaf() != o.is_leaf()) return false;
  if (is_leaf()) return true;
  return child(0).same_shape(o.child(0)) && child(1).same_shape(o.child(1));
}

// ---- arithmetic ------------------------------------------------------------

HMatrix hm_reproject(const HMatrix& h, const HMatrix& shape, double tol) {
  require(h.n() == shape.n(), "hm_reproject: size mismatch");
  if (h.same_shape(shape)) return h;
  HMatrix r = reproject_rec(h, 0, shape, tol);
  if (!r.same_shape(shape)) throw InputError("hm_reproject: tree mismatch after rebalancing");
  return r;
}

HMatrix hm_axpby(double alpha, const HMatrix& a, double beta, const HMatrix& b, double tol) {
  require(a.n() == b.n(), "hm_add: size mismatch");
  require(tol > 0.0, "hm_add: tol must be positive");
  return axpby_rec(alpha, a, beta, hm_reproject(b, a, tol), tol);
}

HMatrix hm_add(const HMatrix& a, const HMatrix& b, double tol) { return hm_axpby(1.0, a, 1.0, b, tol); }

HMatrix hm_matmul(const HMatrix& a, const HMatrix& b, double tol) {
  require(a.n() == b.n(), "hm_matmul: size mismatch");
  require(tol > 0.0, "hm_matmul: tol must be positive");
  return matmul_rec(a, hm_reproject(b, a, tol), tol);
}

HMatrix hm_lowrank_update(const HMatrix& h, const LowRankFactor& l, double tol) {
  require(l.rows() == h.n() && l.cols() == h.n(), "hm_lowrank_update: size mismatch");
  require(tol > 0.0, "hm_lowrank_update: tol must be positive");
  if (l.rank() == 0) return h;
  return lowrank_update_rec(h, l.u, l.d, l.v, l.symmetric, tol);
}

HMatrix hm_recompress(const HMatrix& h, double tol) {
  require(tol > 0.0, "hm_recompress: tol must be positive");
  return recompress_rec(h, tol);
}

HMatrix hm_symmetrize(const HMatrix& h, double tol) { return symmetrize_rec(h, tol); }

HMatrix hm_block_diag(const HMatrix& a11, const HMatrix& a22) {
  return HMatrix::node(a11, a22, LowRankFactor::zero(a11.n(), a22.n()), LowRankFactor::zero(a22.n(), a11.n()));
}

HSplit hm_split(const HMatrix& h) {
  if (h.is_leaf()) throw InputError("hm_split: matrix has a single level");
  const Index s = h.split(), m = h.n();
  const LowRankFactor& a12 = h.upper();
  const LowRankFactor& a21 = h.lower();
  const Index r = a12.rank(), p = a21.rank();
  Mat u = Mat::Zero(m, r + p), v = Mat::Zero(m, r + p), d = Mat::Zero(r + p, r + p);
  u.block(0, 0, s, r) = a12.u;
  u.block(s, r, m - s, p) = a21.u;
  v.block(s, 0, m - s, r) = a12.v;
  v.block(0, r, s, p) = a21.v;
  d.topLeftCorner(r, r) = a12.d;
  d.bottomRightCorner(p, p) = a21.d;
  return {h.child(0), h.child(1), LowRankFactor(std::move(u), std::move(d), std::move(v))};
}

HSplit hm_split_symmetric(const HMatrix& h) {
  if (h.is_leaf()) throw InputError("hm_split: matrix has a single level");
  const Index s = h.split(), m = h.n();
  const LowRankFactor& a12 = h.upper();
  const Index r = a12.rank();
  Mat u = Mat::Zero(m, 2 * r), d = Mat::Zero(2 * r, 2 * r);
  u.block(0, 0, s, r) = a12.u;
  u.block(s, r, m - s, r) = a12.v;
  d.topRightCorner(r, r) = a12.d;
  d.bottomLeftCorner(r, r) = a12.d.transpose();
  return {h.child(0), h.child(1), LowRankFactor::sym(std::move(u), std::move(d))};
}

// ---- factorization -----------------------------------------------------------

HFactorization::HFactorization(const HMatrix& h, double tol) : n_(h.n()), leaf_(h.is_leaf()) {
  if (leaf_) {
    if (n_ == 0) return;
    lu_.compute(h.dense());
    if (!(lu_.rcond() > 1e-15)) throw ConvergenceError("hm_solve: singular-to-working-precision pivot");
    return;
  }
  const LowRankFactor& a12 = h.upper();
  a21_ = h.lower();
  auto f11 = std::make_shared<HFactorization>(h.child(0), tol);
  w1_ = f11->solve(a12.u);
  d1_ = a12.d;
  v2_ = a12.v;
  HMatrix schur = h.child(1);
  if (a21_.rank() > 0 && a12.rank() > 0) {
    // core is p x r; fold it into the left factor
    Mat left = a21_.u * (-(a21_.d * (a21_.v.transpose() * w1_) * d1_));
    LowRankFactor upd(std::move(left), Mat::Identity(v2_.cols(), v2_.cols()), v2_);
    schur = hm_lowrank_update(schur, upd, tol);
  }
  f11_ = std::move(f11);
  fs_ = std::make_shared<HFactorization>(schur, tol);
}

Mat HFactorization::solve(const Mat& b) const {
  require(b.rows() == n_, "hm_solve: shape mismatch");
  if (leaf_) return n_ == 0 ? b : Mat(lu_.solve(b));
  const Index s = f11_->n();
  Mat y1 = f11_->solve(b.topRows(s));
  Mat z2 = b.bottomRows(n_ - s);
  if (a21_.rank() > 0) z2 -= a21_.apply(y1);
  Mat x(n_, b.cols());
  x.bottomRows(n_ - s) = fs_->solve(z2);
  x.topRows(s) = y1;
  if (d1_.rows() > 0) x.topRows(s) -= w1_ * (d1_ * (v2_.transpose() * x.bottomRows(n_ - s)));
  return x;
}

Mat hm_solve(const HMatrix& h, const Mat& b) { return HFactorization(h).solve(b); }

}  // namespace qscare
