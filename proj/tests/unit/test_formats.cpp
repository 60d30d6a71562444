#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qscare/error.hpp"
#include "qscare/hmatrix.hpp"
#include "qscare/serialize.hpp"
#include "test_util.hpp"

#include <sstream>

using namespace qscare;
using namespace testutil;

namespace {

BandedMatrix rand_banded(Index n, Index lo, Index up, std::mt19937_64& g) {
  return BandedMatrix::from_dense(randn(n, n, g), lo, up);
}

// Dense matrix with offdiagonal blocks of rank <= r at every level of the tree.
Mat rand_quasiseparable(Index n, Index r, std::mt19937_64& g) {
  Mat d = randn(n, n, g);
  Mat l = randn(n, r, g), rr = randn(n, r, g);
  Mat lr = l * rr.transpose();
  Mat m = lr;
  for (Index i = 0; i < n; ++i)
    for (Index j = std::max<Index>(0, i - 2); j <= std::min(n - 1, i + 2); ++j) m(i, j) += d(i, j);
  // lower part: different generators
  Mat l2 = randn(n, r, g), r2 = randn(n, r, g);
  Mat lr2 = l2 * r2.transpose();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j + 2 < i; ++j) m(i, j) = lr2(i, j);
  return m;
}

double rel2(const Mat& a, const Mat& b) { return norm2(a - b) / norm2(b); }

}  // namespace

TEST_CASE("banded basics and arithmetic") {
  std::mt19937_64 g(11);
  BandedMatrix a = rand_banded(30, 2, 3, g), b = rand_banded(30, 1, 4, g);
  Mat ad = a.to_dense(), bd = b.to_dense();
  CHECK(((a * b).to_dense() - ad * bd).norm() < 1e-12 * (ad * bd).norm());
  CHECK(((a + b).to_dense() - (ad + bd)).norm() == 0.0);
  CHECK((a.transpose().to_dense() - ad.transpose()).norm() == 0.0);
  Mat x = randn(30, 3, g);
  CHECK((a.apply(x) - ad * x).norm() < 1e-12);
  CHECK((a.apply_transpose(x) - ad.transpose() * x).norm() < 1e-12);
  CHECK(frobenius_dot(a, b) == doctest::Approx((ad.array() * bd.array()).sum()));
  CHECK(a.measured_bandwidth() == 3);
  CHECK(BandedMatrix::from_dense(ad).lower() == 2);
}

TEST_CASE("band_truncate") {
  std::mt19937_64 g(12);
  Mat m = randn(10, 10, g);
  CHECK((band_truncate(m, 9).to_dense() - m).norm() == 0.0);
  Mat diag = m.diagonal().asDiagonal();
  CHECK((band_truncate(m, 0).to_dense() - diag).norm() == 0.0);
  BandedMatrix t = BandedMatrix::tridiag(10, 1, -2, 1);
  CHECK((band_truncate(t, 1).to_dense() - t.to_dense()).norm() == 0.0);
  // idempotent, linear, contraction
  BandedMatrix b = BandedMatrix::from_dense(m, 9, 9), c = BandedMatrix::from_dense(randn(10, 10, g), 9, 9);
  for (Index s = 0; s < 10; ++s) {
    BandedMatrix ts = band_truncate(b, s);
    CHECK((band_truncate(ts, s).to_dense() - ts.to_dense()).norm() == 0.0);
    CHECK(ts.frobenius() <= b.frobenius());
    Mat lin = band_truncate(axpby(2.0, b, -3.0, c), s).to_dense();
    Mat sep = 2.0 * ts.to_dense() - 3.0 * band_truncate(c, s).to_dense();
    CHECK((lin - sep).norm() < 1e-13);
  }
}

TEST_CASE("lowrank_recompress") {
  std::mt19937_64 g(13);
  Mat u = randn(40, 3, g);
  Mat dd = Eigen::Vector3d(1.0, 2.0, -0.5).asDiagonal();
  Mat u2(40, 6);
  u2 << u, u;
  Mat d2 = Mat::Zero(6, 6);
  d2.topLeftCorner(3, 3) = dd;
  d2.bottomRightCorner(3, 3) = dd;
  LowRankFactor dup = LowRankFactor::sym(u2, d2);
  LowRankFactor c = lowrank_recompress(dup, 1e-12);
  CHECK(c.rank() == 3);
  CHECK((c.to_dense() - dup.to_dense()).norm() < 1e-12 * dup.to_dense().norm());

  LowRankFactor z = lowrank_recompress(LowRankFactor::zero(10, 7), 1e-10);
  CHECK(z.rank() == 0);

  // rank-20 factor padded to 60 columns
  Mat a = randn(200, 20, g), b = randn(150, 20, g);
  Mat mix = randn(20, 60, g), mixv = randn(20, 60, g);
  LowRankFactor pad(a * mix, randn(60, 60, g), b * mixv);
  LowRankFactor r = lowrank_recompress(pad, 1e-13);
  CHECK(r.rank() == 20);
  Mat ref = pad.to_dense();
  CHECK(norm2(r.to_dense() - ref) <= 1e-13 * norm2(ref) * 10);
}

TEST_CASE("compress_block keeps the tolerance on large blocks") {
  std::mt19937_64 g(14);
  Mat a = randn(400, 12, g) * randn(12, 300, g);
  a += 1e-12 * randn(400, 300, g);
  LowRankFactor l = compress_block(a, 1e-10);
  CHECK(l.rank() == 12);
  CHECK(norm2(l.to_dense() - a) <= 1e-10 * norm2(a));
}

TEST_CASE("hm_from_banded") {
  BandedMatrix t = BandedMatrix::tridiag(300, 1.0, -2.0, 1.0);
  HMatrix h = HMatrix::from_banded(t, 32);
  CHECK(h.max_rank() <= 1);
  CHECK((h.to_dense() - t.to_dense()).norm() == 0.0);
  HMatrix id = HMatrix::from_banded(BandedMatrix::identity(300), 32);
  CHECK(id.max_rank() == 0);

  std::mt19937_64 g(15);
  for (Index bw : {1, 3, 7}) {
    BandedMatrix b = rand_banded(500, bw, bw, g);
    HMatrix hb = HMatrix::from_banded(b, 40);
    CHECK((hb.to_dense() - b.to_dense()).norm() == 0.0);  // bit-equal
    CHECK(hb.max_rank() <= bw);
    // storage linear in n * bandwidth
    CHECK(hb.storage() <= static_cast<size_t>(4 * 40 * 500 + 8 * 500 * bw));
  }
}

TEST_CASE("hm_from_dense and matvec") {
  std::mt19937_64 g(16);
  Mat m = randn(600, 600, g);
  HMatrix h = HMatrix::from_dense(m, 1e-10, 100);
  CHECK(rel2(h.to_dense(), m) <= 1e-10);
  Mat q = rand_quasiseparable(512, 3, g);
  HMatrix hq = HMatrix::from_dense(q, 1e-10, 64);
  CHECK(hq.max_rank() <= 3 + 5);
  CHECK(rel2(hq.to_dense(), q) <= 1e-10);
  Mat x = randn(512, 4, g);
  CHECK((hq.apply(x) - q * x).norm() <= 1e-9 * (q * x).norm());
  CHECK((hq.apply_transpose(x) - q.transpose() * x).norm() <= 1e-9 * (q * x).norm());
  Mat e = Mat::Zero(512, 1);
  e(17) = 1.0;
  CHECK((hq.apply(e) - hq.to_dense().col(17)).norm() < 1e-13 * q.norm());
}

TEST_CASE("hm_add, hm_matmul, hm_lowrank_update vs dense") {
  std::mt19937_64 g(17);
  Mat a = rand_quasiseparable(512, 2, g), b = rand_quasiseparable(512, 3, g);
  HMatrix ha = HMatrix::from_dense(a, 1e-12, 64), hb = HMatrix::from_dense(b, 1e-12, 64);
  Mat sum = hm_add(ha, hb, 1e-12).to_dense();
  CHECK(rel2(sum, a + b) <= 1e-9);
  Mat prod = hm_matmul(ha, hb, 1e-12).to_dense();
  CHECK(rel2(prod, a * b) <= 1e-9);
  LowRankFactor l(randn(512, 4, g), randn(4, 4, g), randn(512, 4, g));
  Mat upd = hm_lowrank_update(ha, l, 1e-12).to_dense();
  CHECK(rel2(upd, a + l.to_dense()) <= 1e-9);

  HMatrix zero = hm_add(ha, ha.scaled(-1.0), 1e-10);
  CHECK(zero.max_rank() == 0);
  CHECK(zero.to_dense().norm() == 0.0);

  HMatrix id = HMatrix::identity(512, 64);
  CHECK(rel2(hm_matmul(id, ha, 1e-12).to_dense(), a) <= 1e-12);
  CHECK(rel2(hm_add(ha, HMatrix::zero(512, 64), 1e-12).to_dense(), a) <= 1e-12);
}

TEST_CASE("trees of different shape are reprojected on the left operand") {
  std::mt19937_64 g(18);
  Mat a = rand_quasiseparable(300, 2, g), b = rand_quasiseparable(300, 2, g);
  HMatrix ha = HMatrix::from_dense(a, 1e-12, 40), hb = HMatrix::from_dense(b, 1e-12, 100);
  HMatrix s = hm_add(ha, hb, 1e-12);
  CHECK(s.same_shape(ha));
  CHECK(rel2(s.to_dense(), a + b) <= 1e-9);
  HMatrix p = hm_matmul(ha, hb, 1e-12);
  CHECK(rel2(p.to_dense(), a * b) <= 1e-9);
}

TEST_CASE("hm_recompress") {
  std::mt19937_64 g(19);
  Mat a = rand_quasiseparable(256, 2, g);
  HMatrix h = HMatrix::from_dense(a, 1e-12, 32);
  HMatrix doubled = hm_add(h, h, 1e-14);  // exact concatenation then recompress
  HMatrix r = hm_recompress(doubled, 1e-10);
  CHECK(r.max_rank() <= h.max_rank());
  CHECK(rel2(r.to_dense(), 2 * a) <= 1e-9);
}

TEST_CASE("hm_solve") {
  HMatrix id = HMatrix::identity(300, 50);
  std::mt19937_64 g(20);
  Mat b = randn(300, 3, g);
  CHECK((hm_solve(id, b) - b).norm() == 0.0);

  BandedMatrix dg(300, 0, 0);
  for (Index i = 0; i < 300; ++i) dg.at(i, i) = static_cast<double>(i + 1);
  Mat e1 = Mat::Zero(300, 1);
  e1(0) = 1.0;
  CHECK((hm_solve(HMatrix::from_banded(dg, 50), e1) - e1).norm() < 1e-15);

  Mat a = rand_quasiseparable(512, 3, g);
  a += 2.0 * a.cwiseAbs().rowwise().sum().asDiagonal();
  HMatrix h = HMatrix::from_dense(a, 1e-12, 64);
  Mat rhs = randn(512, 5, g);
  Mat x = hm_solve(h, rhs);
  CHECK((h.apply(x) - rhs).norm() <= 1e-10 * rhs.norm());

  // upper and lower offdiagonal ranks differ
  Mat up = Mat(a.triangularView<Eigen::Upper>()) + randn(512, 1, g) * randn(1, 512, g);
  Mat low = a.triangularView<Eigen::StrictlyLower>();
  Mat c = Mat(up.triangularView<Eigen::Upper>()) + low;
  c += 2.0 * c.cwiseAbs().rowwise().sum().asDiagonal();
  HMatrix hc = HMatrix::from_dense(c, 1e-12, 64);
  CHECK(hc.upper().rank() != hc.lower().rank());
  Mat xc = hm_solve(hc, rhs);
  CHECK((hc.apply(xc) - rhs).norm() <= 1e-10 * rhs.norm());
}

TEST_CASE("hm_split") {
  std::mt19937_64 g(21);
  HMatrix bd = hm_block_diag(HMatrix::from_dense(randn(20, 20, g), 1e-12, 32),
                             HMatrix::from_dense(randn(20, 20, g), 1e-12, 32));
  CHECK(hm_split(bd).delta.rank() == 0);

  BandedMatrix t = BandedMatrix::tridiag(100, 1.0, -2.0, 1.0);
  HSplit s = hm_split(HMatrix::from_banded(t, 20));
  CHECK(s.delta.rank() <= 2);
  Mat recon = s.delta.to_dense();
  recon.topLeftCorner(50, 50) += s.h11.to_dense();
  recon.bottomRightCorner(50, 50) += s.h22.to_dense();
  CHECK((recon - t.to_dense()).norm() == 0.0);

  Mat q = rand_quasiseparable(200, 2, g);
  HMatrix hq = HMatrix::from_dense(q, 1e-12, 32);
  HSplit sq = hm_split(hq);
  CHECK(sq.delta.rank() <= 2 * hq.max_rank());
  Mat rq = sq.delta.to_dense();
  rq.topLeftCorner(100, 100) += sq.h11.to_dense();
  rq.bottomRightCorner(100, 100) += sq.h22.to_dense();
  CHECK(rel2(rq, q) <= 1e-10);

  Mat sym = q + q.transpose();
  HSplit ss = hm_split_symmetric(HMatrix::from_dense(sym, 1e-12, 32));
  CHECK(ss.delta.symmetric);
  Mat rs = ss.delta.to_dense();
  rs.topLeftCorner(100, 100) += ss.h11.to_dense();
  rs.bottomRightCorner(100, 100) += ss.h22.to_dense();
  CHECK(rel2(rs, sym) <= 1e-10);

  CHECK_THROWS_AS(hm_split(HMatrix::leaf(Mat::Identity(3, 3))), InputError);
}

TEST_CASE("binary round trip") {
  std::mt19937_64 g(22);
  BandedMatrix b = rand_banded(50, 2, 3, g);
  std::stringstream ss;
  write_banded(ss, b);
  BandedMatrix b2 = read_banded(ss);
  CHECK(b2.lower() == 2);
  CHECK((b2.to_dense() - b.to_dense()).norm() == 0.0);

  HMatrix h = HMatrix::from_dense(rand_quasiseparable(200, 2, g), 1e-12, 30);
  std::stringstream hs;
  write_hmatrix(hs, h);
  HMatrix h2 = read_hmatrix(hs);
  CHECK(h2.same_shape(h));
  CHECK((h2.to_dense() - h.to_dense()).norm() == 0.0);

  std::stringstream bad("XXXX");
  CHECK_THROWS_AS(read_hmatrix(bad), InputError);
  std::stringstream wrong;
  write_banded(wrong, b);
  CHECK_THROWS_AS(read_hmatrix(wrong), InputError);
}
