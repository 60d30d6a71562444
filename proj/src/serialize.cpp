#include "qscare/serialize.hpp"

#include "qscare/error.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace qscare {

namespace {

constexpr char kMagic[4] = {'Q', 'S', 'C', 'R'};
enum Kind : std::uint32_t { kBanded = 1, kHMatrix = 2 };

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InputError("read: truncated stream");
  return v;
}

void put_doubles(std::ostream& os, const double* p, Index count) {
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(count * sizeof(double)));
}

void get_doubles(std::istream& is, double* p, Index count) {
  is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(count * sizeof(double)));
  if (!is) throw InputError("read: truncated stream");
}

void header(std::ostream& os, Kind k) {
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kFormatVersion);
  put<std::uint32_t>(os, k);
}

void check_header(std::istream& is, Kind k) {
  char m[4];
  is.read(m, 4);
  if (!is || std::memcmp(m, kMagic, 4) != 0) throw InputError("read: bad magic bytes");
  if (get<std::uint32_t>(is) != kFormatVersion) throw InputError("read: unsupported format version");
  if (get<std::uint32_t>(is) != k) throw InputError("read: container holds a different matrix kind");
}

void put_mat(std::ostream& os, const Mat& m) {
  put<std::int64_t>(os, m.rows());
  put<std::int64_t>(os, m.cols());
  put_doubles(os, m.data(), m.size());
}

Mat get_mat(std::istream& is) {
  const auto r = get<std::int64_t>(is), c = get<std::int64_t>(is);
  if (r < 0 || c < 0 || r * c > (std::int64_t{1} << 34)) throw InputError("read: implausible matrix dimensions");
  Mat m(r, c);
  get_doubles(is, m.data(), m.size());
  return m;
}

void put_factor(std::ostream& os, const LowRankFactor& f) {
  put<std::uint8_t>(os, f.symmetric ? 1 : 0);
  put_mat(os, f.u);
  put_mat(os, f.d);
  put_mat(os, f.v);
}

LowRankFactor get_factor(std::istream& is) {
  const bool sym = get<std::uint8_t>(is) != 0;
  Mat u = get_mat(is), d = get_mat(is), v = get_mat(is);
  LowRankFactor f(std::move(u), std::move(d), std::move(v));
  f.symmetric = sym;
  return f;
}

void put_tree(std::ostream& os, const HMatrix& h) {
  if (h.is_leaf()) {
    put<std::uint8_t>(os, 0);
    put_mat(os, h.dense());
    return;
  }
  put<std::uint8_t>(os, 1);
  put_tree(os, h.child(0));
  put_tree(os, h.child(1));
  put_factor(os, h.upper());
  put_factor(os, h.lower());
}

HMatrix get_tree(std::istream& is, int depth) {
  if (depth > 64) throw InputError("read: tree too deep");
  const auto tag = get<std::uint8_t>(is);
  if (tag == 0) return HMatrix::leaf(get_mat(is));
  if (tag != 1) throw InputError("read: bad node tag");
  HMatrix a = get_tree(is, depth + 1);
  HMatrix b = get_tree(is, depth + 1);
  LowRankFactor up = get_factor(is);
  LowRankFactor lo = get_factor(is);
  return HMatrix::node(std::move(a), std::move(b), std::move(up), std::move(lo));
}

}  // namespace

void write_banded(std::ostream& os, const BandedMatrix& b) {
  header(os, kBanded);
  put<std::int64_t>(os, b.n());
  put<std::int64_t>(os, b.lower());
  put<std::int64_t>(os, b.upper());
  put<std::uint8_t>(os, b.symmetric() ? 1 : 0);
  put_doubles(os, b.data().data(), static_cast<Index>(b.data().size()));
}

BandedMatrix read_banded(std::istream& is) {
  check_header(is, kBanded);
  const auto n = get<std::int64_t>(is), lo = get<std::int64_t>(is), up = get<std::int64_t>(is);
  const bool sym = get<std::uint8_t>(is) != 0;
  if (n < 0 || lo < 0 || up < 0 || (n > 0 && (lo >= n || up >= n))) throw InputError("read: bad band dimensions");
  BandedMatrix b(n, lo, up);
  get_doubles(is, b.data().data(), static_cast<Index>(b.data().size()));
  if (sym) b.assert_symmetric(0.0);
  return b;
}

void write_hmatrix(std::ostream& os, const HMatrix& h) {
  header(os, kHMatrix);
  put<std::int64_t>(os, h.n());
  put_tree(os, h);
}

HMatrix read_hmatrix(std::istream& is) {
  check_header(is, kHMatrix);
  const auto n = get<std::int64_t>(is);
  HMatrix h = get_tree(is, 0);
  if (h.n() != n) throw InputError("read: dimension does not match the tree");
  return h;
}

void save(const std::string& path, const BandedMatrix& b) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("save: cannot open " + path);
  write_banded(os, b);
}

void save(const std::string& path, const HMatrix& h) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("save: cannot open " + path);
  write_hmatrix(os, h);
}

BandedMatrix load_banded(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("load: cannot open " + path);
  return read_banded(is);
}

HMatrix load_hmatrix(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("load: cannot open " + path);
  return read_hmatrix(is);
}

}  // namespace qscare
