#include "qscare/structured.hpp"

#include "qscare/error.hpp"

namespace qscare {

Structure structure_of(const StructuredMatrix& m) {
  switch (m.index()) {
    case 0: return Structure::dense;
    case 1: return Structure::banded;
    default: return Structure::hierarchical;
  }
}

Index order(const StructuredMatrix& m) {
  return std::visit(
      [](const auto& x) -> Index {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Mat>) return x.rows();
        else return x.n();
      },
      m);
}

Mat to_dense(const StructuredMatrix& m) {
  return std::visit(
      [](const auto& x) -> Mat {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Mat>) return x;
        else return x.to_dense();
      },
      m);
}

Mat apply(const StructuredMatrix& m, const Mat& v) {
  return std::visit(
      [&](const auto& x) -> Mat {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Mat>) return x * v;
        else return x.apply(v);
      },
      m);
}

BandedMatrix to_banded(const StructuredMatrix& m) {
  if (const auto* b = std::get_if<BandedMatrix>(&m)) return *b;
  return BandedMatrix::from_dense(to_dense(m));
}

HMatrix to_hmatrix(const StructuredMatrix& m, Index n_min, double tol) {
  if (const auto* h = std::get_if<HMatrix>(&m)) return *h;
  if (const auto* b = std::get_if<BandedMatrix>(&m)) return HMatrix::from_banded(*b, n_min);
  return HMatrix::from_dense(std::get<Mat>(m), tol, n_min);
}

const char* structure_name(Structure s) {
  switch (s) {
    case Structure::dense: return "dense";
    case Structure::banded: return "banded";
    default: return "hierarchical";
  }
}

}  // namespace qscare
