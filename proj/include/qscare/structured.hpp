#pragma once

#include "qscare/banded.hpp"
#include "qscare/hmatrix.hpp"

#include <variant>

namespace qscare {

enum class Structure { dense, banded, hierarchical };

using StructuredMatrix = std::variant<Mat, BandedMatrix, HMatrix>;

Structure structure_of(const StructuredMatrix& m);
Index order(const StructuredMatrix& m);
Mat to_dense(const StructuredMatrix& m);
Mat apply(const StructuredMatrix& m, const Mat& x);
// Conversions used when a solver needs a specific format.
BandedMatrix to_banded(const StructuredMatrix& m);
HMatrix to_hmatrix(const StructuredMatrix& m, Index n_min, double tol);

const char* structure_name(Structure s);

}  // namespace qscare
