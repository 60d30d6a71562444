#pragma once

// Binary container: "QSCR" magic, u32 version, u32 kind, then the payload.
// Integers are int64, reals are IEEE doubles, host byte order (little endian).

#include "qscare/banded.hpp"
#include "qscare/hmatrix.hpp"

#include <iosfwd>
#include <string>

namespace qscare {

inline constexpr std::uint32_t kFormatVersion = 1;

void write_banded(std::ostream& os, const BandedMatrix& b);
BandedMatrix read_banded(std::istream& is);
void write_hmatrix(std::ostream& os, const HMatrix& h);
HMatrix read_hmatrix(std::istream& is);

void save(const std::string& path, const BandedMatrix& b);
void save(const std::string& path, const HMatrix& h);
BandedMatrix load_banded(const std::string& path);
HMatrix load_hmatrix(const std::string& path);

}  // namespace qscare
