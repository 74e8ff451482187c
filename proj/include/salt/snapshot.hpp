#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "salt/field.hpp"

namespace salt {

// Field snapshot, little-endian:
//   "SALTFLD1" | u32 dim | u32 resolution | f64 time | coefficients
// Coefficients are (re, im) f64 pairs in the SpectralVector storage order:
// component-major, then row-major wavevector index in FFT order.
//
// Ensemble file: "SALTXI01" | u32 dim | u32 resolution | u32 count |
// count coefficient blocks laid out as above.

struct Snapshot {
  SpectralVector field;
  double time = 0.0;
};

void write_snapshot(std::ostream& os, const SpectralVector& field, double time);
void write_snapshot(const std::filesystem::path& path, const SpectralVector& field, double time);
/// Throws std::runtime_error on a bad magic or truncated stream.
Snapshot read_snapshot(std::istream& is);
Snapshot read_snapshot(const std::filesystem::path& path);

void write_ensemble_fields(std::ostream& os, const std::vector<SpectralField>& fields, const GridPtr& grid);
std::vector<SpectralVector> read_ensemble_fields(std::istream& is);

}  // namespace salt
