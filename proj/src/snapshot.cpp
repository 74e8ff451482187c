#include "salt/snapshot.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace salt {

namespace {

constexpr char kFieldMagic[8] = {'S', 'A', 'L', 'T', 'F', 'L', 'D', '1'};
constexpr char kEnsembleMagic[8] = {'S', 'A', 'L', 'T', 'X', 'I', '0', '1'};

template <typename T>
void put_le(std::ostream& os, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

template <typename T>
T get_le(std::istream& is) {
  std::array<char, sizeof(T)> bytes;
  if (!is.read(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
    throw std::runtime_error("snapshot stream truncated");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

void put_coefficients(std::ostream& os, std::span<const cplx> data) {
  for (const cplx& c : data) {
    put_le(os, c.real());
    put_le(os, c.imag());
  }
}

void get_coefficients(std::istream& is, std::span<cplx> data) {
  for (cplx& c : data) {
    const double re = get_le<double>(is);
    const double im = get_le<double>(is);
    c = cplx(re, im);
  }
}

void expect_magic(std::istream& is, const char (&magic)[8]) {
  char got[8];
  if (!is.read(got, 8) || std::memcmp(got, magic, 8) != 0) {
    throw std::runtime_error("bad magic: expected " + std::string(magic, 8));
  }
}

}  // namespace

void write_snapshot(std::ostream& os, const SpectralVector& field, double time) {
  os.write(kFieldMagic, 8);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(field.grid().dim()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(field.grid().resolution()));
  put_le<double>(os, time);
  put_coefficients(os, field.data());
}

void write_snapshot(const std::filesystem::path& path, const SpectralVector& field, double time) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_snapshot(os, field, time);
}

Snapshot read_snapshot(std::istream& is) {
  expect_magic(is, kFieldMagic);
  const auto dim = get_le<std::uint32_t>(is);
  const auto res = get_le<std::uint32_t>(is);
  const double time = get_le<double>(is);
  SpectralVector v(make_grid(static_cast<int>(dim), static_cast<int>(res)));
  get_coefficients(is, v.data());
  return Snapshot{std::move(v), time};
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_snapshot(is);
}

void write_ensemble_fields(std::ostream& os, const std::vector<SpectralField>& fields, const GridPtr& grid) {
  os.write(kEnsembleMagic, 8);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(grid->dim()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(grid->resolution()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(fields.size()));
  for (const auto& f : fields) put_coefficients(os, f.vec().data());
}

std::vector<SpectralVector> read_ensemble_fields(std::istream& is) {
  expect_magic(is, kEnsembleMagic);
  const auto dim = get_le<std::uint32_t>(is);
  const auto res = get_le<std::uint32_t>(is);
  const auto count = get_le<std::uint32_t>(is);
  const GridPtr grid = make_grid(static_cast<int>(dim), static_cast<int>(res));
  std::vector<SpectralVector> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    SpectralVector v(grid);
    get_coefficients(is, v.data());
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace salt
