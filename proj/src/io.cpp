#include "fbmbt/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace fbmbt {

static_assert(std::endian::native == std::endian::little,
              "binary path format is little-endian");

namespace {

// Shortest representation that parses back to the same double.
std::string number(double value) { return nlohmann::json(value).dump(); }

template <typename T>
void write_raw(std::ostream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
void read_raw(std::istream& is, T* value) {
  is.read(reinterpret_cast<char*>(value), sizeof *value);
  if (!is) throw std::runtime_error("binary path: truncated input");
}

}  // namespace

void write_fgn_csv(const FgnPath& path, std::ostream& os) {
  os << "index,value\n";
  for (std::size_t i = 0; i < path.values.size(); ++i)
    os << (i + 1) << ',' << number(path.values[i]) << '\n';
}

void write_fbm_grid_csv(const FbmGrid& grid, std::ostream& os) {
  os << "index,value\n";
  for (std::size_t i = 0; i < grid.values.size(); ++i)
    os << (grid.j_min + std::int64_t(i)) << ',' << number(grid.values[i])
       << '\n';
}

void write_crossing_counts_csv(const CrossingCounts& counts,
                               std::ostream& os) {
  os << "j,U,D\n";
  for (std::size_t i = 0; i < counts.up.size(); ++i)
    os << (counts.cell_min + std::int64_t(i)) << ',' << counts.up[i] << ','
       << counts.down[i] << '\n';
}

void write_local_time_csv(const LocalTimeProfile& profile, std::ostream& os) {
  os << "x,L\n";
  for (std::size_t i = 0; i < profile.x.size(); ++i)
    os << number(profile.x[i]) << ',' << number(profile.value[i]) << '\n';
}

void write_path_binary(double hurst, std::span<const double> values,
                       std::ostream& os) {
  os.write(kPathMagic, sizeof kPathMagic);
  write_raw(os, kPathFormatVersion);
  write_raw(os, hurst);
  write_raw(os, std::uint64_t(values.size()));
  os.write(reinterpret_cast<const char*>(values.data()),
           std::streamsize(values.size() * sizeof(double)));
  if (!os) throw std::runtime_error("binary path: write failed");
}

BinaryPath read_path_binary(std::istream& is) {
  char magic[4];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kPathMagic, sizeof magic) != 0)
    throw std::runtime_error("binary path: bad magic");
  std::uint16_t version;
  read_raw(is, &version);
  if (version != kPathFormatVersion)
    throw std::runtime_error("binary path: unsupported version");
  BinaryPath path{0.0, {}};
  read_raw(is, &path.hurst);
  std::uint64_t m;
  read_raw(is, &m);
  if (m > (std::uint64_t(1) << 31))
    throw std::runtime_error("binary path: implausible length");
  path.values.resize(std::size_t(m));
  is.read(reinterpret_cast<char*>(path.values.data()),
          std::streamsize(m * sizeof(double)));
  if (!is) throw std::runtime_error("binary path: truncated values");
  return path;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << content;
  if (!os) throw std::runtime_error("failed writing " + path);
}

}  // namespace fbmbt
