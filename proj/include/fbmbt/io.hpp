#pragma once

// File formats for sampled paths and profiles.
//
// CSV schemas:
//   fGn / fBm grids:   index,value
//   crossing counts:   j,U,D
//   local time:        x,L
//
// Binary path format (little-endian):
//   bytes 0-3   magic "FBMB"
//   bytes 4-5   u16 version (= 1)
//   bytes 6-13  f64 hurst
//   bytes 14-21 u64 m
//   then m f64 values.

#include <iosfwd>
#include <string>

#include "fbmbt/dyadic.hpp"
#include "fbmbt/gaussian.hpp"

namespace fbmbt {

inline constexpr char kPathMagic[4] = {'F', 'B', 'M', 'B'};
inline constexpr std::uint16_t kPathFormatVersion = 1;

void write_fgn_csv(const FgnPath& path, std::ostream& os);       // index 1..m
void write_fbm_grid_csv(const FbmGrid& grid, std::ostream& os);  // index j
void write_crossing_counts_csv(const CrossingCounts& counts, std::ostream& os);
void write_local_time_csv(const LocalTimeProfile& profile, std::ostream& os);

void write_path_binary(double hurst, std::span<const double> values,
                       std::ostream& os);
struct BinaryPath {
  double hurst;
  std::vector<double> values;
};
BinaryPath read_path_binary(std::istream& is);  // validates magic and version

void write_text_file(const std::string& path, const std::string& content);

}  // namespace fbmbt
