#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fbmbt/io.hpp"

using namespace fbmbt;

TEST_CASE("binary paths round trip bit-exactly") {
  const double hurst = 0.31;
  const std::vector<double> values{0.1, -0.0, 1e-308, 3.141592653589793,
                                   -123456.75};
  std::ostringstream os(std::ios::binary);
  write_path_binary(hurst, values, os);
  const std::string blob = os.str();
  CHECK(blob.size() == 22 + values.size() * 8);
  CHECK(blob.compare(0, 4, "FBMB") == 0);

  std::istringstream is(blob, std::ios::binary);
  const BinaryPath path = read_path_binary(is);
  CHECK(path.hurst == hurst);
  REQUIRE(path.values.size() == values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    CHECK(path.values[i] == values[i]);
    CHECK(std::signbit(path.values[i]) == std::signbit(values[i]));
  }
}

TEST_CASE("binary path corruption is detected") {
  std::ostringstream os(std::ios::binary);
  write_path_binary(0.5, std::vector<double>{1.0, 2.0, 3.0}, os);
  const std::string good = os.str();

  {
    std::string bad = good;
    bad[0] = 'X';
    std::istringstream is(bad, std::ios::binary);
    CHECK_THROWS_WITH_AS(read_path_binary(is), "binary path: bad magic",
                         std::runtime_error);
  }
  {
    std::string bad = good;
    bad[4] = 2;  // version
    std::istringstream is(bad, std::ios::binary);
    CHECK_THROWS_WITH_AS(read_path_binary(is),
                         "binary path: unsupported version",
                         std::runtime_error);
  }
  {
    std::string bad = good.substr(0, good.size() - 4);
    std::istringstream is(bad, std::ios::binary);
    CHECK_THROWS_WITH_AS(read_path_binary(is), "binary path: truncated values",
                         std::runtime_error);
  }
  {
    std::string bad = good.substr(0, 10);  // header cut mid-field
    std::istringstream is(bad, std::ios::binary);
    CHECK_THROWS_AS(read_path_binary(is), std::runtime_error);
  }
  {
    std::string bad = good;
    for (int b = 0; b < 8; ++b) bad[14 + b] = char(0xFF);  // absurd length
    std::istringstream is(bad, std::ios::binary);
    CHECK_THROWS_WITH_AS(read_path_binary(is),
                         "binary path: implausible length",
                         std::runtime_error);
  }
  {
    std::istringstream is(std::string{}, std::ios::binary);
    CHECK_THROWS_AS(read_path_binary(is), std::runtime_error);
  }
}

TEST_CASE("csv writers emit the documented schemas") {
  {
    std::ostringstream os;
    write_fgn_csv(FgnPath{Hurst(0.5), 0, {1.5, -0.25}}, os);
    CHECK(os.str() == "index,value\n1,1.5\n2,-0.25\n");
  }
  {
    std::ostringstream os;
    write_fbm_grid_csv(FbmGrid{Hurst(0.5), 0.5, -1, {0.5, 0.0, -2.0}}, os);
    CHECK(os.str() == "index,value\n-1,0.5\n0,0.0\n1,-2.0\n");
  }
  {
    std::ostringstream os;
    write_crossing_counts_csv(
        CrossingCounts{DyadicLevel{2}, 3, -1, {1, 2}, {0, 1}}, os);
    CHECK(os.str() == "j,U,D\n-1,1,0\n0,2,1\n");
  }
  {
    std::ostringstream os;
    write_local_time_csv(LocalTimeProfile{{-0.5, 0.0}, {0.25, 1.0}, 1.0}, os);
    CHECK(os.str() == "x,L\n-0.5,0.25\n0.0,1.0\n");
  }
}

TEST_CASE("text files are written atomically enough to read back") {
  const std::string path = "/tmp/fbmbt_io_test.txt";
  write_text_file(path, "line one\nline two\n");
  std::ifstream is(path, std::ios::binary);
  std::stringstream buffer;
  buffer << is.rdbuf();
  CHECK(buffer.str() == "line one\nline two\n");
  CHECK_THROWS_AS(write_text_file("/nonexistent_dir_fbmbt/file.txt", "x"),
                  std::runtime_error);
}
