#include "semiinfo/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

using namespace semiinfo;

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(-0.0), "0");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(std::stod(format_number(x)), x);
  }
}

TEST(MatrixCsv, HeaderAndByteRoundTrip) {
  const Matrix m{{1.0, -2.5}, {1e-300, 3.0 / 7.0}, {0.0, 12345678.9}};
  const std::string text = matrix_to_csv(m);
  EXPECT_EQ(text.rfind("# 3,2\n", 0), 0u);
  const Matrix back = matrix_from_csv(text);
  EXPECT_EQ(back, m);
  EXPECT_EQ(matrix_to_csv(back), text);
}

TEST(MatrixCsv, RandomRoundTrip) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  for (int k = 0; k < 20; ++k) {
    Matrix m(1 + rng() % 7, 1 + rng() % 5);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n01(rng) * std::exp(5.0 * n01(rng));
    const std::string text = matrix_to_csv(m);
    EXPECT_EQ(matrix_to_csv(matrix_from_csv(text)), text);
  }
}

TEST(MatrixCsv, RejectsMalformed) {
  EXPECT_ANY_THROW(matrix_from_csv("1,2\n3,4\n"));
  EXPECT_ANY_THROW(matrix_from_csv("# 2,2\n1,2\n3\n"));
  EXPECT_ANY_THROW(matrix_from_csv("# 1,2\n1,abc\n"));
  EXPECT_ANY_THROW(matrix_from_csv("# 2,1\n1\n"));
}

TEST(MatrixJson, RoundTrip) {
  const Matrix m{{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}};
  const auto j = matrix_to_json(m);
  EXPECT_EQ(j["rows"], 2);
  EXPECT_EQ(j["data"][1], 2.0);
  EXPECT_EQ(matrix_from_json(j), m);
}

TEST(AtomicWrite, ReplacesContent) {
  const auto dir = std::filesystem::temp_directory_path() / "semiinfo_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "file.txt";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  EXPECT_EQ(read_file(path), "second");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1u);
  std::filesystem::remove_all(dir);
}
