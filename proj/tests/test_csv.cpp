#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "rrc/csv.hpp"
#include "rrc/rng.hpp"

using namespace rrc;

namespace {

class TempFile {
 public:
  explicit TempFile(const std::string& contents) {
    static int counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             ("rrc_csv_test_" + std::to_string(::getpid()) + "_" +
              std::to_string(counter++) + ".csv"))
                .string();
    std::ofstream out(path_, std::ios::binary);
    out << contents;
  }
  ~TempFile() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace

TEST_CASE("numeric csv: plain, header, and error location") {
  TempFile plain("1,2\n3,4\n");
  const Matrixd m = read_design_csv(plain.path());
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 2);
  CHECK(m(0, 0) == 1.0);
  CHECK(m(1, 1) == 4.0);

  TempFile with_header("a,b\n1,2\n");
  const Matrixd h = read_design_csv(with_header.path());
  CHECK(h.rows() == 1);
  CHECK(h.cols() == 2);

  TempFile bad("1,x\n");
  try {
    read_design_csv(bad.path());
    FAIL("expected parse_error");
  } catch (const parse_error& err) {
    CHECK(err.row() == 1);
    CHECK(err.col() == 2);
  }

  TempFile ragged("1,2\n3\n");
  CHECK_THROWS_AS(read_design_csv(ragged.path()), parse_error);

  TempFile empty("");
  CHECK_THROWS_AS(read_design_csv(empty.path()), parse_error);

  TempFile infinite("1,inf\n");
  CHECK_THROWS_AS(read_design_csv(infinite.path()), parse_error);
}

TEST_CASE("response csv codings") {
  SUBCASE("native with a missing token") {
    TempFile file("1,-1\nNA,1\n");
    const ResponseMatrix resp = read_response_csv(file.path());
    CHECK(resp.rows() == 2);
    CHECK(resp.cols() == 2);
    CHECK(resp.mask.count() == 3);
    CHECK_FALSE(resp.mask.observed(1, 0));
    CHECK(int(resp.labels(0, 0)) == 1);
    CHECK(int(resp.labels(0, 1)) == -1);
  }

  SUBCASE("count data binarized at a zero threshold") {
    TempFile file("0,5\n2,0\n");
    ResponseCoding coding;
    coding.rule = ResponseCoding::Rule::Threshold;
    coding.threshold = 0.0;
    const ResponseMatrix resp = read_response_csv(file.path(), coding);
    CHECK(int(resp.labels(0, 0)) == -1);
    CHECK(int(resp.labels(0, 1)) == 1);
    CHECK(int(resp.labels(1, 0)) == 1);
    CHECK(int(resp.labels(1, 1)) == -1);
    CHECK(resp.mask.is_full());
  }

  SUBCASE("native coding rejects other numbers with a location") {
    TempFile file("2,1\n");
    try {
      read_response_csv(file.path());
      FAIL("expected parse_error");
    } catch (const parse_error& err) {
      CHECK(err.row() == 1);
      CHECK(err.col() == 1);
    }
  }

  SUBCASE("zero-one coding maps to signs") {
    TempFile file("0,1\n1,0\n");
    ResponseCoding coding;
    coding.rule = ResponseCoding::Rule::ZeroOne;
    const ResponseMatrix resp = read_response_csv(file.path(), coding);
    CHECK(int(resp.labels(0, 0)) == -1);
    CHECK(int(resp.labels(0, 1)) == 1);
  }

  SUBCASE("empty cells are missing") {
    TempFile file("1,\n-1,1\n");
    const ResponseMatrix resp = read_response_csv(file.path());
    CHECK(resp.mask.count() == 3);
    CHECK_FALSE(resp.mask.observed(0, 1));
  }

  SUBCASE("all-missing file is rejected") {
    TempFile file("NA,NA\n");
    CHECK_THROWS_AS(read_response_csv(file.path()), parse_error);
  }
}

TEST_CASE("matrix round-trip is lossless at 17 significant digits") {
  auto rng = make_rng(4242);
  Matrixd original = gaussian_matrix(8, 5, rng);
  original(0, 0) = 0.1;
  original(0, 1) = -1e-300;
  original(0, 2) = 1e300;
  original(0, 3) = 1.0 / 3.0;
  original(0, 4) = -0.0;

  const std::string path =
      (std::filesystem::temp_directory_path() / "rrc_roundtrip.csv").string();
  write_matrix_csv(path, original);
  const Matrixd back = read_coefficients_csv(path);
  std::remove(path.c_str());

  REQUIRE(back.rows() == original.rows());
  REQUIRE(back.cols() == original.cols());
  for (Index i = 0; i < original.rows(); ++i)
    for (Index j = 0; j < original.cols(); ++j)
      CHECK(back(i, j) == original(i, j));
}

TEST_CASE("doubles print locale-free with a dot separator") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-2.0) == "-2");
  const std::string text = format_double(1.0 / 3.0);
  CHECK(text.find(',') == std::string::npos);
  CHECK(text.find('.') != std::string::npos);
}
