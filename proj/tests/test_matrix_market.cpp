#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include "gmrescert/matrix_market.hpp"
#include "gmrescert/rng.hpp"

using namespace gmrescert;

namespace {

std::string to_string(const Operator& op) {
  std::ostringstream out;
  write_matrix_market(op, out);
  return out.str();
}

Operator from_string(const std::string& text) {
  std::istringstream in(text);
  return read_matrix_market(in);
}

}  // namespace

TEST_CASE("round trip reproduces entries bit-exactly") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1;
  d(1, 1) = 2;
  const Operator diag(d);
  const Operator back = from_string(to_string(diag));
  REQUIRE(back.entries() == diag.entries());
  REQUIRE(back.is(Tag::Diagonal));

  Rng rng(99);
  const Operator dense(rng.cnormal_matrix(7, 7));
  const Operator dense_back = from_string(to_string(dense));
  REQUIRE(dense_back.entries() == dense.entries());

  // Serialization itself is deterministic.
  REQUIRE(to_string(dense) == to_string(dense));
}

TEST_CASE("coordinate layout fills unlisted entries with zero") {
  const std::string text =
      "%%MatrixMarket matrix coordinate complex general\n"
      "% a comment\n"
      "2 2 1\n"
      "1 1 2 3\n";
  const Operator op = from_string(text);
  REQUIRE(op.entries()(0, 0) == Complex(2, 3));
  REQUIRE(op.entries()(0, 1) == Complex(0, 0));
  REQUIRE(op.entries()(1, 0) == Complex(0, 0));
  REQUIRE(op.entries()(1, 1) == Complex(0, 0));
}

TEST_CASE("real field reads with zero imaginary parts") {
  const std::string text =
      "%%MatrixMarket matrix array real general\n"
      "2 2\n"
      "1.5\n"
      "0\n"
      "0\n"
      "-2.25\n";
  const Operator op = from_string(text);
  REQUIRE(op.entries()(0, 0) == Complex(1.5, 0));
  REQUIRE(op.entries()(1, 1) == Complex(-2.25, 0));
}

TEST_CASE("parse errors carry line numbers") {
  REQUIRE_THROWS_AS(from_string("junk\n1 1\n0 0\n"), ParseError);
  REQUIRE_THROWS_AS(
      from_string("%%MatrixMarket matrix array complex general\n2 3\n"),
      NonSquare);
  try {
    from_string(
        "%%MatrixMarket matrix array complex general\n2 2\n1 0\nbroken x\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE(e.line == 4);
  }
  REQUIRE_THROWS_AS(
      from_string("%%MatrixMarket matrix coordinate pattern general\n1 1 1\n"),
      ParseError);
  REQUIRE_THROWS_AS(
      from_string(
          "%%MatrixMarket matrix array complex symmetric\n2 2\n1 0\n"),
      ParseError);
}

TEST_CASE("file round trip and vector round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "gmrescert_mm_test";
  fs::create_directories(dir);

  Rng rng(123);
  const Operator op(rng.cnormal_matrix(5, 5));
  const std::string path = (dir / "m.mtx").string();
  write_matrix_market(op, path);
  REQUIRE(read_matrix_market(path).entries() == op.entries());

  const Vector v = rng.cnormal_vector(6);
  const std::string vpath = (dir / "v.mtx").string();
  write_vector_market(v, vpath);
  REQUIRE(read_vector_market(vpath) == v);
  fs::remove_all(dir);
}
