#pragma once

// Matrix Market I/O for dense complex operators. Supported headers:
//   %%MatrixMarket matrix <array|coordinate> <real|complex> general
// Values are printed with 17 significant digits so that write/read
// round-trips reproduce every double bit-exactly.

#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gmrescert/operator.hpp"

namespace gmrescert {

namespace detail {

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline bool next_content_line(std::istream& in, std::string& line,
                              std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t i = 0;
    while (i < line.size() &&
           std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    if (i == line.size()) continue;  // blank
    if (line[i] == '%') continue;    // comment
    return true;
  }
  return false;
}

inline double parse_double(const std::string& tok, std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw ParseError(line_no, "expected a number, got '" + tok + "'");
  return v;
}

inline long parse_index(const std::string& tok, std::size_t line_no) {
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0')
    throw ParseError(line_no, "expected an integer, got '" + tok + "'");
  return v;
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

}  // namespace detail

inline Operator read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty file");
  ++line_no;

  auto header = detail::split_ws(line);
  if (header.size() < 5 || header[0] != "%%MatrixMarket" ||
      header[1] != "matrix")
    throw ParseError(line_no, "expected '%%MatrixMarket matrix ...' header");
  const std::string& layout = header[2];
  const std::string& field = header[3];
  const std::string& symmetry = header[4];
  if (layout != "array" && layout != "coordinate")
    throw ParseError(line_no, "unsupported layout '" + layout + "'");
  if (field != "real" && field != "complex")
    throw ParseError(line_no, "unsupported field '" + field + "'");
  if (symmetry != "general")
    throw ParseError(line_no, "unsupported symmetry '" + symmetry + "'");
  const bool coordinate = layout == "coordinate";
  const bool complex_field = field == "complex";

  if (!detail::next_content_line(in, line, line_no))
    throw ParseError(line_no + 1, "missing size line");
  auto size_tok = detail::split_ws(line);
  if (size_tok.size() != (coordinate ? 3u : 2u))
    throw ParseError(line_no, "malformed size line");
  const long rows = detail::parse_index(size_tok[0], line_no);
  const long cols = detail::parse_index(size_tok[1], line_no);
  if (rows <= 0 || cols <= 0)
    throw ParseError(line_no, "matrix dimensions must be positive");
  if (rows != cols)
    throw NonSquare("matrix market: " + std::to_string(rows) + "x" +
                    std::to_string(cols) + " is not square");

  Matrix m = Matrix::Zero(rows, cols);
  if (coordinate) {
    const long nnz = detail::parse_index(size_tok[2], line_no);
    for (long e = 0; e < nnz; ++e) {
      if (!detail::next_content_line(in, line, line_no))
        throw ParseError(line_no + 1, "unexpected end of file in entries");
      auto tok = detail::split_ws(line);
      const std::size_t expect = complex_field ? 4u : 3u;
      if (tok.size() != expect)
        throw ParseError(line_no, "malformed coordinate entry");
      const long i = detail::parse_index(tok[0], line_no);
      const long j = detail::parse_index(tok[1], line_no);
      if (i < 1 || i > rows || j < 1 || j > cols)
        throw ParseError(line_no, "index out of range");
      const double re = detail::parse_double(tok[2], line_no);
      const double im =
          complex_field ? detail::parse_double(tok[3], line_no) : 0.0;
      m(i - 1, j - 1) += Complex(re, im);
    }
  } else {
    // Array layout stores entries column-major.
    for (long j = 0; j < cols; ++j) {
      for (long i = 0; i < rows; ++i) {
        if (!detail::next_content_line(in, line, line_no))
          throw ParseError(line_no + 1, "unexpected end of file in entries");
        auto tok = detail::split_ws(line);
        const std::size_t expect = complex_field ? 2u : 1u;
        if (tok.size() != expect)
          throw ParseError(line_no, "malformed array entry");
        const double re = detail::parse_double(tok[0], line_no);
        const double im =
            complex_field ? detail::parse_double(tok[1], line_no) : 0.0;
        m(i, j) = Complex(re, im);
      }
    }
  }
  return Operator::with_detected_tags(std::move(m));
}

inline Operator read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  return read_matrix_market(in);
}

inline void write_matrix_market(const Operator& op, std::ostream& out) {
  const Eigen::Index n = op.dim();
  Eigen::Index nnz = 0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (op.entries()(i, j) != Complex(0, 0)) ++nnz;

  // Mostly-zero matrices (diagonal families, sparse stencils) go out in
  // coordinate layout, everything else as a dense array.
  if (2 * nnz <= n * n) {
    out << "%%MatrixMarket matrix coordinate complex general\n";
    out << n << " " << n << " " << nnz << "\n";
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) {
        const Complex v = op.entries()(i, j);
        if (v == Complex(0, 0)) continue;
        out << (i + 1) << " " << (j + 1) << " "
            << detail::format_g17(v.real()) << " "
            << detail::format_g17(v.imag()) << "\n";
      }
  } else {
    out << "%%MatrixMarket matrix array complex general\n";
    out << n << " " << n << "\n";
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) {
        const Complex v = op.entries()(i, j);
        out << detail::format_g17(v.real()) << " "
            << detail::format_g17(v.imag()) << "\n";
      }
  }
}

inline void write_matrix_market(const Operator& op, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open '" + path + "' for write");
  write_matrix_market(op, out);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

/// Column vector in Matrix Market array layout (n x 1).
inline Vector read_vector_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty file");
  ++line_no;
  auto header = detail::split_ws(line);
  if (header.size() < 5 || header[0] != "%%MatrixMarket" ||
      header[1] != "matrix" || header[2] != "array")
    throw ParseError(line_no, "expected an array-layout header");
  const std::string& field = header[3];
  if (field != "real" && field != "complex")
    throw ParseError(line_no, "unsupported field '" + field + "'");
  const bool complex_field = field == "complex";
  if (!detail::next_content_line(in, line, line_no))
    throw ParseError(line_no + 1, "missing size line");
  auto size_tok = detail::split_ws(line);
  if (size_tok.size() != 2)
    throw ParseError(line_no, "malformed size line");
  const long rows = detail::parse_index(size_tok[0], line_no);
  const long cols = detail::parse_index(size_tok[1], line_no);
  if (rows <= 0 || cols != 1)
    throw ParseError(line_no, "expected an n x 1 vector");
  Vector v(rows);
  for (long i = 0; i < rows; ++i) {
    if (!detail::next_content_line(in, line, line_no))
      throw ParseError(line_no + 1, "unexpected end of file in entries");
    auto tok = detail::split_ws(line);
    if (tok.size() != (complex_field ? 2u : 1u))
      throw ParseError(line_no, "malformed vector entry");
    const double re = detail::parse_double(tok[0], line_no);
    const double im =
        complex_field ? detail::parse_double(tok[1], line_no) : 0.0;
    v[i] = Complex(re, im);
  }
  return v;
}

inline void write_vector_market(const Vector& v, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open '" + path + "' for write");
  out << "%%MatrixMarket matrix array complex general\n";
  out << v.size() << " 1\n";
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out << detail::format_g17(v[i].real()) << " "
        << detail::format_g17(v[i].imag()) << "\n";
}

}  // namespace gmrescert
