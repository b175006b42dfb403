#include "pnorm/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "pnorm/errors.hpp"

namespace pnorm {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols,
                           std::vector<Triplet> entries)
    : rows_(rows), cols_(cols) {
  for (const auto& t : entries) {
    if (t.row >= rows || t.col >= cols) {
      throw Error(ErrorCode::DimensionMismatch,
                  "entry (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                      ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (!std::isfinite(t.value)) {
      throw Error(ErrorCode::NonFinite, "non-finite matrix entry");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ptr_.assign(rows + 1, 0);
  for (std::size_t i = 0; i < entries.size();) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < entries.size() && entries[j].row == entries[i].row &&
           entries[j].col == entries[i].col) {
      sum += entries[j].value;
      ++j;
    }
    col_index_.push_back(entries[i].col);
    values_.push_back(sum);
    ++row_ptr_[entries[i].row + 1];
    i = j;
  }
  for (std::size_t r = 0; r < rows; ++r) row_ptr_[r + 1] += row_ptr_[r];
}

SparseMatrix SparseMatrix::from_dense(std::size_t rows, std::size_t cols,
                                      std::span<const double> row_major) {
  if (row_major.size() != rows * cols) {
    throw Error(ErrorCode::DimensionMismatch, "dense data size mismatch");
  }
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (row_major[i * cols + j] != 0.0) t.push_back({i, j, row_major[i * cols + j]});
  return SparseMatrix(rows, cols, std::move(t));
}

std::vector<Triplet> SparseMatrix::entries() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      out.push_back({r, col_index_[k], values_[k]});
  return out;
}

Vector SparseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != cols_) throw Error(ErrorCode::DimensionMismatch, "multiply: x size");
  Vector y(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += values_[k] * x[col_index_[k]];
    y[r] = s;
  }
  return y;
}

Vector SparseMatrix::multiply_transpose(std::span<const double> x) const {
  if (x.size() != rows_) throw Error(ErrorCode::DimensionMismatch, "multiply_transpose: x size");
  Vector y(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) y[col_index_[k]] += values_[k] * x[r];
  return y;
}

SparseMatrix SparseMatrix::select_rows(std::span<const std::size_t> keep) const {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const std::size_t r = keep[i];
    if (r >= rows_) throw Error(ErrorCode::DimensionMismatch, "select_rows: index");
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      t.push_back({i, col_index_[k], values_[k]});
  }
  return SparseMatrix(keep.size(), cols_, std::move(t));
}

SparseMatrix SparseMatrix::scale_columns(std::span<const double> scale) const {
  if (scale.size() != cols_) throw Error(ErrorCode::DimensionMismatch, "scale_columns");
  auto t = entries();
  for (auto& e : t) e.value *= scale[e.col];
  return SparseMatrix(rows_, cols_, std::move(t));
}

SparseMatrix SparseMatrix::append_row(std::span<const double> dense_row) const {
  if (dense_row.size() != cols_) throw Error(ErrorCode::DimensionMismatch, "append_row");
  auto t = entries();
  for (std::size_t j = 0; j < cols_; ++j)
    if (dense_row[j] != 0.0) t.push_back({rows_, j, dense_row[j]});
  return SparseMatrix(rows_ + 1, cols_, std::move(t));
}

std::vector<double> SparseMatrix::to_dense_row_major() const {
  std::vector<double> d(rows_ * cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) d[r * cols_ + col_index_[k]] = values_[k];
  return d;
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) parse_fail(1, "missing MatrixMarket banner");
  ++lineno;
  std::istringstream banner(lower(line));
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%matrixmarket" || object != "matrix" || format != "coordinate") {
    parse_fail(lineno, "expected '%%MatrixMarket matrix coordinate ...'");
  }
  if (field != "real" && field != "integer" && field != "pattern") {
    parse_fail(lineno, "unsupported field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric") {
    parse_fail(lineno, "unsupported symmetry '" + symmetry + "'");
  }
  const bool pattern = field == "pattern";
  const bool symmetric = symmetry == "symmetric";

  std::size_t rows = 0, cols = 0, count = 0;
  bool have_size = false;
  std::size_t seen = 0;
  std::vector<Triplet> t;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    if (!have_size) {
      if (!(ls >> rows >> cols >> count)) parse_fail(lineno, "malformed size line");
      have_size = true;
      t.reserve(count);
      continue;
    }
    long long i = 0, j = 0;
    double v = 1.0;
    if (!(ls >> i >> j)) parse_fail(lineno, "malformed entry");
    if (!pattern && !(ls >> v)) parse_fail(lineno, "missing value");
    std::string extra;
    if (ls >> extra) parse_fail(lineno, "trailing data '" + extra + "'");
    if (i < 1 || j < 1 || static_cast<std::size_t>(i) > rows || static_cast<std::size_t>(j) > cols) {
      parse_fail(lineno, "index out of range");
    }
    if (!std::isfinite(v)) parse_fail(lineno, "non-finite value");
    ++seen;
    t.push_back({static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1), v});
    if (symmetric && i != j) {
      t.push_back({static_cast<std::size_t>(j - 1), static_cast<std::size_t>(i - 1), v});
    }
  }
  if (!have_size) parse_fail(lineno, "missing size line");
  if (seen != count) {
    parse_fail(lineno, "expected " + std::to_string(count) + " entries, found " + std::to_string(seen));
  }
  return SparseMatrix(rows, cols, std::move(t));
}

SparseMatrix read_matrix_market_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const SparseMatrix& m) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& e : m.entries()) out << e.row + 1 << ' ' << e.col + 1 << ' ' << e.value << '\n';
}

Vector read_vector(std::istream& in) {
  Vector v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%' || line[first] == '#') continue;
    std::istringstream ls(line);
    double x = 0.0;
    if (!(ls >> x)) parse_fail(lineno, "expected a number");
    std::string extra;
    if (ls >> extra) parse_fail(lineno, "trailing data '" + extra + "'");
    if (!std::isfinite(x)) parse_fail(lineno, "non-finite value");
    v.push_back(x);
  }
  return v;
}

Vector read_vector_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  return read_vector(in);
}

void write_vector(std::ostream& out, std::span<const double> v) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (double x : v) out << x << '\n';
}

}  // namespace pnorm
