#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace pnorm {

using Vector = std::vector<double>;

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

// Compressed-row view used by the kernels. Does not own its storage.
struct CsrView {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<const std::size_t> row_ptr;
  std::span<const std::size_t> col_index;
  std::span<const double> values;
};

// Sparse matrix built from (row, col, value) triplets. Construction
// canonicalizes: entries are sorted row-major and duplicates are summed.
// Indices must be in range and values finite.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);

  static SparseMatrix from_dense(std::size_t rows, std::size_t cols,
                                 std::span<const double> row_major);
  static SparseMatrix empty(std::size_t cols) { return SparseMatrix(0, cols, {}); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::vector<Triplet> entries() const;
  CsrView view() const noexcept {
    return {rows_, cols_, row_ptr_, col_index_, values_};
  }

  // y = M x
  Vector multiply(std::span<const double> x) const;
  // y = M^T x
  Vector multiply_transpose(std::span<const double> x) const;

  SparseMatrix select_rows(std::span<const std::size_t> keep) const;
  // Returns M * diag(scale).
  SparseMatrix scale_columns(std::span<const double> scale) const;
  SparseMatrix append_row(std::span<const double> dense_row) const;
  std::vector<double> to_dense_row_major() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_index_;
  std::vector<double> values_;
};

// Matrix Market coordinate format ("%%MatrixMarket matrix coordinate real
// general"). Symmetric files are expanded on read.
SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market_file(const std::string& path);
void write_matrix_market(std::ostream& out, const SparseMatrix& m);

// Dense vectors: one value per line, blank lines and '%'/'#' comments skipped.
Vector read_vector(std::istream& in);
Vector read_vector_file(const std::string& path);
void write_vector(std::ostream& out, std::span<const double> v);

}  // namespace pnorm
