#pragma once

#include <iosfwd>
#include <variant>
#include <vector>

#include "qhist/kernels.hpp"
#include "qhist/types.hpp"

namespace qhist {

// Row-compressed complex matrix with sorted column indices per row.
struct CsrMatrix {
  long dim = 0;
  std::vector<long> row_ptr;
  std::vector<int> cols;
  std::vector<Complex> vals;

  kernels::CsrView view() const {
    return {dim, row_ptr, cols, vals};
  }
  long nonzeros() const { return static_cast<long>(vals.size()); }
  // Entry (row, col), zero if not stored.
  Complex at(long row, int col) const;
};

enum class OperatorTag { General, Hermitian, Projector };

class LinearOperator {
 public:
  enum class Kind { Sparse, Dense, Diagonal };

  // Tagged factories validate the tag: Hermitian requires max|A - A^dag| < 1e-12,
  // Projector additionally max|A^2 - A| < 1e-10.
  static LinearOperator sparse(CsrMatrix m, OperatorTag tag = OperatorTag::General);
  static LinearOperator dense(CMatrix m, OperatorTag tag = OperatorTag::General);
  static LinearOperator diagonal(CVector d, OperatorTag tag = OperatorTag::General);

  long dim() const;
  Kind kind() const;
  OperatorTag tag() const { return tag_; }
  bool is_real() const;

  CVector apply(const CVector& v) const;
  CMatrix apply(const CMatrix& m) const;
  CMatrix to_dense() const;

  const CsrMatrix& csr() const;
  const CMatrix& dense_matrix() const;
  const CVector& diagonal_values() const;

  double hermiticity_defect() const;
  double idempotency_defect() const;

  // One "row col re im" line per stored entry, 0-based indices.
  void write_triplets(std::ostream& out) const;

 private:
  LinearOperator(std::variant<CsrMatrix, CMatrix, CVector> rep, OperatorTag tag)
      : rep_(std::move(rep)), tag_(tag) {}
  void validate_tag() const;

  std::variant<CsrMatrix, CMatrix, CVector> rep_;
  OperatorTag tag_;
};

// max-entry norm of [A, B], computed densely.
double commutator_max_norm(const LinearOperator& a, const LinearOperator& b);

}  // namespace qhist
