#include "qhist/linear_operator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace qhist {

Complex CsrMatrix::at(long row, int col) const {
  const auto first = cols.begin() + row_ptr[row];
  const auto last = cols.begin() + row_ptr[row + 1];
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return {0.0, 0.0};
  return vals[static_cast<std::size_t>(it - cols.begin())];
}

LinearOperator LinearOperator::sparse(CsrMatrix m, OperatorTag tag) {
  if (static_cast<long>(m.row_ptr.size()) != m.dim + 1) {
    fail(ErrorKind::InvalidInput, "sparse operator: row_ptr size must be dim + 1");
  }
  LinearOperator op(std::move(m), tag);
  op.validate_tag();
  return op;
}

LinearOperator LinearOperator::dense(CMatrix m, OperatorTag tag) {
  if (m.rows() != m.cols()) fail(ErrorKind::InvalidInput, "dense operator must be square");
  LinearOperator op(std::move(m), tag);
  op.validate_tag();
  return op;
}

LinearOperator LinearOperator::diagonal(CVector d, OperatorTag tag) {
  LinearOperator op(std::move(d), tag);
  op.validate_tag();
  return op;
}

void LinearOperator::validate_tag() const {
  if (tag_ == OperatorTag::General) return;
  const double herm = hermiticity_defect();
  if (!(herm < 1e-12)) {
    fail(ErrorKind::ConstructionFault,
         "operator tagged Hermitian has max|A - A^dag| = " + std::to_string(herm));
  }
  if (tag_ == OperatorTag::Projector) {
    const double idem = idempotency_defect();
    if (!(idem < 1e-10)) {
      fail(ErrorKind::ConstructionFault,
           "operator tagged projector has max|A^2 - A| = " + std::to_string(idem));
    }
  }
}

long LinearOperator::dim() const {
  return std::visit(
      [](const auto& rep) -> long {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, CsrMatrix>) {
          return rep.dim;
        } else if constexpr (std::is_same_v<T, CMatrix>) {
          return static_cast<long>(rep.rows());
        } else {
          return static_cast<long>(rep.size());
        }
      },
      rep_);
}

LinearOperator::Kind LinearOperator::kind() const {
  switch (rep_.index()) {
    case 0: return Kind::Sparse;
    case 1: return Kind::Dense;
    default: return Kind::Diagonal;
  }
}

bool LinearOperator::is_real() const {
  switch (kind()) {
    case Kind::Sparse:
      return std::all_of(csr().vals.begin(), csr().vals.end(),
                         [](const Complex& z) { return z.imag() == 0.0; });
    case Kind::Dense: return dense_matrix().imag().isZero(0.0);
    default: return diagonal_values().imag().isZero(0.0);
  }
}

const CsrMatrix& LinearOperator::csr() const { return std::get<CsrMatrix>(rep_); }
const CMatrix& LinearOperator::dense_matrix() const { return std::get<CMatrix>(rep_); }
const CVector& LinearOperator::diagonal_values() const { return std::get<CVector>(rep_); }

CVector LinearOperator::apply(const CVector& v) const {
  if (v.size() != dim()) fail(ErrorKind::InvalidInput, "operator/vector dimension mismatch");
  switch (kind()) {
    case Kind::Sparse: {
      CVector out(v.size());
      kernels::parallel::csr_matvec(csr().view(), v.data(), out.data());
      return out;
    }
    case Kind::Dense: return dense_matrix() * v;
    default: return diagonal_values().cwiseProduct(v);
  }
}

CMatrix LinearOperator::apply(const CMatrix& m) const {
  if (m.rows() != dim()) fail(ErrorKind::InvalidInput, "operator/matrix dimension mismatch");
  switch (kind()) {
    case Kind::Sparse: {
      CMatrix out;
      kernels::parallel::csr_matmat(csr().view(), m, out);
      return out;
    }
    case Kind::Dense: return dense_matrix() * m;
    default: return diagonal_values().asDiagonal() * m;
  }
}

CMatrix LinearOperator::to_dense() const {
  switch (kind()) {
    case Kind::Sparse: {
      const CsrMatrix& a = csr();
      CMatrix out = CMatrix::Zero(a.dim, a.dim);
      for (long r = 0; r < a.dim; ++r) {
        for (long k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) out(r, a.cols[k]) += a.vals[k];
      }
      return out;
    }
    case Kind::Dense: return dense_matrix();
    default: return diagonal_values().asDiagonal();
  }
}

double LinearOperator::hermiticity_defect() const {
  switch (kind()) {
    case Kind::Sparse: {
      const CsrMatrix& a = csr();
      double worst = 0.0;
      for (long r = 0; r < a.dim; ++r) {
        for (long k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
          const Complex mirror = a.at(a.cols[k], static_cast<int>(r));
          worst = std::max(worst, std::abs(a.vals[k] - std::conj(mirror)));
        }
      }
      return worst;
    }
    case Kind::Dense: {
      const CMatrix& a = dense_matrix();
      return (a - a.adjoint()).cwiseAbs().maxCoeff();
    }
    default: return diagonal_values().imag().cwiseAbs().maxCoeff();
  }
}

double LinearOperator::idempotency_defect() const {
  if (kind() == Kind::Diagonal) {
    const CVector& d = diagonal_values();
    return (d.cwiseProduct(d) - d).cwiseAbs().maxCoeff();
  }
  const CMatrix a = to_dense();
  return (a * a - a).cwiseAbs().maxCoeff();
}

void LinearOperator::write_triplets(std::ostream& out) const {
  const auto line = [&out](long r, long c, Complex z) {
    out << r << ' ' << c << ' ' << z.real() << ' ' << z.imag() << '\n';
  };
  const auto old_precision = out.precision(17);
  switch (kind()) {
    case Kind::Sparse: {
      const CsrMatrix& a = csr();
      for (long r = 0; r < a.dim; ++r) {
        for (long k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) line(r, a.cols[k], a.vals[k]);
      }
      break;
    }
    case Kind::Dense: {
      const CMatrix& a = dense_matrix();
      for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
          if (a(r, c) != Complex{0.0, 0.0}) line(r, c, a(r, c));
        }
      }
      break;
    }
    case Kind::Diagonal: {
      const CVector& d = diagonal_values();
      for (Eigen::Index r = 0; r < d.size(); ++r) {
        if (d(r) != Complex{0.0, 0.0}) line(r, r, d(r));
      }
      break;
    }
  }
  out.precision(old_precision);
}

double commutator_max_norm(const LinearOperator& a, const LinearOperator& b) {
  const CMatrix da = a.to_dense();
  const CMatrix db = b.to_dense();
  return (da * db - db * da).cwiseAbs().maxCoeff();
}

}  // namespace qhist
