#include "qhist/kernels.hpp"

#include <vector>

namespace qhist::kernels {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

inline Complex csr_row_dot(const CsrView& a, long row, const Complex* x) {
  Complex acc{0.0, 0.0};
  for (long k = a.row_ptr[row]; k < a.row_ptr[row + 1]; ++k) {
    acc += a.vals[k] * x[a.cols[k]];
  }
  return acc;
}

inline double column_sq(const CMatrix& m, Eigen::Index j) {
  std::vector<double> parts(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) parts[i] = std::norm(m(i, j));
  return pairwise_sum(parts);
}

}  // namespace

namespace serial {

void csr_matvec(const CsrView& a, const Complex* x, Complex* y) {
  for (long row = 0; row < a.rows; ++row) y[row] = csr_row_dot(a, row, x);
}

void csr_matmat(const CsrView& a, const CMatrix& x, CMatrix& y) {
  y.resize(a.rows, x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    csr_matvec(a, x.col(j).data(), y.col(j).data());
  }
}

RVector column_norms_sq(const CMatrix& m) {
  RVector out(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) out(j) = column_sq(m, j);
  return out;
}

}  // namespace serial

namespace parallel {

void csr_matvec(const CsrView& a, const Complex* x, Complex* y) {
#pragma omp parallel for schedule(static) if (a.rows > 4096)
  for (long row = 0; row < a.rows; ++row) y[row] = csr_row_dot(a, row, x);
}

void csr_matmat(const CsrView& a, const CMatrix& x, CMatrix& y) {
  y.resize(a.rows, x.cols());
  const long cols = static_cast<long>(x.cols());
#pragma omp parallel for schedule(dynamic) if (cols > 1)
  for (long j = 0; j < cols; ++j) {
    serial::csr_matvec(a, x.col(j).data(), y.col(j).data());
  }
}

RVector column_norms_sq(const CMatrix& m) {
  RVector out(m.cols());
  const long cols = static_cast<long>(m.cols());
#pragma omp parallel for schedule(static) if (cols > 8)
  for (long j = 0; j < cols; ++j) out(j) = column_sq(m, j);
  return out;
}

}  // namespace parallel

double frobenius_sq(const CMatrix& m) {
  const RVector cols = parallel::column_norms_sq(m);
  return pairwise_sum(std::span<const double>(cols.data(), static_cast<std::size_t>(cols.size())));
}

}  // namespace qhist::kernels
