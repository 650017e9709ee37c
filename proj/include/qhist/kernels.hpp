#pragma once

#include <span>

#include "qhist/types.hpp"

// Data-parallel inner loops. Every kernel has a serial reference version
// used by the tests and the benchmark, and an OpenMP version used by the
// library. Both produce bit-identical results: reductions are done per row
// or per column and combined by pairwise summation in a fixed order.
namespace qhist::kernels {

struct CsrView {
  long rows = 0;
  std::span<const long> row_ptr;
  std::span<const int> cols;
  std::span<const Complex> vals;
};

double pairwise_sum(std::span<const double> values);

namespace serial {

void csr_matvec(const CsrView& a, const Complex* x, Complex* y);
void csr_matmat(const CsrView& a, const CMatrix& x, CMatrix& y);
// Squared 2-norm of every column.
RVector column_norms_sq(const CMatrix& m);

}  // namespace serial

namespace parallel {

void csr_matvec(const CsrView& a, const Complex* x, Complex* y);
void csr_matmat(const CsrView& a, const CMatrix& x, CMatrix& y);
RVector column_norms_sq(const CMatrix& m);

}  // namespace parallel

// Frobenius norm squared, reduced column-wise then pairwise.
double frobenius_sq(const CMatrix& m);

}  // namespace qhist::kernels
