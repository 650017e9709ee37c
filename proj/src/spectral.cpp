#include "qhist/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

#include <lapacke.h>

namespace qhist {

double Spectrum::orthonormality_defect() const {
  const CMatrix gram = eigenvectors.adjoint() * eigenvectors;
  return (gram - CMatrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
}

double Spectrum::reconstruction_error(const LinearOperator& a) const {
  const CMatrix dense = a.to_dense();
  const CMatrix rebuilt = eigenvectors * eigenvalues.cast<Complex>().asDiagonal() *
                          eigenvectors.adjoint();
  const double scale = std::max(dense.norm(), 1e-300);
  return (rebuilt - dense).norm() / scale;
}

void Spectrum::write_csv(std::ostream& out) const {
  const auto old = out.precision(17);
  out << "index,eigenvalue,x\n";
  for (long i = 0; i < dim(); ++i) {
    out << i << ',' << eigenvalues(i) << ',';
    if (!x_labels.empty()) out << x_labels[static_cast<std::size_t>(i)];
    out << '\n';
  }
  out.precision(old);
}

void hermitian_eigensystem(const CMatrix& a, RVector& values, CMatrix& vectors) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  values.resize(n);
  if (n == 0) {
    vectors.resize(0, 0);
    return;
  }
  if (a.imag().isZero(0.0)) {
    RMatrix work = a.real();
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, work.data(), n, values.data());
    if (info != 0) fail(ErrorKind::NonConvergence, "dsyevd failed, info = " + std::to_string(info));
    vectors = work.cast<Complex>();
  } else {
    vectors = a;
    const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n,
                                           reinterpret_cast<lapack_complex_double*>(vectors.data()),
                                           n, values.data());
    if (info != 0) fail(ErrorKind::NonConvergence, "zheevd failed, info = " + std::to_string(info));
  }
}

Spectrum diagonalize(const LinearOperator& h) {
  if (h.tag() == OperatorTag::General) {
    fail(ErrorKind::InvalidInput, "diagonalize requires a Hermitian-tagged operator");
  }
  const long limit = dense_dimension_limit();
  if (h.dim() > limit) {
    fail(ErrorKind::ResourceLimit, "dimension " + std::to_string(h.dim()) +
                                       " exceeds the dense threshold " + std::to_string(limit) +
                                       "; use Krylov propagation");
  }
  Spectrum s;
  hermitian_eigensystem(h.to_dense(), s.eigenvalues, s.eigenvectors);
  return s;
}

std::vector<SpectralBlock> block_diagonalize(const LinearOperator& h, const LinearOperator& x) {
  if (x.kind() != LinearOperator::Kind::Diagonal) {
    fail(ErrorKind::InvalidInput, "block_diagonalize requires a diagonal X");
  }
  if (h.dim() != x.dim()) fail(ErrorKind::InvalidInput, "H and X dimensions differ");
  const CVector& xd = x.diagonal_values();
  std::map<double, std::vector<long>> groups;
  for (long r = 0; r < x.dim(); ++r) groups[xd(r).real()].push_back(r);

  std::vector<long> block_of(static_cast<std::size_t>(x.dim()));
  std::vector<long> pos_in_block(static_cast<std::size_t>(x.dim()));
  std::vector<SpectralBlock> blocks;
  // Descending x so that block order already encodes the tie-break rule.
  for (auto it = groups.rbegin(); it != groups.rend(); ++it) {
    SpectralBlock b;
    b.x = it->first;
    b.rows = it->second;
    for (std::size_t k = 0; k < b.rows.size(); ++k) {
      block_of[static_cast<std::size_t>(b.rows[k])] = static_cast<long>(blocks.size());
      pos_in_block[static_cast<std::size_t>(b.rows[k])] = static_cast<long>(k);
    }
    blocks.push_back(std::move(b));
  }

  const long limit = dense_dimension_limit();
  for (const SpectralBlock& b : blocks) {
    if (static_cast<long>(b.rows.size()) > limit) {
      fail(ErrorKind::ResourceLimit, "X block of dimension " + std::to_string(b.rows.size()) +
                                         " exceeds the dense threshold " + std::to_string(limit));
    }
  }
  std::vector<CMatrix> sub(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto m = static_cast<Eigen::Index>(blocks[b].rows.size());
    sub[b] = CMatrix::Zero(m, m);
  }
  const auto insert = [&](long r, long c, Complex v) {
    const long br = block_of[static_cast<std::size_t>(r)];
    if (br != block_of[static_cast<std::size_t>(c)]) {
      if (std::abs(v) > 1e-12) {
        fail(ErrorKind::ConstructionFault, "operator couples different X eigenvalues");
      }
      return;
    }
    sub[static_cast<std::size_t>(br)](pos_in_block[static_cast<std::size_t>(r)],
                                      pos_in_block[static_cast<std::size_t>(c)]) += v;
  };
  if (h.kind() == LinearOperator::Kind::Sparse) {
    const CsrMatrix& a = h.csr();
    for (long r = 0; r < a.dim; ++r) {
      for (long k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) insert(r, a.cols[k], a.vals[k]);
    }
  } else {
    const CMatrix a = h.to_dense();
    for (long c = 0; c < a.cols(); ++c) {
      for (long r = 0; r < a.rows(); ++r) {
        if (a(r, c) != Complex{0.0, 0.0}) insert(r, c, a(r, c));
      }
    }
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    hermitian_eigensystem(sub[b], blocks[b].eigenvalues, blocks[b].eigenvectors);
  }
  return blocks;
}

Spectrum diagonalize_blocked(const LinearOperator& h, const LinearOperator& x) {
  const std::vector<SpectralBlock> blocks = block_diagonalize(h, x);
  struct Entry {
    double e;
    std::size_t block;
    long col;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(h.dim()));
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (long k = 0; k < blocks[b].eigenvalues.size(); ++k) {
      entries.push_back({blocks[b].eigenvalues(k), b, k});
    }
  }
  // Exact ascending sort, then clusters of near-equal energies are
  // reordered by block index (blocks are in descending x).
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.e < b.e; });
  for (std::size_t start = 0; start < entries.size();) {
    std::size_t end = start + 1;
    while (end < entries.size() && entries[end].e - entries[end - 1].e <= 1e-12) ++end;
    std::stable_sort(entries.begin() + static_cast<long>(start), entries.begin() + static_cast<long>(end),
                     [](const Entry& a, const Entry& b) { return a.block < b.block; });
    start = end;
  }

  Spectrum s;
  const long d = h.dim();
  s.eigenvalues.resize(d);
  s.eigenvectors = CMatrix::Zero(d, d);
  s.x_labels.resize(static_cast<std::size_t>(d));
  for (long i = 0; i < d; ++i) {
    const Entry& e = entries[static_cast<std::size_t>(i)];
    const SpectralBlock& b = blocks[e.block];
    s.eigenvalues(i) = e.e;
    s.x_labels[static_cast<std::size_t>(i)] = b.x;
    for (std::size_t k = 0; k < b.rows.size(); ++k) {
      s.eigenvectors(b.rows[k], i) = b.eigenvectors(static_cast<long>(k), e.col);
    }
  }
  return s;
}

LinearOperator energy_window_projector(const Spectrum& spec0, const EnergyWindow& window) {
  std::vector<long> inside;
  for (long i = 0; i < spec0.dim(); ++i) {
    if (window.contains(spec0.eigenvalues(i))) inside.push_back(i);
  }
  if (inside.empty()) {
    fail(ErrorKind::InvalidInput,
         "energy window [" + std::to_string(window.e_min) + ", " + std::to_string(window.e_max) +
             "] contains 0 of " + std::to_string(spec0.dim()) + " eigenvalues");
  }
  CMatrix basis(spec0.dim(), static_cast<long>(inside.size()));
  for (std::size_t k = 0; k < inside.size(); ++k) {
    basis.col(static_cast<long>(k)) = spec0.eigenvectors.col(inside[k]);
  }
  return LinearOperator::dense(basis * basis.adjoint(), OperatorTag::Projector);
}

}  // namespace qhist
