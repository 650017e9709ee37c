#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qhist/spectral.hpp"

namespace qhist {

namespace {

enum class MatvecMode { Serial, Parallel };

void matvec(const LinearOperator& h, const CVector& x, CVector& y, MatvecMode mode) {
  if (h.kind() == LinearOperator::Kind::Sparse) {
    y.resize(x.size());
    if (mode == MatvecMode::Parallel) {
      kernels::parallel::csr_matvec(h.csr().view(), x.data(), y.data());
    } else {
      kernels::serial::csr_matvec(h.csr().view(), x.data(), y.data());
    }
  } else {
    y = h.apply(x);
  }
}

CVector krylov_impl(const LinearOperator& h, const CVector& state, double tau,
                    const KrylovOptions& opt, KrylovStats* stats, MatvecMode mode) {
  if (opt.subspace_dim < 8) fail(ErrorKind::InvalidInput, "subspace_dim must be >= 8");
  if (state.size() != h.dim()) fail(ErrorKind::InvalidInput, "state dimension mismatch");
  if (!std::isfinite(tau)) fail(ErrorKind::InvalidInput, "tau must be finite");
  const double norm0 = state.norm();
  if (std::abs(norm0 - 1.0) > 1e-10) fail(ErrorKind::InvalidInput, "state must be normalized");

  const long d = h.dim();
  const int m_max = static_cast<int>(std::min<long>(opt.subspace_dim, d));
  CVector v = state;
  double done = 0.0;
  const double total = std::abs(tau);
  const double sign = tau < 0.0 ? -1.0 : 1.0;
  double dt = total;
  long substeps = 0;
  CMatrix basis(d, m_max);
  CVector w;

  while (done < total) {
    if (++substeps > opt.max_substeps) {
      fail(ErrorKind::NonConvergence,
           "Krylov propagation exceeded " + std::to_string(opt.max_substeps) +
               " sub-steps at t = " + std::to_string(done));
    }
    // Lanczos with full reorthogonalization.
    std::vector<double> alpha;
    std::vector<double> beta;
    const double vnorm = v.norm();
    basis.col(0) = v / vnorm;
    int m = 0;
    double beta_next = 0.0;
    bool happy = false;
    for (int j = 0; j < m_max; ++j) {
      matvec(h, basis.col(j), w, mode);
      if (stats) ++stats->matvecs;
      const double a = basis.col(j).dot(w).real();
      alpha.push_back(a);
      w -= a * basis.col(j);
      if (j > 0) w -= beta[static_cast<std::size_t>(j - 1)] * basis.col(j - 1);
      for (int pass = 0; pass < 2; ++pass) {
        const CVector coeffs = basis.leftCols(j + 1).adjoint() * w;
        w -= basis.leftCols(j + 1) * coeffs;
      }
      const double b = w.norm();
      m = j + 1;
      if (b < 1e-13 * std::max(1.0, std::abs(a))) {
        happy = true;
        beta_next = 0.0;
        break;
      }
      if (j + 1 < m_max) {
        beta.push_back(b);
        basis.col(j + 1) = w / b;
      } else {
        beta_next = b;
      }
    }

    RMatrix t = RMatrix::Zero(m, m);
    for (int j = 0; j < m; ++j) t(j, j) = alpha[static_cast<std::size_t>(j)];
    for (int j = 0; j + 1 < m; ++j) {
      t(j, j + 1) = beta[static_cast<std::size_t>(j)];
      t(j + 1, j) = beta[static_cast<std::size_t>(j)];
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> es(t);
    const RVector& theta = es.eigenvalues();
    const RMatrix& q = es.eigenvectors();

    const double remaining = total - done;
    double step = std::min(dt, remaining);
    CVector coeff(m);
    double err = 0.0;
    for (;;) {
      CVector phase(m);
      for (int k = 0; k < m; ++k) {
        phase(k) = std::exp(Complex(0.0, -sign * theta(k) * step)) * q(0, k);
      }
      coeff = q.cast<Complex>() * phase;
      err = happy ? 0.0 : beta_next * std::abs(coeff(m - 1)) * vnorm;
      if (err <= opt.tolerance) break;
      step *= 0.5;
      if (step < 1e-14 * std::max(total, 1.0)) {
        fail(ErrorKind::NonConvergence, "Krylov step size underflow; achieved local error " +
                                            std::to_string(err));
      }
    }
    v = vnorm * (basis.leftCols(m) * coeff);
    done += step;
    if (stats) {
      ++stats->substeps;
      stats->max_local_error = std::max(stats->max_local_error, err);
    }
    dt = (err < 0.1 * opt.tolerance) ? 2.0 * step : step;
  }
  return v;
}

}  // namespace

CVector krylov_step(const LinearOperator& h, const CVector& state, double tau, int subspace_dim,
                    KrylovStats* stats) {
  KrylovOptions opt;
  opt.subspace_dim = subspace_dim;
  return krylov_step(h, state, tau, opt, stats);
}

CVector krylov_step(const LinearOperator& h, const CVector& state, double tau,
                    const KrylovOptions& options, KrylovStats* stats) {
  if (tau == 0.0) return state;
  return krylov_impl(h, state, tau, options, stats, MatvecMode::Parallel);
}

namespace {

// Columns are normalized individually and rescaled afterwards; zero columns
// stay zero.
CMatrix apply_columns(const LinearOperator& h, const CMatrix& states, double tau,
                      const KrylovOptions& options, bool parallel_columns) {
  CMatrix out(states.rows(), states.cols());
  const long cols = static_cast<long>(states.cols());
  const auto one = [&](long j) {
    const double nrm = states.col(j).norm();
    if (nrm == 0.0 || tau == 0.0) {
      out.col(j) = states.col(j);
      return;
    }
    const CVector unit = states.col(j) / nrm;
    out.col(j) = nrm * krylov_impl(h, unit, tau, options, nullptr,
                                   parallel_columns ? MatvecMode::Serial : MatvecMode::Parallel);
  };
  if (parallel_columns) {
#pragma omp parallel for schedule(dynamic)
    for (long j = 0; j < cols; ++j) one(j);
  } else {
    for (long j = 0; j < cols; ++j) one(j);
  }
  return out;
}

}  // namespace

namespace serial {
CMatrix krylov_apply(const LinearOperator& h, const CMatrix& states, double tau,
                     const KrylovOptions& options) {
  return apply_columns(h, states, tau, options, false);
}
}  // namespace serial

namespace parallel {
CMatrix krylov_apply(const LinearOperator& h, const CMatrix& states, double tau,
                     const KrylovOptions& options) {
  return apply_columns(h, states, tau, options, states.cols() > 1);
}
}  // namespace parallel

}  // namespace qhist
