#include <cmath>

#include "qhist/spectral.hpp"

namespace qhist {

Propagator Propagator::from_matrix(CMatrix u, double tau) {
  if (u.rows() != u.cols()) fail(ErrorKind::InvalidInput, "propagator matrix must be square");
  Propagator p;
  p.kind_ = Kind::Dense;
  p.tau_ = tau;
  p.u_ = std::move(u);
  return p;
}

Propagator Propagator::krylov(std::shared_ptr<const LinearOperator> h, double tau,
                              KrylovOptions options) {
  if (!h) fail(ErrorKind::InvalidInput, "Krylov propagator needs a Hamiltonian");
  Propagator p;
  p.kind_ = Kind::Krylov;
  p.tau_ = tau;
  p.h_ = std::move(h);
  p.options_ = options;
  return p;
}

long Propagator::dim() const { return kind_ == Kind::Dense ? static_cast<long>(u_.rows()) : h_->dim(); }

CMatrix Propagator::apply(const CMatrix& states) const {
  if (kind_ == Kind::Dense) return u_ * states;
  return parallel::krylov_apply(*h_, states, tau_, options_);
}

CVector Propagator::apply(const CVector& state) const {
  if (kind_ == Kind::Dense) return u_ * state;
  const double nrm = state.norm();
  if (nrm == 0.0) return state;
  return nrm * krylov_step(*h_, CVector(state / nrm), tau_, options_);
}

CMatrix Propagator::apply_adjoint(const CMatrix& states) const {
  if (kind_ == Kind::Dense) return u_.adjoint() * states;
  return parallel::krylov_apply(*h_, states, -tau_, options_);
}

CMatrix Propagator::dense() const {
  if (kind_ == Kind::Dense) return u_;
  return apply(CMatrix(CMatrix::Identity(dim(), dim())));
}

const CMatrix& Propagator::matrix() const {
  if (kind_ != Kind::Dense) fail(ErrorKind::InvalidInput, "Krylov propagator has no stored matrix");
  return u_;
}

double Propagator::unitarity_defect() const {
  const CMatrix u = dense();
  return (u * u.adjoint() - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

CMatrix evolve_with_spectrum(const Spectrum& spec, const CMatrix& m, double t) {
  CMatrix c = spec.eigenvectors.adjoint() * m;
  for (long k = 0; k < spec.dim(); ++k) {
    c.row(k) *= std::exp(Complex(0.0, -spec.eigenvalues(k) * t));
  }
  return spec.eigenvectors * c;
}

Propagator propagator(const Spectrum& spec, double tau) {
  if (!std::isfinite(tau)) fail(ErrorKind::InvalidInput, "tau must be finite");
  CVector phases(spec.dim());
  for (long k = 0; k < spec.dim(); ++k) {
    phases(k) = std::exp(Complex(0.0, -spec.eigenvalues(k) * tau));
  }
  CMatrix u = spec.eigenvectors * phases.asDiagonal() * spec.eigenvectors.adjoint();
  return Propagator::from_matrix(std::move(u), tau);
}

}  // namespace qhist
