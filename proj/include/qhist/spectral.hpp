#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "qhist/linear_operator.hpp"

namespace qhist {

struct Spectrum {
  RVector eigenvalues;     // ascending
  CMatrix eigenvectors;    // columns
  // X eigenvalue of each eigenvector; filled by diagonalize_blocked only.
  std::vector<double> x_labels;

  long dim() const { return static_cast<long>(eigenvalues.size()); }
  double orthonormality_defect() const;
  // ||V diag(lambda) V^dag - A||_F / ||A||_F
  double reconstruction_error(const LinearOperator& a) const;
  // CSV with header "index,eigenvalue,x"; x column empty when unlabeled.
  void write_csv(std::ostream& out) const;
};

// Eigen-decomposition of a Hermitian matrix given densely. Real input goes
// through dsyevd, complex through zheevd.
void hermitian_eigensystem(const CMatrix& a, RVector& values, CMatrix& vectors);

Spectrum diagonalize(const LinearOperator& h);

// One joint (S^z, X) block of an operator commuting with a diagonal X.
struct SpectralBlock {
  double x = 0.0;
  std::vector<long> rows;  // basis ordinals in this block, ascending
  RVector eigenvalues;
  CMatrix eigenvectors;    // rows.size() x rows.size()
};

// Diagonalizes h restricted to each eigenspace of the diagonal operator x.
// Fails if h couples different x values beyond 1e-12.
std::vector<SpectralBlock> block_diagonalize(const LinearOperator& h, const LinearOperator& x);

// Full spectrum assembled from the blocks: every eigenvector is an exact X
// eigenvector. Ties within 1e-12 are ordered by descending x, then block order.
Spectrum diagonalize_blocked(const LinearOperator& h, const LinearOperator& x);

struct EnergyWindow {
  double e_min = -1.2;
  double e_max = 0.6;
  bool contains(double e) const { return e >= e_min - 1e-12 && e <= e_max + 1e-12; }
};

// Dense projector onto the eigenvectors whose eigenvalue lies in the window.
LinearOperator energy_window_projector(const Spectrum& spec0, const EnergyWindow& window);

struct KrylovOptions {
  int subspace_dim = 30;
  double tolerance = 1e-10;
  long max_substeps = 200000;
};

struct KrylovStats {
  long substeps = 0;
  long matvecs = 0;
  double max_local_error = 0.0;
};

// exp(-i H tau) state by Lanczos with adaptive sub-stepping.
CVector krylov_step(const LinearOperator& h, const CVector& state, double tau,
                    int subspace_dim = 30, KrylovStats* stats = nullptr);
CVector krylov_step(const LinearOperator& h, const CVector& state, double tau,
                    const KrylovOptions& options, KrylovStats* stats = nullptr);

// Column-wise Krylov propagation: serial reference and OpenMP version.
namespace serial {
CMatrix krylov_apply(const LinearOperator& h, const CMatrix& states, double tau,
                     const KrylovOptions& options);
}
namespace parallel {
CMatrix krylov_apply(const LinearOperator& h, const CMatrix& states, double tau,
                     const KrylovOptions& options);
}

// Time-step operator U(tau) = exp(-i H tau). Either a dense unitary or a
// Krylov evolution driven by a sparse Hamiltonian (large sectors).
class Propagator {
 public:
  enum class Kind { Dense, Krylov };

  static Propagator from_matrix(CMatrix u, double tau);
  static Propagator krylov(std::shared_ptr<const LinearOperator> h, double tau,
                           KrylovOptions options = {});

  Kind kind() const { return kind_; }
  double tau() const { return tau_; }
  long dim() const;

  CMatrix apply(const CMatrix& states) const;
  CVector apply(const CVector& state) const;
  CMatrix apply_adjoint(const CMatrix& states) const;
  // Dense matrix; for a Krylov propagator this evolves the identity.
  CMatrix dense() const;
  const CMatrix& matrix() const;
  double unitarity_defect() const;

 private:
  Propagator() = default;
  Kind kind_ = Kind::Dense;
  double tau_ = 0.0;
  CMatrix u_;
  std::shared_ptr<const LinearOperator> h_;
  KrylovOptions options_;
};

// U = V exp(-i lambda tau) V^dag.
Propagator propagator(const Spectrum& spec, double tau);

// Columns of V^dag evolved in the eigenbasis: V exp(-i lambda t) V^dag m.
CMatrix evolve_with_spectrum(const Spectrum& spec, const CMatrix& m, double t);

}  // namespace qhist
