#pragma once

#include <vector>

#include "qhist/linear_operator.hpp"
#include "qhist/spectral.hpp"

namespace qhist {

// Orthonormal columns supported on a subset of basis rows.
struct ProjectorPiece {
  std::vector<long> rows;
  CMatrix factor;  // rows.size() x rank
};

// Orthogonal projector kept in factored form pi = B B^dag, where B is
// block-sparse. Applying it costs O(rows * rank) per vector instead of d^2.
class Projector {
 public:
  Projector() = default;
  Projector(long dim, std::vector<ProjectorPiece> pieces);

  long dim() const { return dim_; }
  long rank() const { return rank_; }
  const std::vector<ProjectorPiece>& pieces() const { return pieces_; }

  CMatrix apply(const CMatrix& m) const;
  CVector apply(const CVector& v) const;
  // B embedded as a dim x rank matrix.
  CMatrix basis() const;
  CMatrix dense() const;
  LinearOperator as_operator() const;

  // Projector onto a contiguous range of basis states.
  static Projector coordinate_range(long dim, long first, long count);
  // Factorizes a dense Hermitian projector; fails if its eigenvalues are not 0/1.
  static Projector from_dense(const CMatrix& p);

 private:
  long dim_ = 0;
  long rank_ = 0;
  std::vector<ProjectorPiece> pieces_;
};

// Complete family of event projectors: one per X eigenvalue plus kComplement,
// which is always present (possibly with rank 0). Labels ascend with the
// complement last.
class ProjectorSet {
 public:
  ProjectorSet() = default;
  ProjectorSet(long dim, std::vector<Label> labels, std::vector<Projector> projectors);

  long dim() const { return dim_; }
  std::size_t size() const { return labels_.size(); }
  const std::vector<Label>& labels() const { return labels_; }
  const std::vector<Projector>& projectors() const { return projectors_; }
  bool contains(Label label) const;
  std::size_t index_of(Label label) const;
  const Projector& at(Label label) const;

  // Dense checks, for moderate dimensions.
  double orthogonality_defect() const;
  double completeness_defect() const;
  double idempotency_defect() const;

 private:
  long dim_ = 0;
  std::vector<Label> labels_;
  std::vector<Projector> projectors_;
};

// pi_{x,E} = pi_E pi_x pi_E per X eigenvalue x, plus the complement.
// Fails with ConstructionFault if pi_E does not commute with X.
ProjectorSet build_event_projectors(const LinearOperator& pi_E, const LinearOperator& x);

// Same family built directly from the block spectrum of H0, without any
// d x d matrix; used for sectors too large for dense projectors.
ProjectorSet event_projectors_from_blocks(const std::vector<SpectralBlock>& blocks,
                                          const EnergyWindow& window, long dim);

// Family from arbitrary labelled projectors; the complement of their sum is
// appended under kComplement.
ProjectorSet projector_set_from(long dim, std::vector<Label> labels, std::vector<Projector> projectors);

}  // namespace qhist
