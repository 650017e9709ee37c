#include "qhist/projectors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace qhist {

Projector::Projector(long dim, std::vector<ProjectorPiece> pieces)
    : dim_(dim), pieces_(std::move(pieces)) {
  for (const ProjectorPiece& p : pieces_) {
    if (static_cast<Eigen::Index>(p.rows.size()) != p.factor.rows()) {
      fail(ErrorKind::InvalidInput, "projector piece: factor rows != support size");
    }
    rank_ += static_cast<long>(p.factor.cols());
  }
}

CMatrix Projector::apply(const CMatrix& m) const {
  if (m.rows() != dim_) fail(ErrorKind::InvalidInput, "projector dimension mismatch");
  CMatrix out = CMatrix::Zero(m.rows(), m.cols());
  for (const ProjectorPiece& p : pieces_) {
    if (p.factor.cols() == 0) continue;
    const auto n = static_cast<Eigen::Index>(p.rows.size());
    CMatrix local(n, m.cols());
    for (Eigen::Index k = 0; k < n; ++k) local.row(k) = m.row(p.rows[static_cast<std::size_t>(k)]);
    const CMatrix coeffs = p.factor.adjoint() * local;
    local.noalias() = p.factor * coeffs;
    for (Eigen::Index k = 0; k < n; ++k) out.row(p.rows[static_cast<std::size_t>(k)]) += local.row(k);
  }
  return out;
}

CVector Projector::apply(const CVector& v) const {
  const CMatrix m = apply(CMatrix(v));
  return m.col(0);
}

CMatrix Projector::basis() const {
  CMatrix b = CMatrix::Zero(dim_, rank_);
  long col = 0;
  for (const ProjectorPiece& p : pieces_) {
    for (Eigen::Index c = 0; c < p.factor.cols(); ++c, ++col) {
      for (std::size_t k = 0; k < p.rows.size(); ++k) b(p.rows[k], col) = p.factor(static_cast<long>(k), c);
    }
  }
  return b;
}

CMatrix Projector::dense() const {
  const CMatrix b = basis();
  return b * b.adjoint();
}

LinearOperator Projector::as_operator() const {
  return LinearOperator::dense(dense(), OperatorTag::Projector);
}

Projector Projector::coordinate_range(long dim, long first, long count) {
  if (first < 0 || count < 0 || first + count > dim) {
    fail(ErrorKind::InvalidInput, "coordinate range outside the space");
  }
  ProjectorPiece p;
  for (long k = 0; k < count; ++k) p.rows.push_back(first + k);
  p.factor = CMatrix::Identity(count, count);
  return Projector(dim, {std::move(p)});
}

namespace {

// Splits the eigenvectors of a Hermitian 0/1 matrix into range and kernel.
void split_projector(const CMatrix& p, CMatrix& range, CMatrix& kernel) {
  RVector values;
  CMatrix vectors;
  hermitian_eigensystem(p, values, vectors);
  std::vector<long> one;
  std::vector<long> zero;
  for (long k = 0; k < values.size(); ++k) {
    if (std::abs(values(k) - 1.0) < 1e-8) {
      one.push_back(k);
    } else if (std::abs(values(k)) < 1e-8) {
      zero.push_back(k);
    } else {
      fail(ErrorKind::ConstructionFault,
           "matrix is not a projector: eigenvalue " + std::to_string(values(k)));
    }
  }
  range.resize(p.rows(), static_cast<long>(one.size()));
  kernel.resize(p.rows(), static_cast<long>(zero.size()));
  for (std::size_t k = 0; k < one.size(); ++k) range.col(static_cast<long>(k)) = vectors.col(one[k]);
  for (std::size_t k = 0; k < zero.size(); ++k) kernel.col(static_cast<long>(k)) = vectors.col(zero[k]);
}

}  // namespace

Projector Projector::from_dense(const CMatrix& p) {
  CMatrix range;
  CMatrix kernel;
  split_projector(p, range, kernel);
  ProjectorPiece piece;
  piece.rows.resize(static_cast<std::size_t>(p.rows()));
  for (long k = 0; k < p.rows(); ++k) piece.rows[static_cast<std::size_t>(k)] = k;
  piece.factor = std::move(range);
  return Projector(p.rows(), {std::move(piece)});
}

ProjectorSet::ProjectorSet(long dim, std::vector<Label> labels, std::vector<Projector> projectors)
    : dim_(dim), labels_(std::move(labels)), projectors_(std::move(projectors)) {
  if (labels_.size() != projectors_.size()) {
    fail(ErrorKind::InvalidInput, "labels and projectors differ in count");
  }
  for (const Projector& p : projectors_) {
    if (p.dim() != dim_) fail(ErrorKind::InvalidInput, "projector dimension mismatch");
  }
  long total = 0;
  for (const Projector& p : projectors_) total += p.rank();
  if (total != dim_) {
    fail(ErrorKind::ConstructionFault, "projector ranks sum to " + std::to_string(total) +
                                           ", expected " + std::to_string(dim_));
  }
}

bool ProjectorSet::contains(Label label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::size_t ProjectorSet::index_of(Label label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) fail(ErrorKind::InvalidInput, "unknown event label " + label_name(label));
  return static_cast<std::size_t>(it - labels_.begin());
}

const Projector& ProjectorSet::at(Label label) const { return projectors_[index_of(label)]; }

double ProjectorSet::orthogonality_defect() const {
  std::vector<CMatrix> bases;
  for (const Projector& p : projectors_) bases.push_back(p.basis());
  double worst = 0.0;
  for (std::size_t a = 0; a < bases.size(); ++a) {
    for (std::size_t b = 0; b < bases.size(); ++b) {
      if (a == b || bases[a].cols() == 0 || bases[b].cols() == 0) continue;
      const CMatrix prod = bases[a] * (bases[a].adjoint() * bases[b]) * bases[b].adjoint();
      worst = std::max(worst, prod.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

double ProjectorSet::completeness_defect() const {
  CMatrix sum = CMatrix::Zero(dim_, dim_);
  for (const Projector& p : projectors_) sum += p.dense();
  return (sum - CMatrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff();
}

double ProjectorSet::idempotency_defect() const {
  double worst = 0.0;
  for (const Projector& p : projectors_) {
    const CMatrix d = p.dense();
    if (d.size() == 0) continue;
    worst = std::max(worst, (d * d - d).cwiseAbs().maxCoeff());
  }
  return worst;
}

ProjectorSet build_event_projectors(const LinearOperator& pi_E, const LinearOperator& x) {
  if (x.kind() != LinearOperator::Kind::Diagonal) {
    fail(ErrorKind::InvalidInput, "build_event_projectors requires a diagonal X");
  }
  if (pi_E.tag() != OperatorTag::Projector) {
    fail(ErrorKind::InvalidInput, "pi_E must be projector-tagged");
  }
  const long d = x.dim();
  if (pi_E.dim() != d) fail(ErrorKind::InvalidInput, "pi_E and X dimensions differ");
  const CMatrix pe = pi_E.to_dense();
  const CVector& xd = x.diagonal_values();

  std::map<int, std::vector<long>> groups;
  for (long r = 0; r < d; ++r) {
    const double v = xd(r).real();
    if (std::abs(v - std::round(v)) > 1e-12) {
      fail(ErrorKind::InvalidInput, "X eigenvalues must be integers to serve as labels");
    }
    groups[static_cast<int>(std::lround(v))].push_back(r);
  }
  std::vector<int> group_of(static_cast<std::size_t>(d));
  for (const auto& [label, rows] : groups) {
    for (long r : rows) group_of[static_cast<std::size_t>(r)] = label;
  }
  // [pi_E, pi_x] = 0 for all x iff pi_E has no entries between X blocks.
  double leak = 0.0;
  for (long c = 0; c < d; ++c) {
    for (long r = 0; r < d; ++r) {
      if (group_of[static_cast<std::size_t>(r)] != group_of[static_cast<std::size_t>(c)]) {
        leak = std::max(leak, std::abs(pe(r, c)));
      }
    }
  }
  if (leak > 1e-10) {
    fail(ErrorKind::ConstructionFault,
         "pi_E does not commute with X (max off-block entry " + std::to_string(leak) + ")");
  }

  std::vector<Label> labels;
  std::vector<Projector> projectors;
  std::vector<ProjectorPiece> complement;
  for (const auto& [label, rows] : groups) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    CMatrix sub(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) sub(a, b) = pe(rows[static_cast<std::size_t>(a)], rows[static_cast<std::size_t>(b)]);
    }
    CMatrix range;
    CMatrix kernel;
    split_projector(sub, range, kernel);
    labels.push_back(label);
    projectors.emplace_back(d, std::vector<ProjectorPiece>{{rows, std::move(range)}});
    complement.push_back({rows, std::move(kernel)});
  }
  labels.push_back(kComplement);
  projectors.emplace_back(d, std::move(complement));
  return ProjectorSet(d, std::move(labels), std::move(projectors));
}

ProjectorSet event_projectors_from_blocks(const std::vector<SpectralBlock>& blocks,
                                          const EnergyWindow& window, long dim) {
  std::vector<const SpectralBlock*> ordered;
  for (const SpectralBlock& b : blocks) ordered.push_back(&b);
  std::sort(ordered.begin(), ordered.end(),
            [](const SpectralBlock* a, const SpectralBlock* b) { return a->x < b->x; });
  std::vector<Label> labels;
  std::vector<Projector> projectors;
  std::vector<ProjectorPiece> complement;
  for (const SpectralBlock* b : ordered) {
    std::vector<long> in;
    std::vector<long> out;
    for (long k = 0; k < b->eigenvalues.size(); ++k) {
      (window.contains(b->eigenvalues(k)) ? in : out).push_back(k);
    }
    const auto n = static_cast<Eigen::Index>(b->rows.size());
    CMatrix fin(n, static_cast<long>(in.size()));
    CMatrix fout(n, static_cast<long>(out.size()));
    for (std::size_t k = 0; k < in.size(); ++k) fin.col(static_cast<long>(k)) = b->eigenvectors.col(in[k]);
    for (std::size_t k = 0; k < out.size(); ++k) fout.col(static_cast<long>(k)) = b->eigenvectors.col(out[k]);
    labels.push_back(static_cast<Label>(std::lround(b->x)));
    projectors.emplace_back(dim, std::vector<ProjectorPiece>{{b->rows, std::move(fin)}});
    complement.push_back({b->rows, std::move(fout)});
  }
  labels.push_back(kComplement);
  projectors.emplace_back(dim, std::move(complement));
  return ProjectorSet(dim, std::move(labels), std::move(projectors));
}

ProjectorSet projector_set_from(long dim, std::vector<Label> labels, std::vector<Projector> projectors) {
  CMatrix sum = CMatrix::Zero(dim, dim);
  for (const Projector& p : projectors) sum += p.dense();
  const CMatrix rest = CMatrix::Identity(dim, dim) - sum;
  CMatrix range;
  CMatrix kernel;
  split_projector(rest, range, kernel);
  ProjectorPiece piece;
  for (long k = 0; k < dim; ++k) piece.rows.push_back(k);
  piece.factor = std::move(range);
  labels.push_back(kComplement);
  projectors.emplace_back(dim, std::vector<ProjectorPiece>{std::move(piece)});
  return ProjectorSet(dim, std::move(labels), std::move(projectors));
}

}  // namespace qhist
