#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "../support.hpp"
#include "qhist/rng.hpp"

using namespace qhist;

namespace {

CVector random_vector(long dim, std::uint64_t seed) {
  CounterRng rng(seed);
  CVector v(dim);
  for (long i = 0; i < dim; ++i) v(i) = Complex(rng.normal(), rng.normal());
  return v.normalized();
}

}  // namespace

TEST_CASE("dense eigensolver reconstructs H") {
  for (int spins : {4, 8, 12}) {
    const qtest::Model& m = qtest::model(spins);
    CHECK(m.s.orthonormality_defect() < 1e-10);
    CHECK(m.s.reconstruction_error(m.h) < 1e-10);
    CHECK(m.s0.reconstruction_error(m.h0) < 1e-10);
    for (long i = 1; i < m.s.dim(); ++i) REQUIRE(m.s.eigenvalues(i - 1) <= m.s.eigenvalues(i));
  }
}

TEST_CASE("complex Hermitian input goes through the complex solver") {
  CounterRng rng(5);
  CMatrix a(40, 40);
  for (long i = 0; i < 40; ++i)
    for (long j = 0; j < 40; ++j) a(i, j) = Complex(rng.normal(), rng.normal());
  a = (a + a.adjoint()).eval();
  RVector w;
  CMatrix v;
  hermitian_eigensystem(a, w, v);
  CHECK((v * w.asDiagonal() * v.adjoint() - a).norm() < 1e-10 * a.norm());
}

TEST_CASE("blocked spectrum carries exact X labels") {
  const qtest::Model& m = qtest::model(12);
  REQUIRE(m.s0.x_labels.size() == static_cast<std::size_t>(m.s0.dim()));
  const CMatrix xv = m.x.to_dense() * m.s0.eigenvectors;
  for (long k = 0; k < m.s0.dim(); ++k) {
    const double x = m.s0.x_labels[k];
    if ((xv.col(k) - x * m.s0.eigenvectors.col(k)).norm() > 1e-12) FAIL("column " << k);
  }
  const auto blocks = block_diagonalize(m.h0, m.x);
  long total = 0;
  for (const auto& b : blocks) total += static_cast<long>(b.rows.size());
  CHECK(total == m.basis.dim());
  CHECK_THROWS_AS(block_diagonalize(m.h, m.x), Error);
}

TEST_CASE("energy window projector and event family") {
  for (int spins : {4, 8, 12}) {
    const qtest::Model& m = qtest::model(spins);
    const ProjectorSet& ev = m.events;
    CHECK(ev.orthogonality_defect() < 1e-10);
    CHECK(ev.completeness_defect() < 1e-10);
    CHECK(ev.idempotency_defect() < 1e-10);
    CHECK(ev.labels().back() == kComplement);
    long total = 0;
    for (const Projector& p : ev.projectors()) total += p.rank();
    CHECK(total == m.basis.dim());
    // every projector commutes with X
    for (const Projector& p : ev.projectors())
      CHECK(commutator_max_norm(p.as_operator(), m.x) < 1e-10);
  }
}

TEST_CASE("windowed ranks at N = 12") {
  const qtest::Model& m = qtest::model(12);
  std::map<Label, long> ranks;
  for (std::size_t i = 0; i < m.events.size(); ++i)
    ranks[m.events.labels()[i]] = m.events.projectors()[i].rank();
  CHECK(ranks[0] == 170);
  CHECK(ranks[2] == 96);
  CHECK(ranks[-2] == 96);
  CHECK(ranks[4] == 12);
  CHECK(ranks[-4] == 12);
  CHECK(ranks[kComplement] == 538);
}

TEST_CASE("block and dense event families agree") {
  const qtest::Model& m = qtest::model(8);
  const EnergyWindow w{m.params.e_min, m.params.e_max};
  const ProjectorSet blocks = event_projectors_from_blocks(block_diagonalize(m.h0, m.x), w, m.basis.dim());
  REQUIRE(blocks.labels() == m.events.labels());
  for (Label l : blocks.labels())
    CHECK((blocks.at(l).dense() - m.events.at(l).dense()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("non-commuting window projector is rejected") {
  const qtest::Model& m = qtest::model(8);
  // window built from the interacting spectrum does not commute with X
  const LinearOperator bad = energy_window_projector(m.s, {m.params.e_min, m.params.e_max});
  CHECK_THROWS_AS(build_event_projectors(bad, m.x), Error);
}

TEST_CASE("propagator is unitary and composes") {
  const qtest::Model& m = qtest::model(8);
  const Propagator u1 = m.u(0.7);
  const Propagator u2 = m.u(1.4);
  CHECK(u1.unitarity_defect() < 1e-12);
  CHECK((u1.matrix() * u1.matrix() - u2.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((m.u(0.0).matrix() - CMatrix::Identity(m.basis.dim(), m.basis.dim())).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Krylov evolution matches dense propagation") {
  const qtest::Model& m = qtest::model(12);
  auto h = std::make_shared<const LinearOperator>(m.h);
  for (double tau : {0.1, 1.0, 10.0}) {
    const CVector psi = random_vector(m.basis.dim(), 17);
    const CVector ref = m.u(tau).apply(psi);
    KrylovStats stats;
    const CVector kry = krylov_step(m.h, psi, tau, 30, &stats);
    CHECK((kry - ref).norm() < 1e-8);
    CHECK(std::abs(kry.norm() - 1.0) < 1e-10);
    const Propagator pk = Propagator::krylov(h, tau);
    CHECK((pk.apply(psi) - ref).norm() < 1e-8);
  }
}

TEST_CASE("Krylov column propagation: serial and parallel agree") {
  const qtest::Model& m = qtest::model(8);
  CMatrix block(m.basis.dim(), 5);
  for (int c = 0; c < 5; ++c) block.col(c) = random_vector(m.basis.dim(), 100 + c);
  const KrylovOptions opt;
  const CMatrix a = serial::krylov_apply(m.h, block, 2.5, opt);
  const CMatrix b = parallel::krylov_apply(m.h, block, 2.5, opt);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a - m.u(2.5).apply(block)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("spectrum CSV") {
  const qtest::Model& m = qtest::model(4);
  std::ostringstream out;
  m.s0.write_csv(out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "index,eigenvalue,x");
  long rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == m.s0.dim());
}
