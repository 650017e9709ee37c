#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "../support.hpp"
#include "qhist/rng.hpp"

using namespace qhist;

namespace {

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

std::set<double> distinct(const CVector& d) {
  std::set<double> out;
  for (long i = 0; i < d.size(); ++i) out.insert(d(i).real());
  return out;
}

CVector random_vector(long dim, std::uint64_t seed) {
  CounterRng rng(seed);
  CVector v(dim);
  for (long i = 0; i < dim; ++i) v(i) = Complex(rng.normal(), rng.normal());
  return v.normalized();
}

}  // namespace

TEST_CASE("basis: small sectors") {
  const SectorBasis b2 = build_basis(2, 0.0);
  CHECK(b2.dim() == 2);
  CHECK(b2.states() == std::vector<std::uint32_t>{0b01, 0b10});
  const SectorBasis b4 = build_basis(4, 2.0);
  CHECK(b4.dim() == 1);
  CHECK(b4.state(0) == 0b1111);
  CHECK(build_basis(12, 0.0).dim() == 924);
  CHECK_THROWS_AS(build_basis(3, 0.0), Error);
  CHECK_THROWS_AS(build_basis(4, 3.0), Error);
}

TEST_CASE("basis: dimension is binomial and index map inverts states") {
  for (int n = 1; n <= 16; ++n) {
    for (int up = 0; up <= n; ++up) {
      const double sz = up - n / 2.0;
      const SectorBasis b = build_basis(n, sz);
      REQUIRE(b.dim() == binomial(n, up));
      for (long i = 0; i < b.dim(); ++i) {
        CHECK(std::popcount(b.state(i)) == up);
        if (b.index_of(b.state(i)) != i) FAIL("index_of mismatch");
        if (i > 0 && !(b.state(i - 1) < b.state(i))) FAIL("states not ascending");
      }
    }
  }
  CHECK(build_basis(4, 0.0).index_of(0b0111) == -1);
}

TEST_CASE("ladder bonds") {
  ModelParams p;
  p.n = 1;
  LadderBonds b = ladder_bonds(p);
  REQUIRE(b.intra.bonds.size() == 2);
  CHECK(b.intra.bonds[0].a == 1);
  CHECK(b.intra.bonds[0].b == 2);
  CHECK(b.intra.bonds[1].a == 3);
  CHECK(b.intra.bonds[1].b == 4);
  REQUIRE(b.inter.bonds.size() == 1);
  CHECK(b.inter.bonds[0].a == 2);
  CHECK(b.inter.bonds[0].b == 3);

  p.n = 3;
  b = ladder_bonds(p);
  REQUIRE(b.inter.bonds.size() == 3);
  std::set<std::pair<int, int>> inter;
  for (const Bond& x : b.inter.bonds) {
    inter.insert({x.a, x.b});
    CHECK(x.strength == doctest::Approx(0.5));
  }
  CHECK(inter == std::set<std::pair<int, int>>{{4, 7}, {5, 8}, {6, 9}});
  // two legs of n-1 bonds plus n rungs, per ladder
  CHECK(b.intra.bonds.size() == 2 * (2 * (3 - 1) + 3));
  b.intra.validate(12);

  p.beta = 0.0;
  b = ladder_bonds(p);
  REQUIRE(b.inter.bonds.size() == 3);
  for (const Bond& x : b.inter.bonds) CHECK(x.strength == 0.0);
}

TEST_CASE("bond list validation") {
  BondList dup{{{1, 2, 1.0}, {2, 1, 1.0}}};
  CHECK_THROWS_AS(dup.validate(4), Error);
  BondList range{{{1, 5, 1.0}}};
  CHECK_THROWS_AS(range.validate(4), Error);
  BondList nan{{{1, 2, std::nan("")}}};
  CHECK_THROWS_AS(nan.validate(4), Error);
}

TEST_CASE("single Heisenberg bond") {
  const SectorBasis b = build_basis(2, 0.0);
  const LinearOperator h = hamiltonian_from_bonds(b, BondList{{{1, 2, 1.0}}}, 1.0);
  const Spectrum s = diagonalize(h);
  REQUIRE(s.dim() == 2);
  CHECK(s.eigenvalues(0) == doctest::Approx(-0.75).epsilon(1e-14));
  CHECK(s.eigenvalues(1) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("Hamiltonian symmetries and representations") {
  for (int n : {1, 2, 3}) {
    ModelParams p;
    p.n = n;
    p.delta = 0.7;
    const SectorBasis b = build_basis(p.num_spins(), 0.0);
    const LinearOperator h = build_hamiltonian(p, b, true);
    const LinearOperator h0 = build_hamiltonian(p, b, false);
    const LinearOperator x = build_observable_X(b, n);
    CHECK(h.hermiticity_defect() < 1e-12);
    CHECK(commutator_max_norm(h, total_sz_operator(b)) < 1e-12);
    CHECK(commutator_max_norm(h0, x) < 1e-12);
    if (n >= 2) CHECK(commutator_max_norm(h, x) > 1e-3);

    const CVector v = random_vector(b.dim(), 11 + n);
    const CVector sparse = h.apply(v);
    const CVector dense = h.to_dense() * v;
    CHECK((sparse - dense).norm() <= 1e-12 * dense.norm());
  }
}

TEST_CASE("spectrum invariant under left-right relabeling") {
  ModelParams p;
  p.n = 2;
  p.delta = 1.3;
  const SectorBasis b = build_basis(8, 0.0);
  const LadderBonds lb = ladder_bonds(p);
  BondList all = lb.intra;
  for (const Bond& x : lb.inter.bonds) all.bonds.push_back(x);
  BondList mirrored;
  const int N = 8;
  for (const Bond& x : all.bonds) {
    const auto m = [&](int s) { return (s - 1 + N / 2) % N + 1; };
    mirrored.bonds.push_back({m(x.a), m(x.b), x.strength});
  }
  const Spectrum a = diagonalize(hamiltonian_from_bonds(b, all, p.delta));
  const Spectrum c = diagonalize(hamiltonian_from_bonds(b, mirrored, p.delta));
  CHECK((a.eigenvalues - c.eigenvalues).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("observable X") {
  const SectorBasis b4 = build_basis(4, 0.0);
  const LinearOperator x4 = build_observable_X(b4, 1);
  CHECK(x4.diagonal_values()(b4.index_of(0b0011)).real() == 2.0);
  CHECK(x4.diagonal_values()(b4.index_of(0b1100)).real() == -2.0);

  CHECK(distinct(build_observable_X(build_basis(12, 0.0), 3).diagonal_values()) ==
        std::set<double>{-6, -4, -2, 0, 2, 4, 6});
  CHECK(distinct(build_observable_X(build_basis(8, 0.0), 2).diagonal_values()) ==
        std::set<double>{-4, -2, 0, 2, 4});
}

TEST_CASE("model params from JSON") {
  ModelParams p = nlohmann::json{{"N", 12}, {"beta", 0.2}, {"energy_window", {-1.0, 0.5}}}.get<ModelParams>();
  CHECK(p.n == 3);
  CHECK(p.beta == 0.2);
  CHECK(p.e_min == -1.0);
  CHECK(p.e_max == 0.5);
  const nlohmann::json odd = {{"N", 13}};
  CHECK_THROWS_AS(odd.get<ModelParams>(), Error);
  p.e_min = 1.0;
  CHECK_THROWS_AS(p.validate(), Error);
  const nlohmann::json round = ModelParams{};
  CHECK(round.get<ModelParams>().n == ModelParams{}.n);
}

TEST_CASE("triplet export") {
  const SectorBasis b = build_basis(2, 0.0);
  const LinearOperator h = hamiltonian_from_bonds(b, BondList{{{1, 2, 1.0}}}, 1.0);
  std::ostringstream out;
  h.write_triplets(out);
  std::istringstream in(out.str());
  long r, c;
  double re, im;
  CMatrix back = CMatrix::Zero(2, 2);
  int lines = 0;
  while (in >> r >> c >> re >> im) {
    back(r, c) = Complex(re, im);
    ++lines;
  }
  CHECK(lines == 4);
  CHECK((back - h.to_dense()).cwiseAbs().maxCoeff() == 0.0);
}
