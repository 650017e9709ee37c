#include <doctest.h>

#include <cmath>
#include <sstream>

#include "../support.hpp"
#include "qhist/stochastic.hpp"

using namespace qhist;

namespace {

RVector population_vector(const ProjectorSet& ev, std::map<Label, double> pops) {
  RVector p = RVector::Zero(static_cast<long>(ev.size()));
  for (const auto& [l, v] : pops) p(static_cast<long>(ev.index_of(l))) = v;
  return p;
}

}  // namespace

TEST_CASE("transition matrix is row stochastic") {
  for (int spins : {8, 12}) {
    const qtest::Model& m = qtest::model(spins);
    for (double tau : {0.5, 5.0, 10.0}) {
      const TransitionMatrix tm = transition_matrix(m.events, m.u(tau));
      CHECK(tm.row_sum_defect() < 1e-12);
      for (std::size_t i = 0; i < tm.labels.size(); ++i) {
        CHECK(tm.row_defined[i] == (m.events.projectors()[i].rank() > 0));
        if (tm.row_defined[i]) CHECK(tm.omega.row(static_cast<long>(i)).minCoeff() >= -1e-15);
      }
    }
  }
  // rank-0 labels at N = 12
  const TransitionMatrix tm = transition_matrix(qtest::model(12).events, qtest::model(12).u(1.0));
  CHECK_FALSE(tm.row_defined[tm.index_of(6)]);
  CHECK_FALSE(tm.row_defined[tm.index_of(-6)]);
}

TEST_CASE("transition probabilities are two-step history conditionals") {
  const qtest::Model& m = qtest::model(8);
  const Propagator u = m.u(3.0);
  const TransitionMatrix tm = transition_matrix(m.events, u);
  for (Label from : {-2, 0, 2})
    for (Label to : m.events.labels()) {
      const HistorySpec two = m.spec({Slot::measure(from), Slot::measure(to)}, 3.0);
      CHECK(std::abs(tm(to, from) - history_probability(two, u, m.events).probability) < 1e-12);
    }
}

TEST_CASE("chain embedding: re-prepared measurement reproduces the Markov chain") {
  const qtest::Model& m = qtest::model(12);
  const Propagator u = m.u(5.2);
  const TransitionMatrix tm = transition_matrix(m.events, u);
  const RVector p0 = population_vector(m.events, {{0, 1.0}});
  const auto chain = chain_propagate(tm, p0, 6);
  const auto quantum = measured_populations(m.events, u, p0, 6, true);
  REQUIRE(chain.size() == 7);
  REQUIRE(quantum.size() == 7);
  for (std::size_t k = 0; k < chain.size(); ++k) {
    CHECK((chain[k] - quantum[k]).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(chain[k].sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  // one step is exact even without re-preparation
  const auto plain = measured_populations(m.events, u, p0, 6, false);
  CHECK((plain[1] - chain[1]).cwiseAbs().maxCoeff() < 1e-12);
  for (const RVector& p : plain) CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("relaxation curves conserve probability") {
  const qtest::Model& m = qtest::model(8);
  std::vector<double> grid;
  for (int k = 0; k <= 40; ++k) grid.push_back(0.5 * k);
  const RelaxationTable r = relaxation_curves(m.s, m.events, InitialState::uniform_on(0, m.events), grid);
  REQUIRE(r.populations.rows() == 41);
  for (long k = 0; k < r.populations.rows(); ++k)
    CHECK(r.populations.row(k).sum() + r.leakage[k] == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t c = 0; c < r.labels.size(); ++c)
    CHECK(r.populations(0, static_cast<long>(c)) == (r.labels[c] == 0 ? doctest::Approx(1.0) : doctest::Approx(0.0)));
  CHECK(r.leakage[0] == doctest::Approx(0.0));
}

TEST_CASE("rate fit recovers a known generator") {
  // Three states x = -2, 0, 2 with rates 0 -> +-2 of 0.08 and +-2 -> 0 of 0.05.
  RMatrix g = RMatrix::Zero(3, 3);
  const auto edge = [&](int from, int to, double k) {
    g(to, from) += k;
    g(from, from) -= k;
  };
  edge(1, 0, 0.08);
  edge(1, 2, 0.08);
  edge(0, 1, 0.05);
  edge(2, 1, 0.05);
  RelaxationTable curves;
  for (int k = 0; k <= 80; ++k) curves.t.push_back(0.5 * k);
  curves.labels = {-2, 0, 2};
  RVector p0(3);
  p0 << 0.0, 1.0, 0.0;
  curves.populations = integrate_master_equation(g, p0, curves.t, 0.01);
  curves.leakage.assign(curves.t.size(), 0.0);

  const RateFit fit = fit_rate_equation(curves);
  CHECK(fit.converged);
  CHECK(fit.max_deviation < 1e-6);
  CHECK(fit.rates.at({0, 2}) == doctest::Approx(0.08).epsilon(1e-4));
  CHECK(fit.rates.at({0, -2}) == doctest::Approx(0.08).epsilon(1e-4));
  CHECK(fit.rates.at({2, 0}) == doctest::Approx(0.05).epsilon(1e-4));
  CHECK(fit.rates.at({-2, 0}) == doctest::Approx(0.05).epsilon(1e-4));
  CHECK(fit.master.populations.rows() == curves.populations.rows());

  RelaxationTable frozen = curves;
  for (long k = 0; k < frozen.populations.rows(); ++k) frozen.populations.row(k) = p0.transpose();
  try {
    fit_rate_equation(frozen);
    FAIL("expected SingularFit");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularFit);
  }
}

TEST_CASE("master equation integration conserves probability") {
  RMatrix g(2, 2);
  g << -0.3, 0.1, 0.3, -0.1;
  RVector p0(2);
  p0 << 1.0, 0.0;
  const RMatrix p = integrate_master_equation(g, p0, {0.0, 1.0, 2.0, 50.0}, 0.01);
  for (long k = 0; k < p.rows(); ++k) CHECK(p.row(k).sum() == doctest::Approx(1.0).epsilon(1e-12));
  // exact two-state solution
  const double t = 2.0;
  CHECK(p(2, 0) == doctest::Approx(0.25 + 0.75 * std::exp(-0.4 * t)).epsilon(1e-9));
  CHECK(p(3, 0) == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("trajectory sampling") {
  const qtest::Model& m = qtest::model(8);
  const TransitionMatrix tm = transition_matrix(m.events, m.u(5.2));
  const Trajectory a = sample_trajectory(tm, 0, 30, 42);
  const Trajectory b = sample_trajectory(tm, 0, 30, 42);
  const Trajectory c = sample_trajectory(tm, 0, 30, 43);
  CHECK(a.outcomes == b.outcomes);
  CHECK(a.outcomes != c.outcomes);
  CHECK(a.outcomes.front() == 0);
  CHECK(a.outcomes.size() == 30);

  // golden values for seed 42
  const std::vector<Label> golden = {0, 0, 0, -2, 0, 0, 2, 2, 2, 2, 2, 2, 2, 0, 0, 0, 0, kComplement, kComplement, kComplement, kComplement, kComplement, kComplement, kComplement, kComplement, kComplement, kComplement, kComplement, kComplement, kComplement};
  CHECK(a.outcomes == golden);

  // empirical transition frequencies
  const Trajectory lng = sample_trajectory(tm, 0, 200000, 7);
  std::map<Label, std::map<Label, double>> counts;
  std::map<Label, double> from;
  for (std::size_t k = 0; k + 1 < lng.outcomes.size(); ++k) {
    counts[lng.outcomes[k]][lng.outcomes[k + 1]] += 1.0;
    from[lng.outcomes[k]] += 1.0;
  }
  for (const auto& [x, row] : counts) {
    if (from[x] < 5000) continue;
    for (const auto& [y, n] : row) CHECK(std::abs(n / from[x] - tm(y, x)) < 0.02);
  }
  CHECK_THROWS_AS(sample_trajectory(tm, 6, 10, 1), Error);
}

TEST_CASE("uniform histories: eigen-expansion matches direct propagation") {
  const qtest::Model& m = qtest::model(4);
  for (Label label : {0, 2}) {
    if (m.events.at(label).rank() == 0) continue;
    const Propagator u = m.u(4.0);
    const auto direct = uniform_history_probabilities(label, m.events, u, 12);
    const UniformEigensystem eig = eigensystem_uniform(m.events.at(label).as_operator(), u);
    CHECK(eig.residual < 1e-10);
    if (eig.defective) continue;
    for (int lam = 1; lam <= 12; ++lam)
      CHECK(std::abs(uniform_probability_eigenform(eig, lam, m.events.at(label).rank()) - direct[lam - 1]) < 1e-10);
  }
  const qtest::Model& m8 = qtest::model(8);
  const Propagator u8 = m8.u(2.0);
  const auto direct = uniform_history_probabilities(0, m8.events, u8, 6);
  const UniformEigensystem eig = eigensystem_uniform(m8.events.at(0).as_operator(), u8);
  if (!eig.defective) {
    for (int lam = 1; lam <= 6; ++lam)
      CHECK(std::abs(uniform_probability_eigenform(eig, lam, m8.events.at(0).rank()) - direct[lam - 1]) < 1e-9);
  }
}

TEST_CASE("uniform history probabilities match generic histories") {
  const qtest::Model& m = qtest::model(8);
  const Propagator u = m.u(3.0);
  const auto probs = uniform_history_probabilities(2, m.events, u, 4);
  CHECK(probs[0] == doctest::Approx(1.0));
  for (int k = 2; k <= 4; ++k) {
    std::vector<Slot> slots(static_cast<std::size_t>(k), Slot::measure(2));
    CHECK(std::abs(history_probability(m.spec(slots, 3.0), u, m.events).probability - probs[k - 1]) < 1e-12);
  }
}

TEST_CASE("many-step analysis") {
  const qtest::Model& m = qtest::model(8);
  const Propagator u = m.u(5.2);
  const std::vector<Label> uniform(8, 0);
  const ManyStepReport r = manystep_analysis(uniform, m.events, u, 5);
  CHECK(r.uniform);
  REQUIRE(r.omega_lambda.size() == 5);
  const auto probs = uniform_history_probabilities(0, m.events, u, 7);
  for (int lam = 1; lam <= 5; ++lam) {
    CHECK(r.omega_lambda[lam - 1] == doctest::Approx(probs[lam] / probs[lam - 1]).epsilon(1e-12));
    const double next = lam < 5 ? r.omega_lambda[lam] : r.omega_next;
    CHECK(r.mbar_lambda[lam - 1] == doctest::Approx(std::abs(1.0 - next / r.omega_lambda[lam - 1])));
  }
  // the uniform route and the generic route agree
  std::vector<Label> nearly = uniform;
  nearly.front() = 2;
  const ManyStepReport g = manystep_analysis(nearly, m.events, u, 5);
  CHECK_FALSE(g.uniform);
  for (int lam = 1; lam <= 5; ++lam) CHECK(g.omega_lambda[lam - 1] == doctest::Approx(r.omega_lambda[lam - 1]).epsilon(1e-10));
  CHECK_THROWS_AS(manystep_analysis(std::vector<Label>(5, 0), m.events, u, 5), Error);

  std::ostringstream out;
  r.write_csv(out);
  CHECK(out.str().find('\n') != std::string::npos);
}
