#pragma once

#include <memory>

#include "qhist/histories.hpp"
#include "qhist/projectors.hpp"
#include "qhist/spectral.hpp"
#include "qhist/spin_model.hpp"

namespace qtest {

// One model instance with its dense spectra and event projectors.
struct Model {
  explicit Model(const qhist::ModelParams& p)
      : params(p),
        basis(qhist::build_basis(p.num_spins(), p.total_sz)),
        h0(qhist::build_hamiltonian(p, basis, false)),
        h(qhist::build_hamiltonian(p, basis, true)),
        x(qhist::build_observable_X(basis, p.n)),
        s0(qhist::diagonalize_blocked(h0, x)),
        s(qhist::diagonalize(h)),
        events(qhist::build_event_projectors(
            qhist::energy_window_projector(s0, {p.e_min * p.J, p.e_max * p.J}), x)) {}

  qhist::ModelParams params;
  qhist::SectorBasis basis;
  qhist::LinearOperator h0;
  qhist::LinearOperator h;
  qhist::LinearOperator x;
  qhist::Spectrum s0;
  qhist::Spectrum s;
  qhist::ProjectorSet events;

  qhist::Propagator u(double tau) const { return qhist::propagator(s, tau); }
  qhist::HistorySpec spec(std::vector<qhist::Slot> slots, double tau) const {
    qhist::HistorySpec hs;
    hs.slots = std::move(slots);
    hs.tau = tau;
    hs.initial_state = qhist::InitialState::uniform_on(hs.slots.front().label, events);
    return hs;
  }
};

inline std::unique_ptr<Model> make_model(const qhist::ModelParams& p) { return std::make_unique<Model>(p); }

// Shared N = 4n instance with default parameters.
inline const Model& model(int spins) {
  static std::unique_ptr<Model> cache[5];
  const int n = spins / 4;
  if (!cache[n]) {
    qhist::ModelParams p;
    p.n = n;
    cache[n] = make_model(p);
  }
  return *cache[n];
}

}  // namespace qtest
