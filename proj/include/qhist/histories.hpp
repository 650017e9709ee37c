#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qhist/projectors.hpp"
#include "qhist/spectral.hpp"

namespace qhist {

// One time point of a history: a measured event label or no measurement.
struct Slot {
  bool measured = true;
  Label label = 0;

  static Slot measure(Label l) { return {true, l}; }
  static Slot gap() { return {false, 0}; }
  bool operator==(const Slot&) const = default;
};

// rho = sum_i c_i pi_i with c_i >= 0 and tr rho = 1.
struct InitialState {
  std::map<Label, double> weights;

  // rho = pi_label / tr pi_label.
  static InitialState uniform_on(Label label, const ProjectorSet& events);
  // rho = sum_i p_i pi_i / tr pi_i.
  static InitialState from_populations(const std::map<Label, double>& populations,
                                       const ProjectorSet& events);
  double trace(const ProjectorSet& events) const;
  void validate(const ProjectorSet& events) const;
};

struct HistorySpec {
  std::vector<Slot> slots;
  double tau = 0.0;
  InitialState initial_state;

  std::size_t measured_count() const;
  void validate(const ProjectorSet& events) const;
};

// JSON: {"slots": [2, "--", 0], "tau": 10.0, "initial_state": {"2": 0.01}}.
// The complement label is written as "complement".
void to_json(nlohmann::json& j, const HistorySpec& spec);
void from_json(const nlohmann::json& j, HistorySpec& spec);
std::string format_path(const std::vector<Slot>& slots);

struct HistoryResult {
  double probability = 0.0;
  long branch_count = 0;
  HistorySpec spec;
};

enum class HistoryMethod {
  Auto,           // branch propagation
  Branch,         // pure-state branches spanning rho
  DensityMatrix,  // explicit rho -> pi rho pi, U rho U^dag
};

// tr{Pi_n U ... U Pi_1 rho}, with plain unitary conjugation across gaps.
HistoryResult history_probability(const HistorySpec& spec, const Propagator& u,
                                  const ProjectorSet& events,
                                  HistoryMethod method = HistoryMethod::Auto);

// P(all slots) / P(all but the final slot).
double conditional_probability(const HistorySpec& spec_long, const ProjectorSet& events,
                               const Propagator& u, double floor = kProbabilityFloor);

// |1 - P(path) / sum over label assignments to the gaps of P(path)|.
double nonconsistency(const HistorySpec& path_with_gaps, const ProjectorSet& events,
                      const Propagator& u, double floor = kProbabilityFloor);

// Off-diagonal part of the decoherence functional of x1 -> -- -> x3:
// sum_{i != j} tr{pi_3 U pi_i U pi_1 rho pi_1 U^dag pi_j U^dag}.
Complex decoherence_offdiagonal(Label x1, Label x3, const ProjectorSet& events,
                                const Propagator& u, const InitialState& rho);

// For a fully measured path x_{k-1}, x_k, ..., x_n, x_{n+1}:
// |1 - w(x_{n+1} | x_{k-1}, ..., x_n) / w(x_{n+1} | x_k, ..., x_n)|.
// The longer conditional uses the path's initial state, the shorter one
// rho ~ pi_{x_k}.
double nonmarkovianity(const HistorySpec& path, const ProjectorSet& events, const Propagator& u,
                       double floor = kProbabilityFloor);

// Squared norms, per column, of Pi_n U ... U Pi_1 applied to `states`
// (gaps skip the projection). Columns are independent pure-state branches.
RVector history_column_weights(const std::vector<Slot>& slots, const Propagator& u,
                               const ProjectorSet& events, const CMatrix& states);

// As above, summed over every label assignment (complement included) to the
// unmeasured slots.
RVector gap_summed_column_weights(const std::vector<Slot>& slots, const Propagator& u,
                                  const ProjectorSet& events, const CMatrix& states);

// Pure-state branches whose outer products sum to rho (d x rank(rho)),
// restricted to `only` when given.
CMatrix initial_branches(const InitialState& rho, const ProjectorSet& events,
                         std::optional<Label> only = std::nullopt);

}  // namespace qhist
