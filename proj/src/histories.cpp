#include "qhist/histories.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qhist/kernels.hpp"

namespace qhist {

InitialState InitialState::uniform_on(Label label, const ProjectorSet& events) {
  const long rank = events.at(label).rank();
  if (rank == 0) fail(ErrorKind::InvalidInput, "projector " + label_name(label) + " has rank 0");
  InitialState s;
  s.weights[label] = 1.0 / static_cast<double>(rank);
  return s;
}

InitialState InitialState::from_populations(const std::map<Label, double>& populations,
                                            const ProjectorSet& events) {
  InitialState s;
  for (const auto& [label, p] : populations) {
    if (p == 0.0) continue;
    const long rank = events.at(label).rank();
    if (rank == 0) fail(ErrorKind::InvalidInput, "population on a rank-0 projector");
    s.weights[label] = p / static_cast<double>(rank);
  }
  return s;
}

double InitialState::trace(const ProjectorSet& events) const {
  double t = 0.0;
  for (const auto& [label, c] : weights) t += c * static_cast<double>(events.at(label).rank());
  return t;
}

void InitialState::validate(const ProjectorSet& events) const {
  for (const auto& [label, c] : weights) {
    if (!(c >= 0.0)) fail(ErrorKind::InvalidInput, "initial-state weights must be >= 0");
    events.index_of(label);
  }
  const double t = trace(events);
  if (std::abs(t - 1.0) > 1e-12) {
    fail(ErrorKind::InvalidInput, "initial state has trace " + std::to_string(t));
  }
}

std::size_t HistorySpec::measured_count() const {
  return static_cast<std::size_t>(
      std::count_if(slots.begin(), slots.end(), [](const Slot& s) { return s.measured; }));
}

void HistorySpec::validate(const ProjectorSet& events) const {
  if (measured_count() == 0) fail(ErrorKind::InvalidInput, "history needs a measured slot");
  if (slots.size() > 1 && !(tau > 0.0)) fail(ErrorKind::InvalidInput, "tau must be > 0");
  for (const Slot& s : slots) {
    if (s.measured) events.index_of(s.label);
  }
  initial_state.validate(events);
}

namespace {

nlohmann::json label_to_json(Label l) {
  if (l == kComplement) return "complement";
  return l;
}

Label label_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "complement") return kComplement;
    fail(ErrorKind::InvalidInput, "unknown label string " + j.get<std::string>());
  }
  return j.get<Label>();
}

Label label_from_key(const std::string& key) {
  if (key == "complement") return kComplement;
  return std::stoi(key);
}

}  // namespace

void to_json(nlohmann::json& j, const HistorySpec& spec) {
  nlohmann::json slots = nlohmann::json::array();
  for (const Slot& s : spec.slots) slots.push_back(s.measured ? label_to_json(s.label) : nlohmann::json("--"));
  nlohmann::json weights = nlohmann::json::object();
  for (const auto& [label, c] : spec.initial_state.weights) weights[label_name(label)] = c;
  j = nlohmann::json{{"slots", slots}, {"tau", spec.tau}, {"initial_state", weights}};
}

void from_json(const nlohmann::json& j, HistorySpec& spec) {
  HistorySpec s;
  for (const auto& item : j.at("slots")) {
    if (item.is_string() && item.get<std::string>() == "--") {
      s.slots.push_back(Slot::gap());
    } else {
      s.slots.push_back(Slot::measure(label_from_json(item)));
    }
  }
  s.tau = j.value("tau", 0.0);
  if (j.contains("initial_state")) {
    for (const auto& [key, value] : j.at("initial_state").items()) {
      s.initial_state.weights[label_from_key(key)] = value.get<double>();
    }
  }
  spec = std::move(s);
}

std::string format_path(const std::vector<Slot>& slots) {
  std::ostringstream out;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (k) out << "->";
    out << (slots[k].measured ? label_name(slots[k].label) : std::string("--"));
  }
  return out.str();
}

CMatrix initial_branches(const InitialState& rho, const ProjectorSet& events,
                         std::optional<Label> only) {
  long cols = 0;
  for (const auto& [label, c] : rho.weights) {
    if (c > 0.0 && (!only || *only == label)) cols += events.at(label).rank();
  }
  CMatrix b(events.dim(), cols);
  long at = 0;
  for (const auto& [label, c] : rho.weights) {
    if (!(c > 0.0) || (only && *only != label)) continue;
    const Projector& p = events.at(label);
    b.middleCols(at, p.rank()) = std::sqrt(c) * p.basis();
    at += p.rank();
  }
  return b;
}

namespace {

void check_tau(const HistorySpec& spec, const Propagator& u) {
  if (spec.slots.size() <= 1) return;
  if (std::abs(u.tau() - spec.tau) > 1e-12 * std::max(1.0, std::abs(spec.tau))) {
    fail(ErrorKind::InvalidInput, "propagator tau " + std::to_string(u.tau()) +
                                      " does not match history tau " + std::to_string(spec.tau));
  }
  if (u.dim() <= 0) fail(ErrorKind::InvalidInput, "empty propagator");
}

double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

double branch_probability(const HistorySpec& spec, const Propagator& u, const ProjectorSet& events,
                          long& branch_count) {
  const bool first_measured = spec.slots.front().measured;
  const CMatrix m = initial_branches(spec.initial_state, events,
                                     first_measured ? std::optional<Label>(spec.slots.front().label)
                                                    : std::nullopt);
  branch_count = static_cast<long>(m.cols());
  if (m.cols() == 0) return 0.0;
  const RVector w = history_column_weights(spec.slots, u, events, m);
  return kernels::pairwise_sum(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())));
}

double density_probability(const HistorySpec& spec, const Propagator& u, const ProjectorSet& events) {
  const long d = events.dim();
  CMatrix rho = CMatrix::Zero(d, d);
  for (const auto& [label, c] : spec.initial_state.weights) rho += c * events.at(label).dense();
  const CMatrix umat = u.dense();
  for (std::size_t k = 0; k < spec.slots.size(); ++k) {
    if (k > 0) rho = umat * rho * umat.adjoint();
    if (spec.slots[k].measured) {
      const CMatrix p = events.at(spec.slots[k].label).dense();
      rho = p * rho * p;
    }
  }
  return rho.trace().real();
}

}  // namespace

RVector history_column_weights(const std::vector<Slot>& slots, const Propagator& u,
                               const ProjectorSet& events, const CMatrix& states) {
  if (slots.empty()) fail(ErrorKind::InvalidInput, "empty history");
  CMatrix m = slots.front().measured ? events.at(slots.front().label).apply(states) : states;
  for (std::size_t k = 1; k < slots.size(); ++k) {
    m = u.apply(m);
    if (slots[k].measured) m = events.at(slots[k].label).apply(m);
  }
  return kernels::parallel::column_norms_sq(m);
}

namespace {

RVector sum_over_gaps(const std::vector<Slot>& slots, const Propagator& u, const ProjectorSet& events,
                      const CMatrix& m, std::size_t k) {
  if (k == slots.size()) return kernels::parallel::column_norms_sq(m);
  const CMatrix evolved = k > 0 ? u.apply(m) : m;
  if (slots[k].measured) {
    return sum_over_gaps(slots, u, events, events.at(slots[k].label).apply(evolved), k + 1);
  }
  RVector total = RVector::Zero(m.cols());
  for (const Projector& p : events.projectors()) {
    if (p.rank() == 0) continue;
    total += sum_over_gaps(slots, u, events, p.apply(evolved), k + 1);
  }
  return total;
}

}  // namespace

RVector gap_summed_column_weights(const std::vector<Slot>& slots, const Propagator& u,
                                  const ProjectorSet& events, const CMatrix& states) {
  if (slots.empty()) fail(ErrorKind::InvalidInput, "empty history");
  return sum_over_gaps(slots, u, events, states, 0);
}

HistoryResult history_probability(const HistorySpec& spec, const Propagator& u,
                                  const ProjectorSet& events, HistoryMethod method) {
  spec.validate(events);
  check_tau(spec, u);
  if (u.dim() != events.dim()) fail(ErrorKind::InvalidInput, "propagator/projector dimension mismatch");
  HistoryResult r;
  r.spec = spec;
  if (method == HistoryMethod::DensityMatrix) {
    r.probability = clamp_probability(density_probability(spec, u, events));
    r.branch_count = 1;
  } else {
    r.probability = clamp_probability(branch_probability(spec, u, events, r.branch_count));
  }
  return r;
}

double conditional_probability(const HistorySpec& spec_long, const ProjectorSet& events,
                               const Propagator& u, double floor) {
  if (spec_long.measured_count() < 2 || !spec_long.slots.back().measured) {
    fail(ErrorKind::InvalidInput, "conditional needs >= 2 measured slots ending in a measurement");
  }
  HistorySpec shorter = spec_long;
  shorter.slots.pop_back();
  const double den = history_probability(shorter, u, events).probability;
  if (!(den > floor)) {
    fail(ErrorKind::UndefinedConditional,
         "conditioning history " + format_path(shorter.slots) + " has probability " +
             std::to_string(den) + " below the floor");
  }
  const double num = history_probability(spec_long, u, events).probability;
  return num / den;
}

double nonconsistency(const HistorySpec& path, const ProjectorSet& events, const Propagator& u,
                      double floor) {
  if (path.measured_count() == path.slots.size()) {
    fail(ErrorKind::InvalidInput, "nonconsistency needs at least one unmeasured slot");
  }
  path.validate(events);
  check_tau(path, u);
  const double num = history_probability(path, u, events).probability;
  const bool first_measured = path.slots.front().measured;
  const CMatrix m = initial_branches(path.initial_state, events,
                                     first_measured ? std::optional<Label>(path.slots.front().label)
                                                    : std::nullopt);
  const RVector w = gap_summed_column_weights(path.slots, u, events, m);
  const double den = kernels::pairwise_sum(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())));
  if (!(den > floor)) {
    fail(ErrorKind::UndefinedConditional, "summed history probability below the floor for " +
                                              format_path(path.slots));
  }
  return std::max(0.0, std::abs(1.0 - num / den));
}

Complex decoherence_offdiagonal(Label x1, Label x3, const ProjectorSet& events, const Propagator& u,
                                const InitialState& rho) {
  rho.validate(events);
  const Projector& p1 = events.at(x1);
  const Projector& p3 = events.at(x3);
  const CMatrix w = u.apply(p1.apply(initial_branches(rho, events)));
  std::vector<CMatrix> y;
  y.reserve(events.size());
  for (const Projector& pi : events.projectors()) y.push_back(p3.apply(u.apply(pi.apply(w))));
  Complex total{0.0, 0.0};
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (i == j || y[i].cols() == 0) continue;
      total += (y[j].adjoint() * y[i]).trace();
    }
  }
  return total;
}

double nonmarkovianity(const HistorySpec& path, const ProjectorSet& events, const Propagator& u,
                       double floor) {
  if (path.slots.size() < 3 || path.measured_count() != path.slots.size()) {
    fail(ErrorKind::InvalidInput, "nonmarkovianity needs a fully measured path of >= 3 slots");
  }
  const double long_cond = conditional_probability(path, events, u, floor);
  HistorySpec shorter = path;
  shorter.slots.erase(shorter.slots.begin());
  shorter.initial_state = InitialState::uniform_on(shorter.slots.front().label, events);
  const double short_cond = conditional_probability(shorter, events, u, floor);
  if (!(short_cond > floor)) {
    fail(ErrorKind::UndefinedConditional, "shorter conditional vanishes for " + format_path(path.slots));
  }
  return std::max(0.0, std::abs(1.0 - long_cond / short_cond));
}

}  // namespace qhist
