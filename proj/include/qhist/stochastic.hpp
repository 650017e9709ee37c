#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "qhist/histories.hpp"

namespace qhist {

// Row-stochastic one-step transition matrix omega(x' | x), rows and columns in
// the order of the projector set's labels (complement included).
struct TransitionMatrix {
  std::vector<Label> labels;
  RMatrix omega;                  // omega(row = from, col = to)
  std::vector<bool> row_defined;  // false where tr pi_x = 0
  double tau = 0.0;

  std::size_t index_of(Label l) const;
  double operator()(Label to, Label from) const;
  double row_sum_defect() const;
  void write_csv(std::ostream& out) const;
};

// omega(x'|x) = tr{pi_x' U pi_x U^dag} / tr{pi_x}.
TransitionMatrix transition_matrix(const ProjectorSet& events, const Propagator& u);

// p_{n+1}(x') = sum_x omega(x'|x) p_n(x); returns p_0 .. p_steps.
std::vector<RVector> chain_propagate(const TransitionMatrix& tm, const RVector& p0, int steps);

// Quantum populations under a projective measurement of the event family after
// every step, starting from rho = sum_i p0_i pi_i / tr pi_i, computed by
// density-matrix conjugation in the block form of the measured state. With `reprepare` the post-measurement
// state is replaced by the maximum-entropy state of the same populations
// before the next step.
std::vector<RVector> measured_populations(const ProjectorSet& events, const Propagator& u,
                                          const RVector& p0, int steps, bool reprepare);

struct RelaxationTable {
  std::vector<double> t;
  std::vector<Label> labels;   // event labels without the complement
  RMatrix populations;         // t.size() x labels.size()
  std::vector<double> leakage;  // complement population

  void write_csv(std::ostream& out) const;
};

// Unmeasured evolution of rho0: P(x, t) = tr{pi_x rho(t)}.
RelaxationTable relaxation_curves(const Spectrum& spectrum, const ProjectorSet& events,
                                  const InitialState& rho0, const std::vector<double>& t_grid);

struct RateFitOptions {
  double tau_r = 20.0;  // integration step is tau_r / 2000
  double initial_rate = 0.05;
  int max_function_evals = 4000;
  // Fit P(x) / (1 - leakage) instead of the raw populations.
  bool condition_on_window = false;
};

struct RateFit {
  std::vector<Label> states;
  // rates[{from, to}] for nearest neighbours |from - to| = 2.
  std::map<std::pair<Label, Label>, double> rates;
  RMatrix generator;  // dp/dt = generator * p
  double residual = 0.0;       // sum of squared deviations
  double max_deviation = 0.0;  // max over t, x
  RelaxationTable master;
  bool converged = false;
};

// Least-squares fit of a nearest-neighbour (x -> x +- 2) rate equation to the
// population curves. Labels whose population stays zero are left out. Fails
// with SingularFit when the curves do not move.
RateFit fit_rate_equation(const RelaxationTable& curves, const RateFitOptions& options = {});

// Fixed-step RK4 solution of dp/dt = generator p on the grid.
RMatrix integrate_master_equation(const RMatrix& generator, const RVector& p0,
                                  const std::vector<double>& t_grid, double dt);

struct Trajectory {
  std::vector<Label> outcomes;
  std::uint64_t seed = 0;
  double tau = 0.0;
};

Trajectory sample_trajectory(const TransitionMatrix& tm, Label x0, int length, std::uint64_t seed);

struct ManyStepReport {
  std::vector<int> lambda_values;     // 1 .. lambda_max
  std::vector<double> omega_lambda;   // omega_lambda for each lambda
  double omega_next = 0.0;            // omega_{lambda_max + 1}
  std::vector<double> mbar_lambda;    // |1 - omega_{lambda+1} / omega_lambda|
  bool uniform = false;
  bool monotone = true;  // uniform histories: omega non-decreasing within 1e-10
  bool truncated = false;
  std::string reason;

  void write_csv(std::ostream& out) const;
};

// lambda-step conditionals of the final outcome of `history` (chronological)
// given its last lambda predecessors, and the matching non-Markovianities.
ManyStepReport manystep_analysis(const std::vector<Label>& history, const ProjectorSet& events,
                                 const Propagator& u, int lambda_max,
                                 double floor = kProbabilityFloor);

// Probabilities P_1 .. P_count of count identical outcomes `label`, rho ~ pi_label.
std::vector<double> uniform_history_probabilities(Label label, const ProjectorSet& events,
                                                  const Propagator& u, int count);

struct UniformEigensystem {
  CVector eigenvalues;
  CMatrix eigenvectors;
  double residual = 0.0;  // max|A V - V diag(phi)|
  double condition = 0.0;
  bool defective = false;  // Schur vectors returned instead
  CMatrix schur_t;
  std::string warning;
};

// Eigensystem of the non-Hermitian A = U^dag pi.
UniformEigensystem eigensystem_uniform(const LinearOperator& pi, const Propagator& u);

// P of `lambda` identical outcomes from the eigen-expansion of U^dag pi,
// sum_ij conj(phi_i)^lambda (V^dag V)_ij phi_j^lambda (V^-1 V^-dag)_ji / rank.
double uniform_probability_eigenform(const UniformEigensystem& eig, int lambda, long rank);

}  // namespace qhist
