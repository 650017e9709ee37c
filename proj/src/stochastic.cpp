#include "qhist/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "qhist/csv.hpp"
#include "qhist/kernels.hpp"
#include "qhist/rng.hpp"

namespace qhist {

std::size_t TransitionMatrix::index_of(Label l) const {
  const auto it = std::find(labels.begin(), labels.end(), l);
  if (it == labels.end()) fail(ErrorKind::InvalidInput, "unknown label " + label_name(l));
  return static_cast<std::size_t>(it - labels.begin());
}

double TransitionMatrix::operator()(Label to, Label from) const {
  return omega(static_cast<long>(index_of(from)), static_cast<long>(index_of(to)));
}

double TransitionMatrix::row_sum_defect() const {
  double worst = 0.0;
  for (long r = 0; r < omega.rows(); ++r) {
    if (!row_defined[static_cast<std::size_t>(r)]) continue;
    worst = std::max(worst, std::abs(omega.row(r).sum() - 1.0));
  }
  return worst;
}

void TransitionMatrix::write_csv(std::ostream& out) const {
  std::vector<std::string> head{"from"};
  for (Label l : labels) head.push_back(label_name(l));
  csv::write_row(out, head);
  for (long r = 0; r < omega.rows(); ++r) {
    std::vector<std::string> row{label_name(labels[static_cast<std::size_t>(r)])};
    for (long c = 0; c < omega.cols(); ++c) row.push_back(csv::number(omega(r, c)));
    csv::write_row(out, row);
  }
}

TransitionMatrix transition_matrix(const ProjectorSet& events, const Propagator& u) {
  if (u.dim() != events.dim()) fail(ErrorKind::InvalidInput, "propagator/projector dimension mismatch");
  TransitionMatrix tm;
  tm.labels = events.labels();
  tm.tau = u.tau();
  const auto n = static_cast<long>(events.size());
  tm.omega = RMatrix::Constant(n, n, std::nan(""));
  tm.row_defined.assign(static_cast<std::size_t>(n), false);
  for (long from = 0; from < n; ++from) {
    const Projector& pf = events.projectors()[static_cast<std::size_t>(from)];
    if (pf.rank() == 0) continue;
    const CMatrix evolved = u.apply(pf.basis());
    for (long to = 0; to < n; ++to) {
      const Projector& pt = events.projectors()[static_cast<std::size_t>(to)];
      tm.omega(from, to) =
          pt.rank() == 0 ? 0.0 : kernels::frobenius_sq(pt.apply(evolved)) / static_cast<double>(pf.rank());
    }
    tm.row_defined[static_cast<std::size_t>(from)] = true;
  }
  return tm;
}

std::vector<RVector> chain_propagate(const TransitionMatrix& tm, const RVector& p0, int steps) {
  if (p0.size() != tm.omega.rows()) fail(ErrorKind::InvalidInput, "p0 size mismatch");
  if (std::abs(p0.sum() - 1.0) > 1e-10) fail(ErrorKind::InvalidInput, "p0 must be normalized");
  std::vector<RVector> out{p0};
  RMatrix omega = tm.omega;
  for (long r = 0; r < omega.rows(); ++r) {
    if (!tm.row_defined[static_cast<std::size_t>(r)]) omega.row(r).setZero();
  }
  for (int s = 0; s < steps; ++s) {
    const RVector& p = out.back();
    for (long r = 0; r < p.size(); ++r) {
      if (!tm.row_defined[static_cast<std::size_t>(r)] && p(r) != 0.0) {
        fail(ErrorKind::InvalidInput, "probability on an undefined transition row");
      }
    }
    out.push_back(omega.transpose() * p);
  }
  return out;
}

std::vector<RVector> measured_populations(const ProjectorSet& events, const Propagator& u,
                                          const RVector& p0, int steps, bool reprepare) {
  const auto n = static_cast<long>(events.size());
  if (p0.size() != n) fail(ErrorKind::InvalidInput, "p0 size mismatch");
  // After each measurement rho is block diagonal, rho = sum_j B_j R_j B_j^dag, so
  // one step maps R_i -> sum_j W_ij R_j W_ij^dag with W_ij = B_i^dag U B_j.
  std::vector<CMatrix> bases;
  std::vector<long> ranks;
  for (const Projector& p : events.projectors()) {
    bases.push_back(p.basis());
    ranks.push_back(p.rank());
  }
  std::vector<CMatrix> ub;
  for (const CMatrix& b : bases) ub.push_back(u.apply(b));
  std::vector<std::vector<CMatrix>> w(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      w[static_cast<std::size_t>(i)].push_back(bases[static_cast<std::size_t>(i)].adjoint() *
                                               ub[static_cast<std::size_t>(j)]);
    }
  }
  const auto class_blocks = [&](const RVector& p) {
    std::vector<CMatrix> r;
    for (long i = 0; i < n; ++i) {
      const long k = ranks[static_cast<std::size_t>(i)];
      r.push_back(k == 0 ? CMatrix(0, 0) : CMatrix(CMatrix::Identity(k, k) * (p(i) / static_cast<double>(k))));
    }
    return r;
  };
  std::vector<CMatrix> blocks = class_blocks(p0);
  std::vector<RVector> out{p0};
  for (int s = 0; s < steps; ++s) {
    std::vector<CMatrix> next;
    RVector pop(n);
    for (long i = 0; i < n; ++i) {
      const long ri = ranks[static_cast<std::size_t>(i)];
      CMatrix r = CMatrix::Zero(ri, ri);
      for (long j = 0; j < n; ++j) {
        if (ranks[static_cast<std::size_t>(j)] == 0 || ri == 0) continue;
        const CMatrix& wij = w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        r += wij * blocks[static_cast<std::size_t>(j)] * wij.adjoint();
      }
      pop(i) = r.trace().real();
      next.push_back(std::move(r));
    }
    blocks = reprepare ? class_blocks(pop) : std::move(next);
    out.push_back(pop);
  }
  return out;
}

void RelaxationTable::write_csv(std::ostream& out) const {
  std::vector<std::string> head{"t"};
  for (Label l : labels) head.push_back("P(" + label_name(l) + ")");
  head.push_back("leakage");
  csv::write_row(out, head);
  for (std::size_t k = 0; k < t.size(); ++k) {
    std::vector<std::string> row{csv::number(t[k])};
    for (long c = 0; c < populations.cols(); ++c) row.push_back(csv::number(populations(static_cast<long>(k), c)));
    row.push_back(csv::number(leakage[k]));
    csv::write_row(out, row);
  }
}

RelaxationTable relaxation_curves(const Spectrum& spectrum, const ProjectorSet& events,
                                  const InitialState& rho0, const std::vector<double>& t_grid) {
  rho0.validate(events);
  if (!std::is_sorted(t_grid.begin(), t_grid.end()) || t_grid.empty() || t_grid.front() < 0.0) {
    fail(ErrorKind::InvalidInput, "t_grid must be ascending from 0");
  }
  RelaxationTable table;
  table.t = t_grid;
  for (Label l : events.labels()) {
    if (l != kComplement) table.labels.push_back(l);
  }
  table.populations.resize(static_cast<long>(t_grid.size()), static_cast<long>(table.labels.size()));
  table.leakage.resize(t_grid.size());

  // Work in the eigenbasis of H: coefficients only pick up phases.
  const CMatrix branches = initial_branches(rho0, events);
  const CMatrix coeffs = spectrum.eigenvectors.adjoint() * branches;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    CMatrix c = coeffs;
    for (long e = 0; e < spectrum.dim(); ++e) {
      c.row(e) *= std::exp(Complex(0.0, -spectrum.eigenvalues(e) * t_grid[k]));
    }
    const CMatrix state = spectrum.eigenvectors * c;
    for (std::size_t j = 0; j < table.labels.size(); ++j) {
      table.populations(static_cast<long>(k), static_cast<long>(j)) =
          kernels::frobenius_sq(events.at(table.labels[j]).apply(state));
    }
    table.leakage[k] = kernels::frobenius_sq(events.at(kComplement).apply(state));
  }
  return table;
}

Trajectory sample_trajectory(const TransitionMatrix& tm, Label x0, int length, std::uint64_t seed) {
  if (length < 1) fail(ErrorKind::InvalidInput, "trajectory length must be >= 1");
  Trajectory traj;
  traj.seed = seed;
  traj.tau = tm.tau;
  CounterRng rng(seed);
  std::size_t current = tm.index_of(x0);
  traj.outcomes.push_back(x0);
  for (int step = 1; step < length; ++step) {
    if (!tm.row_defined[current]) {
      fail(ErrorKind::InvalidInput, "trajectory reached undefined row " + label_name(tm.labels[current]));
    }
    const double u = rng.uniform();
    double cumulative = 0.0;
    std::size_t next = tm.labels.size();
    for (std::size_t k = 0; k < tm.labels.size(); ++k) {
      const double w = std::max(0.0, tm.omega(static_cast<long>(current), static_cast<long>(k)));
      cumulative += w;
      if (w > 0.0) next = k;  // fallback: last admissible column
      if (u < cumulative) {
        next = k;
        break;
      }
    }
    current = next;
    traj.outcomes.push_back(tm.labels[current]);
  }
  return traj;
}

void ManyStepReport::write_csv(std::ostream& out) const {
  csv::write_row(out, {"lambda", "omega_lambda", "mbar_lambda"});
  for (std::size_t k = 0; k < lambda_values.size(); ++k) {
    csv::write_row(out, {std::to_string(lambda_values[k]), csv::number(omega_lambda[k]),
                         k < mbar_lambda.size() ? csv::number(mbar_lambda[k]) : std::string("nan")});
  }
}

std::vector<double> uniform_history_probabilities(Label label, const ProjectorSet& events,
                                                  const Propagator& u, int count) {
  const Projector& p = events.at(label);
  if (p.rank() == 0) fail(ErrorKind::InvalidInput, "uniform history on a rank-0 projector");
  CMatrix m = p.basis() / std::sqrt(static_cast<double>(p.rank()));
  std::vector<double> probs;
  probs.push_back(kernels::frobenius_sq(m));
  for (int k = 1; k < count; ++k) {
    m = p.apply(u.apply(m));
    probs.push_back(kernels::frobenius_sq(m));
  }
  return probs;
}

namespace {

// P(window) and P(window without its last entry) with rho ~ pi_{window[0]}.
std::pair<double, double> window_probabilities(const std::vector<Label>& window,
                                               const ProjectorSet& events, const Propagator& u) {
  const Projector& first = events.at(window.front());
  if (first.rank() == 0) return {0.0, 0.0};
  CMatrix m = first.basis() / std::sqrt(static_cast<double>(first.rank()));
  double before_last = kernels::frobenius_sq(m);
  for (std::size_t k = 1; k < window.size(); ++k) {
    if (k + 1 == window.size()) before_last = kernels::frobenius_sq(m);
    m = events.at(window[k]).apply(u.apply(m));
  }
  return {kernels::frobenius_sq(m), before_last};
}

}  // namespace

ManyStepReport manystep_analysis(const std::vector<Label>& history, const ProjectorSet& events,
                                 const Propagator& u, int lambda_max, double floor) {
  if (lambda_max < 1) fail(ErrorKind::InvalidInput, "lambda_max must be >= 1");
  if (static_cast<int>(history.size()) < lambda_max + 2) {
    fail(ErrorKind::InvalidInput, "history length must be >= lambda_max + 2");
  }
  for (Label l : history) events.index_of(l);
  ManyStepReport report;
  report.uniform = std::all_of(history.begin(), history.end(),
                               [&](Label l) { return l == history.front(); });

  // omega[k] = omega_{k+1}, k = 0 .. lambda_max
  std::vector<double> omega;
  if (report.uniform) {
    const std::vector<double> probs =
        uniform_history_probabilities(history.front(), events, u, lambda_max + 2);
    for (int lam = 1; lam <= lambda_max + 1; ++lam) {
      const double den = probs[static_cast<std::size_t>(lam - 1)];
      if (!(den > floor)) {
        report.truncated = true;
        report.reason = "P of " + std::to_string(lam) + " identical outcomes below floor";
        break;
      }
      omega.push_back(probs[static_cast<std::size_t>(lam)] / den);
    }
  } else {
    for (int lam = 1; lam <= lambda_max + 1; ++lam) {
      const std::vector<Label> window(history.end() - (lam + 1), history.end());
      const auto [num, den] = window_probabilities(window, events, u);
      if (!(den > floor)) {
        report.truncated = true;
        report.reason = "conditioning on the last " + std::to_string(lam) +
                        " outcomes has probability below floor";
        break;
      }
      omega.push_back(num / den);
    }
  }

  for (std::size_t k = 0; k + 1 < omega.size(); ++k) {
    report.lambda_values.push_back(static_cast<int>(k) + 1);
    report.omega_lambda.push_back(omega[k]);
    if (!(omega[k] > 0.0)) {
      report.truncated = true;
      report.reason = "vanishing conditional at lambda " + std::to_string(k + 1);
      report.mbar_lambda.push_back(std::nan(""));
      continue;
    }
    report.mbar_lambda.push_back(std::abs(1.0 - omega[k + 1] / omega[k]));
  }
  if (!omega.empty()) report.omega_next = omega.back();
  if (report.uniform) {
    for (std::size_t k = 0; k + 1 < omega.size(); ++k) {
      if (omega[k + 1] < omega[k] - 1e-10) report.monotone = false;
    }
  }
  return report;
}

UniformEigensystem eigensystem_uniform(const LinearOperator& pi, const Propagator& u) {
  if (pi.dim() != u.dim()) fail(ErrorKind::InvalidInput, "dimension mismatch");
  if (pi.dim() > dense_dimension_limit()) {
    fail(ErrorKind::ResourceLimit, "eigensystem_uniform exceeds the dense threshold");
  }
  const CMatrix a = u.dense().adjoint() * pi.to_dense();
  UniformEigensystem out;
  Eigen::ComplexEigenSolver<CMatrix> solver(a);
  if (solver.info() != Eigen::Success) fail(ErrorKind::NonConvergence, "complex eigensolver failed");
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  const Eigen::JacobiSVD<CMatrix> svd(out.eigenvectors);
  const RVector& sv = svd.singularValues();
  out.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(out.condition < 1e12)) {
    Eigen::ComplexSchur<CMatrix> schur(a);
    out.defective = true;
    out.eigenvectors = schur.matrixU();
    out.schur_t = schur.matrixT();
    out.eigenvalues = out.schur_t.diagonal();
    out.warning = "eigenvector matrix is ill-conditioned (cond " + std::to_string(out.condition) +
                  "); Schur form returned";
    out.residual = (a * out.eigenvectors - out.eigenvectors * out.schur_t).cwiseAbs().maxCoeff();
  } else {
    out.residual =
        (a * out.eigenvectors - out.eigenvectors * out.eigenvalues.asDiagonal()).cwiseAbs().maxCoeff();
  }
  return out;
}

double uniform_probability_eigenform(const UniformEigensystem& eig, int lambda, long rank) {
  if (eig.defective) fail(ErrorKind::InvalidInput, "eigen-expansion needs a diagonalizable U^dag pi");
  if (rank <= 0) fail(ErrorKind::InvalidInput, "rank must be positive");
  const CMatrix& v = eig.eigenvectors;
  const CMatrix vinv = v.partialPivLu().inverse();
  const CMatrix g = v.adjoint() * v;
  const CMatrix k = vinv * vinv.adjoint();
  CVector powers(eig.eigenvalues.size());
  for (long i = 0; i < powers.size(); ++i) powers(i) = std::pow(eig.eigenvalues(i), lambda);
  Complex total{0.0, 0.0};
  for (long i = 0; i < powers.size(); ++i) {
    for (long j = 0; j < powers.size(); ++j) {
      total += std::conj(powers(i)) * g(i, j) * powers(j) * k(j, i);
    }
  }
  return total.real() / static_cast<double>(rank);
}

}  // namespace qhist
