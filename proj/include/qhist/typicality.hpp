#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "qhist/histories.hpp"

namespace qhist {

struct EstimateWithError {
  double mean = 0.0;
  double std_error = 0.0;
  long samples = 0;
  std::uint64_t seed = 0;
};

// Jackknife over samples of a statistic given as a function of per-column
// sample means. `columns` holds one row per sample.
EstimateWithError jackknife(const RMatrix& columns,
                            const std::function<double(const RVector&)>& statistic);

// Complex Gaussian vector, projected and normalized. Averaged over seeds,
// |psi><psi| equals pi / tr pi.
CVector random_projected_state(const Projector& pi, std::uint64_t seed, std::uint64_t stream = 0);

// Dynamical-typicality estimate of a history probability with rho ~ pi_1:
// mean over random states psi in the range of pi_1 of ||Pi_n U ... Pi_1 psi||^2.
// Sample s uses the stream derive_seed(seed, s).
EstimateWithError estimate_history_probability(const HistorySpec& spec, const ProjectorSet& events,
                                               const Propagator& u, int samples, std::uint64_t seed);

// Same random states for numerator and denominator; jackknife over the ratio.
EstimateWithError estimate_nonconsistency(const HistorySpec& path, const ProjectorSet& events,
                                          const Propagator& u, int samples, std::uint64_t seed);
EstimateWithError estimate_nonmarkovianity(const HistorySpec& path, const ProjectorSet& events,
                                           const Propagator& u, int samples, std::uint64_t seed);

// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases of
// R's diagonal moved into Q.
CMatrix haar_unitary(long dim, std::uint64_t seed);

enum class RankScheme { EqualThirds, EqualHalves };

// Coordinate projectors splitting dim into near-equal contiguous parts
// (labels 0, 1, ...), plus an empty complement.
ProjectorSet coordinate_family(long dim, RankScheme scheme);

// Off-diagonal decoherence functional of x1 -> -- -> x3 with rho = pi_1 / tr pi_1,
// summed over eigenbasis matrix elements:
// sum_{i != j} sum_{n_i, n_j} <n_j|U^dag pi_3 U|n_i><n_i|U pi_1 rho pi_1 U^dag|n_j>.
Complex offdiagonal_addends(const CMatrix& u, const ProjectorSet& family, Label x1, Label x3);
// The individual (i, j) addends, i != j, in family order.
std::vector<Complex> offdiagonal_pair_terms(const CMatrix& u, const ProjectorSet& family, Label x1,
                                            Label x3);

struct HaarReport {
  std::vector<long> dims;
  std::vector<double> rms_offdiagonal;
  std::vector<double> rms_std_error;
  // Mean of every off-diagonal pair term (i, j), real and imaginary parts,
  // with their standard errors: one entry per ordered pair per dim.
  std::vector<std::vector<double>> pair_mean_re;
  std::vector<std::vector<double>> pair_mean_im;
  std::vector<std::vector<double>> pair_std_error_re;
  std::vector<std::vector<double>> pair_std_error_im;
  double fitted_exponent = 0.0;
  double exponent_std_error = 0.0;

  void write_csv(std::ostream& out) const;
};

HaarReport haar_consistency_experiment(const std::vector<long>& dims, RankScheme scheme, int samples,
                                       std::uint64_t seed);

// omega(x3 | x1, x2; pi_1 / tr pi_1) against tr{pi_2 U^dag pi_3 U} / tr pi_2.
double haar_markov_deviation(const CMatrix& u, const ProjectorSet& family, Label x1, Label x2,
                             Label x3);

struct HaarMarkovReport {
  std::vector<long> dims;
  std::vector<double> median_deviation;
  std::vector<double> mean_deviation;
  std::vector<std::vector<double>> deviations;  // per dim, per sample

  void write_csv(std::ostream& out) const;
};

HaarMarkovReport haar_markov_experiment(const std::vector<long>& dims, int samples, std::uint64_t seed);

// Least-squares slope of log(y) against log(x) with its standard error.
std::pair<double, double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qhist
