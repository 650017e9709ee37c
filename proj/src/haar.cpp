#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/QR>

#include "qhist/csv.hpp"
#include "qhist/rng.hpp"
#include "qhist/typicality.hpp"

namespace qhist {

CMatrix haar_unitary(long dim, std::uint64_t seed) {
  if (dim < 2) fail(ErrorKind::InvalidInput, "Haar unitary needs dim >= 2");
  CounterRng rng(seed);
  const double s = 1.0 / std::sqrt(2.0);
  CMatrix z(dim, dim);
  for (long j = 0; j < dim; ++j) {
    for (long i = 0; i < dim; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      z(i, j) = Complex(re * s, im * s);
    }
  }
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix& r = qr.matrixQR();
  for (long j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    const double a = std::abs(d);
    if (a > 0.0) q.col(j) *= d / a;
  }
  return q;
}

ProjectorSet coordinate_family(long dim, RankScheme scheme) {
  const long parts = scheme == RankScheme::EqualThirds ? 3 : 2;
  if (dim < parts) fail(ErrorKind::InvalidInput, "dimension too small for the rank scheme");
  const long base = dim / parts;
  const long extra = dim % parts;
  std::vector<Label> labels;
  std::vector<Projector> projectors;
  long first = 0;
  for (long k = 0; k < parts; ++k) {
    const long count = base + (k < extra ? 1 : 0);
    labels.push_back(static_cast<Label>(k));
    projectors.push_back(Projector::coordinate_range(dim, first, count));
    first += count;
  }
  return projector_set_from(dim, std::move(labels), std::move(projectors));
}

std::vector<Complex> offdiagonal_pair_terms(const CMatrix& u, const ProjectorSet& family, Label x1,
                                            Label x3) {
  const Projector& p1 = family.at(x1);
  const Projector& p3 = family.at(x3);
  if (p1.rank() == 0) fail(ErrorKind::InvalidInput, "rank-0 initial projector");
  // W = U pi_1 rho pi_1 U^dag with rho = pi_1 / r_1; A = U^dag pi_3 U.
  const CMatrix b1 = u * p1.basis();
  const CMatrix w = b1 * b1.adjoint() / static_cast<double>(p1.rank());
  const CMatrix b3 = p3.basis().adjoint() * u;
  const CMatrix a = b3.adjoint() * b3;
  std::vector<CMatrix> bases;
  for (const Projector& p : family.projectors()) bases.push_back(p.basis());
  std::vector<Complex> terms;
  for (std::size_t i = 0; i < bases.size(); ++i) {
    for (std::size_t j = 0; j < bases.size(); ++j) {
      if (i == j || bases[i].cols() == 0 || bases[j].cols() == 0) continue;
      // sum_{n_i, n_j} <n_j|A|n_i><n_i|W|n_j>
      const CMatrix aji = bases[j].adjoint() * a * bases[i];
      const CMatrix wij = bases[i].adjoint() * w * bases[j];
      terms.push_back((aji.transpose().array() * wij.array()).sum());
    }
  }
  return terms;
}

Complex offdiagonal_addends(const CMatrix& u, const ProjectorSet& family, Label x1, Label x3) {
  Complex total{0.0, 0.0};
  for (const Complex& t : offdiagonal_pair_terms(u, family, x1, x3)) total += t;
  return total;
}

double haar_markov_deviation(const CMatrix& u, const ProjectorSet& family, Label x1, Label x2,
                             Label x3) {
  const Projector& p1 = family.at(x1);
  const Projector& p2 = family.at(x2);
  const Projector& p3 = family.at(x3);
  // Branches of pi_1 rho pi_1 with rho = pi_1 / r_1.
  const CMatrix b = p1.basis() / std::sqrt(static_cast<double>(p1.rank()));
  const CMatrix m2 = p2.apply(CMatrix(u * b));
  const double den = m2.squaredNorm();
  if (!(den > kProbabilityFloor)) fail(ErrorKind::UndefinedConditional, "conditioning probability vanishes");
  const double num = p3.apply(CMatrix(u * m2)).squaredNorm();
  const CMatrix b3u = p3.basis().adjoint() * u * p2.basis();
  const double predicted = b3u.squaredNorm() / static_cast<double>(p2.rank());
  return std::abs(num / den - predicted);
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void check_dims(const std::vector<long>& dims, int samples, long min_dim) {
  if (dims.empty()) fail(ErrorKind::InvalidInput, "no dimensions given");
  if (samples < 2) fail(ErrorKind::InvalidInput, "need at least 2 samples per dimension");
  for (long d : dims) {
    if (d < min_dim) fail(ErrorKind::InvalidInput, "dimension " + std::to_string(d) + " too small");
  }
}

}  // namespace

HaarReport haar_consistency_experiment(const std::vector<long>& dims, RankScheme scheme, int samples,
                                       std::uint64_t seed) {
  check_dims(dims, samples, scheme == RankScheme::EqualThirds ? 3 : 2);
  HaarReport rep;
  rep.dims = dims;
  for (long d : dims) {
    const ProjectorSet family = coordinate_family(d, scheme);
    const std::uint64_t dim_seed = derive_seed(seed, static_cast<std::uint64_t>(d));
    std::vector<std::vector<Complex>> terms(static_cast<std::size_t>(samples));
#pragma omp parallel for schedule(dynamic)
    for (int s = 0; s < samples; ++s) {
      const CMatrix u = haar_unitary(d, derive_seed(dim_seed, static_cast<std::uint64_t>(s)));
      terms[static_cast<std::size_t>(s)] = offdiagonal_pair_terms(u, family, 0, 1);
    }
    const std::size_t pairs = terms.front().size();
    const double n = static_cast<double>(samples);
    RVector sq(samples);
    for (int s = 0; s < samples; ++s) {
      Complex total{0.0, 0.0};
      for (const Complex& t : terms[static_cast<std::size_t>(s)]) total += t;
      sq(s) = std::norm(total);
    }
    const double ms = sq.mean();
    const double rms = std::sqrt(ms);
    const double sd_sq = std::sqrt((sq.array() - ms).square().sum() / (n - 1.0));
    rep.rms_offdiagonal.push_back(rms);
    rep.rms_std_error.push_back(rms > 0.0 ? sd_sq / std::sqrt(n) / (2.0 * rms) : 0.0);

    std::vector<double> mre, mim, sre, sim;
    for (std::size_t p = 0; p < pairs; ++p) {
      RVector re(samples), im(samples);
      for (int s = 0; s < samples; ++s) {
        re(s) = terms[static_cast<std::size_t>(s)][p].real();
        im(s) = terms[static_cast<std::size_t>(s)][p].imag();
      }
      const double a = re.mean();
      const double b = im.mean();
      mre.push_back(a);
      mim.push_back(b);
      sre.push_back(std::sqrt((re.array() - a).square().sum() / (n - 1.0) / n));
      sim.push_back(std::sqrt((im.array() - b).square().sum() / (n - 1.0) / n));
    }
    rep.pair_mean_re.push_back(std::move(mre));
    rep.pair_mean_im.push_back(std::move(mim));
    rep.pair_std_error_re.push_back(std::move(sre));
    rep.pair_std_error_im.push_back(std::move(sim));
  }
  if (dims.size() >= 2) {
    std::vector<double> x(dims.begin(), dims.end());
    const auto [slope, err] = loglog_slope(x, rep.rms_offdiagonal);
    rep.fitted_exponent = slope;
    rep.exponent_std_error = err;
  }
  return rep;
}

HaarMarkovReport haar_markov_experiment(const std::vector<long>& dims, int samples, std::uint64_t seed) {
  check_dims(dims, samples, 3);
  HaarMarkovReport rep;
  rep.dims = dims;
  for (long d : dims) {
    const ProjectorSet family = coordinate_family(d, RankScheme::EqualThirds);
    const std::uint64_t dim_seed = derive_seed(seed, static_cast<std::uint64_t>(d));
    std::vector<double> dev(static_cast<std::size_t>(samples));
#pragma omp parallel for schedule(dynamic)
    for (int s = 0; s < samples; ++s) {
      const CMatrix u = haar_unitary(d, derive_seed(dim_seed, static_cast<std::uint64_t>(s)));
      dev[static_cast<std::size_t>(s)] = haar_markov_deviation(u, family, 0, 1, 2);
    }
    double mean = 0.0;
    for (double v : dev) mean += v;
    rep.mean_deviation.push_back(mean / static_cast<double>(samples));
    rep.median_deviation.push_back(median(dev));
    rep.deviations.push_back(std::move(dev));
  }
  return rep;
}

void HaarReport::write_csv(std::ostream& out) const {
  csv::write_row(out, {"dim", "rms_offdiagonal", "std_error"});
  for (std::size_t k = 0; k < dims.size(); ++k) {
    csv::write_row(out, {std::to_string(dims[k]), csv::number(rms_offdiagonal[k]),
                         csv::number(rms_std_error[k])});
  }
}

void HaarMarkovReport::write_csv(std::ostream& out) const {
  csv::write_row(out, {"dim", "median_deviation", "mean_deviation"});
  for (std::size_t k = 0; k < dims.size(); ++k) {
    csv::write_row(out, {std::to_string(dims[k]), csv::number(median_deviation[k]),
                         csv::number(mean_deviation[k])});
  }
}

}  // namespace qhist
