#include "qhist/typicality.hpp"

#include <cmath>

#include "qhist/rng.hpp"

namespace qhist {

EstimateWithError jackknife(const RMatrix& columns,
                            const std::function<double(const RVector&)>& statistic) {
  const long n = columns.rows();
  if (n < 2) fail(ErrorKind::InvalidInput, "jackknife needs at least 2 samples");
  const RVector total = columns.colwise().sum().transpose();
  EstimateWithError e;
  e.samples = n;
  e.mean = statistic(total / static_cast<double>(n));
  RVector loo(n);
  for (long s = 0; s < n; ++s) {
    loo(s) = statistic((total - columns.row(s).transpose()) / static_cast<double>(n - 1));
  }
  const double m = loo.mean();
  const double var = (loo.array() - m).square().sum() * static_cast<double>(n - 1) / static_cast<double>(n);
  e.std_error = std::sqrt(var);
  return e;
}

CVector random_projected_state(const Projector& pi, std::uint64_t seed, std::uint64_t stream) {
  if (pi.rank() == 0) fail(ErrorKind::InvalidInput, "cannot sample from a rank-0 projector");
  CounterRng rng(seed, stream);
  CVector g(pi.dim());
  const double s = 1.0 / std::sqrt(2.0);
  for (long i = 0; i < g.size(); ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    g(i) = Complex(re * s, im * s);
  }
  CVector psi = pi.apply(g);
  const double norm = psi.norm();
  if (!(norm > 0.0)) fail(ErrorKind::ConstructionFault, "projected random state vanished");
  return psi / norm;
}

namespace {

constexpr int kMinSamples = 8;

void check_samples(int samples) {
  if (samples < kMinSamples) {
    fail(ErrorKind::InvalidInput, "typicality needs at least " + std::to_string(kMinSamples) + " samples");
  }
}

// Label rho is proportional to; typicality replaces rho by random pure states
// drawn from that projector.
Label single_label(const HistorySpec& spec, const ProjectorSet& events) {
  spec.validate(events);
  if (spec.initial_state.weights.size() != 1) {
    fail(ErrorKind::InvalidInput, "typicality estimates need rho proportional to a single projector");
  }
  return spec.initial_state.weights.begin()->first;
}

CMatrix sample_states(const Projector& pi, int samples, std::uint64_t seed) {
  CMatrix m(pi.dim(), samples);
  for (int s = 0; s < samples; ++s) m.col(s) = random_projected_state(pi, derive_seed(seed, static_cast<std::uint64_t>(s)));
  return m;
}

}  // namespace

EstimateWithError estimate_history_probability(const HistorySpec& spec, const ProjectorSet& events,
                                               const Propagator& u, int samples, std::uint64_t seed) {
  check_samples(samples);
  const Label l = single_label(spec, events);
  const CMatrix states = sample_states(events.at(l), samples, seed);
  RMatrix cols(samples, 1);
  cols.col(0) = history_column_weights(spec.slots, u, events, states);
  EstimateWithError e = jackknife(cols, [](const RVector& m) { return m(0); });
  e.seed = seed;
  return e;
}

EstimateWithError estimate_nonconsistency(const HistorySpec& path, const ProjectorSet& events,
                                          const Propagator& u, int samples, std::uint64_t seed) {
  check_samples(samples);
  if (path.measured_count() == path.slots.size()) {
    fail(ErrorKind::InvalidInput, "nonconsistency needs at least one unmeasured slot");
  }
  const Label l = single_label(path, events);
  const CMatrix states = sample_states(events.at(l), samples, seed);
  RMatrix cols(samples, 2);
  cols.col(0) = history_column_weights(path.slots, u, events, states);
  cols.col(1) = gap_summed_column_weights(path.slots, u, events, states);
  if (!(cols.col(1).mean() > kProbabilityFloor)) {
    fail(ErrorKind::UndefinedConditional, "summed history probability below the floor for " +
                                              format_path(path.slots));
  }
  EstimateWithError e = jackknife(cols, [](const RVector& m) { return std::abs(1.0 - m(0) / m(1)); });
  e.seed = seed;
  return e;
}

EstimateWithError estimate_nonmarkovianity(const HistorySpec& path, const ProjectorSet& events,
                                           const Propagator& u, int samples, std::uint64_t seed) {
  check_samples(samples);
  if (path.slots.size() < 3 || path.measured_count() != path.slots.size()) {
    fail(ErrorKind::InvalidInput, "nonmarkovianity needs a fully measured path of >= 3 slots");
  }
  const Label l = single_label(path, events);
  std::vector<Slot> full = path.slots;
  std::vector<Slot> full_head(full.begin(), full.end() - 1);
  std::vector<Slot> tail(full.begin() + 1, full.end());
  std::vector<Slot> tail_head(tail.begin(), tail.end() - 1);

  const CMatrix long_states = sample_states(events.at(l), samples, seed);
  const CMatrix short_states = sample_states(events.at(tail.front().label), samples,
                                             derive_seed(seed, 0x5107));
  RMatrix cols(samples, 4);
  cols.col(0) = history_column_weights(full, u, events, long_states);
  cols.col(1) = history_column_weights(full_head, u, events, long_states);
  cols.col(2) = history_column_weights(tail, u, events, short_states);
  cols.col(3) = history_column_weights(tail_head, u, events, short_states);
  const RVector means = cols.colwise().mean().transpose();
  if (!(means(1) > kProbabilityFloor) || !(means(3) > kProbabilityFloor) ||
      !(means(2) > kProbabilityFloor)) {
    fail(ErrorKind::UndefinedConditional, "conditional undefined for " + format_path(path.slots));
  }
  EstimateWithError e = jackknife(cols, [](const RVector& m) {
    return std::abs(1.0 - (m(0) / m(1)) / (m(2) / m(3)));
  });
  e.seed = seed;
  return e;
}

std::pair<double, double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorKind::InvalidInput, "slope needs >= 2 points");
  const long n = static_cast<long>(x.size());
  RVector lx(n), ly(n);
  for (long i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) fail(ErrorKind::InvalidInput, "log-log fit needs positive data");
    lx(i) = std::log(x[i]);
    ly(i) = std::log(y[i]);
  }
  const double mx = lx.mean();
  const double my = ly.mean();
  const double sxx = (lx.array() - mx).square().sum();
  if (!(sxx > 0.0)) fail(ErrorKind::SingularFit, "log-log fit with identical abscissae");
  const double slope = ((lx.array() - mx) * (ly.array() - my)).sum() / sxx;
  if (n == 2) return {slope, 0.0};
  const double rss = ((ly.array() - my) - slope * (lx.array() - mx)).square().sum();
  return {slope, std::sqrt(rss / static_cast<double>(n - 2) / sxx)};
}

}  // namespace qhist
