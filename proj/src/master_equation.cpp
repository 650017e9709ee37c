#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include "qhist/stochastic.hpp"

namespace qhist {

RMatrix integrate_master_equation(const RMatrix& generator, const RVector& p0,
                                  const std::vector<double>& t_grid, double dt) {
  if (!(dt > 0.0)) fail(ErrorKind::InvalidInput, "dt must be > 0");
  RMatrix out(static_cast<long>(t_grid.size()), p0.size());
  RVector p = p0;
  double t = 0.0;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const double span = t_grid[k] - t;
    const long steps = span > 0.0 ? static_cast<long>(std::ceil(span / dt - 1e-9)) : 0;
    if (steps > 0) {
      const double h = span / static_cast<double>(steps);
      for (long s = 0; s < steps; ++s) {
        const RVector k1 = generator * p;
        const RVector k2 = generator * (p + 0.5 * h * k1);
        const RVector k3 = generator * (p + 0.5 * h * k2);
        const RVector k4 = generator * (p + h * k3);
        p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      t = t_grid[k];
    }
    out.row(static_cast<long>(k)) = p.transpose();
  }
  return out;
}

namespace {

struct Edge {
  long from;
  long to;
};

RMatrix generator_from(const std::vector<Edge>& edges, const RVector& log_rates, long n) {
  RMatrix g = RMatrix::Zero(n, n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double k = std::exp(log_rates(static_cast<long>(e)));
    g(edges[e].to, edges[e].from) += k;
    g(edges[e].from, edges[e].from) -= k;
  }
  return g;
}

struct FitFunctor : Eigen::DenseFunctor<double> {
  FitFunctor(const std::vector<Edge>& e, const RMatrix& target, const RVector& start,
             const std::vector<double>& grid, double step)
      : Eigen::DenseFunctor<double>(static_cast<int>(e.size()), static_cast<int>(target.size())),
        edges(e), curves(target), p0(start), t_grid(grid), dt(step) {}

  int operator()(const InputType& x, ValueType& fvec) const {
    const RMatrix g = generator_from(edges, x, p0.size());
    const RMatrix model = integrate_master_equation(g, p0, t_grid, dt);
    const RMatrix diff = model - curves;
    fvec = Eigen::Map<const RVector>(diff.data(), diff.size());
    return 0;
  }

  const std::vector<Edge>& edges;
  const RMatrix& curves;
  RVector p0;
  const std::vector<double>& t_grid;
  double dt;
};

}  // namespace

RateFit fit_rate_equation(const RelaxationTable& curves, const RateFitOptions& options) {
  const long all = static_cast<long>(curves.labels.size());
  if (curves.t.size() < 3) fail(ErrorKind::InvalidInput, "rate fit needs >= 3 times");
  RMatrix target = curves.populations;
  if (options.condition_on_window) {
    for (long r = 0; r < target.rows(); ++r) {
      const double inside = 1.0 - curves.leakage[static_cast<std::size_t>(r)];
      if (!(inside > kProbabilityFloor)) fail(ErrorKind::SingularFit, "all probability has leaked");
      target.row(r) /= inside;
    }
  }
  // Labels that never carry population take no part in the fit.
  std::vector<long> active;
  double movement = 0.0;
  for (long c = 0; c < all; ++c) {
    if (target.col(c).cwiseAbs().maxCoeff() > 1e-14) active.push_back(c);
    for (long r = 0; r < target.rows(); ++r) {
      movement = std::max(movement, std::abs(target(r, c) - target(0, c)));
    }
  }
  if (movement < 1e-8) {
    fail(ErrorKind::SingularFit, "populations do not evolve (max change " + std::to_string(movement) +
                                     "); rate equation is undetermined");
  }
  const long n = static_cast<long>(active.size());
  if (n < 2) fail(ErrorKind::SingularFit, "fewer than 2 populated states");
  std::sort(active.begin(), active.end(), [&](long a, long b) {
    return curves.labels[static_cast<std::size_t>(a)] < curves.labels[static_cast<std::size_t>(b)];
  });
  RMatrix sub(target.rows(), n);
  for (long k = 0; k < n; ++k) sub.col(k) = target.col(active[static_cast<std::size_t>(k)]);

  std::vector<Edge> edges;
  for (long k = 0; k + 1 < n; ++k) {
    const Label a = curves.labels[static_cast<std::size_t>(active[static_cast<std::size_t>(k)])];
    const Label b = curves.labels[static_cast<std::size_t>(active[static_cast<std::size_t>(k + 1)])];
    if (b - a != 2) continue;
    edges.push_back({k, k + 1});
    edges.push_back({k + 1, k});
  }
  if (edges.empty()) fail(ErrorKind::SingularFit, "no nearest-neighbour pairs among the labels");

  RVector p0 = sub.row(0).transpose();
  p0 /= p0.sum();
  const double dt = options.tau_r / 2000.0;
  FitFunctor functor(edges, sub, p0, curves.t, dt);
  Eigen::NumericalDiff<FitFunctor> numeric(functor);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<FitFunctor>> lm(numeric);
  lm.setMaxfev(options.max_function_evals);
  lm.setXtol(1e-10);
  lm.setFtol(1e-12);
  RVector x = RVector::Constant(static_cast<long>(edges.size()), std::log(options.initial_rate));
  const Eigen::LevenbergMarquardtSpace::Status status = lm.minimize(x);

  RateFit fit;
  for (long k = 0; k < n; ++k) fit.states.push_back(curves.labels[static_cast<std::size_t>(active[static_cast<std::size_t>(k)])]);
  fit.generator = generator_from(edges, x, n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    fit.rates[{fit.states[static_cast<std::size_t>(edges[e].from)],
               fit.states[static_cast<std::size_t>(edges[e].to)]}] = std::exp(x(static_cast<long>(e)));
  }
  const RMatrix model = integrate_master_equation(fit.generator, p0, curves.t, dt);
  fit.master.t = curves.t;
  fit.master.labels = curves.labels;
  fit.master.populations = RMatrix::Zero(target.rows(), all);
  for (long k = 0; k < n; ++k) fit.master.populations.col(active[static_cast<std::size_t>(k)]) = model.col(k);
  fit.master.leakage.assign(curves.t.size(), 0.0);
  const RMatrix diff = fit.master.populations - target;
  fit.residual = diff.squaredNorm();
  fit.max_deviation = diff.cwiseAbs().maxCoeff();
  fit.converged = status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
                  status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation;
  return fit;
}

}  // namespace qhist
