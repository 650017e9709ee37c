#include "qhist/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>

#include "qhist/csv.hpp"
#include "qhist/projectors.hpp"
#include "qhist/rng.hpp"
#include "qhist/spectral.hpp"
#include "qhist/stochastic.hpp"
#include "qhist/typicality.hpp"

namespace qhist {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "relax",         "tau_sweep",        "beta_sweep",       "size_scaling", "manystep_uniform",
      "manystep_random", "haar_consistency", "haar_markov", "estimate"};
  return names;
}

bool is_randomized(const std::string& experiment) {
  return experiment == "manystep_random" || experiment == "haar_consistency" ||
         experiment == "haar_markov" || experiment == "estimate";
}

// Hash of the settings that determine the results.
static std::uint64_t config_hash(json cfg) {
  cfg.erase("output_dir");
  cfg.erase("threads");
  return fnv1a(cfg.dump());
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

json slots_to_json(const std::vector<Slot>& slots) {
  json a = json::array();
  for (const Slot& s : slots) {
    if (!s.measured) {
      a.push_back("--");
    } else if (s.label == kComplement) {
      a.push_back("complement");
    } else {
      a.push_back(s.label);
    }
  }
  return a;
}

std::vector<Slot> slots_from_json(const json& j) {
  HistorySpec spec;
  from_json(json{{"slots", j}}, spec);
  return spec.slots;
}

long sector_dimension(int spins) {
  // C(N, N/2) for the total_sz = 0 sector
  long double c = 1.0;
  for (int k = 1; k <= spins / 2; ++k) c = c * (spins - spins / 2 + k) / k;
  return static_cast<long>(std::llround(c));
}

template <class T>
void read_field(const json& j, const char* key, T& out, std::vector<Diagnostic>& diags) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const std::exception& e) {
    diags.push_back({key, std::string("wrong type: ") + e.what()});
  }
}

}  // namespace

ExperimentConfig parse_config(const json& j, std::vector<Diagnostic>& diags) {
  ExperimentConfig c;
  if (!j.is_object()) {
    diags.push_back({"<root>", "config must be a JSON object"});
    return c;
  }
  read_field(j, "experiment", c.experiment, diags);
  if (j.contains("model")) {
    json m = j.at("model");
    if (m.contains("N")) {
      try {
        const int spins = m.at("N").get<int>();
        if (spins % 4 != 0 || spins < 4) {
          diags.push_back({"model.N", "N must be a multiple of 4"});
          m.erase("N");
        }
      } catch (const std::exception&) {
        diags.push_back({"model.N", "N must be an integer"});
        m.erase("N");
      }
    }
    try {
      c.model = m.get<ModelParams>();
    } catch (const std::exception& e) {
      diags.push_back({"model", e.what()});
    }
  }
  read_field(j, "tau_r", c.tau_r, diags);
  read_field(j, "tau_fraction", c.tau_fraction, diags);
  read_field(j, "tau_fractions", c.tau_fractions, diags);
  read_field(j, "betas", c.betas, diags);
  read_field(j, "sizes", c.sizes, diags);
  for (const char* key : {"consistency_path", "markov_path"}) {
    if (!j.contains(key)) continue;
    try {
      (std::string(key) == "consistency_path" ? c.consistency_path : c.markov_path) =
          slots_from_json(j.at(key));
    } catch (const std::exception& e) {
      diags.push_back({key, e.what()});
    }
  }
  read_field(j, "initial_label", c.initial_label, diags);
  read_field(j, "t_max", c.t_max, diags);
  read_field(j, "t_step", c.t_step, diags);
  read_field(j, "fit_rates", c.fit_rates, diags);
  read_field(j, "uniform_label", c.uniform_label, diags);
  read_field(j, "lambda_max", c.lambda_max, diags);
  read_field(j, "trajectories", c.trajectories, diags);
  if (j.contains("seed") && !j.at("seed").is_null()) {
    if (j.at("seed").is_number_unsigned()) {
      c.seed = j.at("seed").get<std::uint64_t>();
    } else {
      diags.push_back({"seed", "seed must be a non-negative integer"});
    }
  }
  read_field(j, "samples", c.samples, diags);
  read_field(j, "dims", c.dims, diags);
  read_field(j, "rank_scheme", c.rank_scheme, diags);
  read_field(j, "output_dir", c.output_dir, diags);
  read_field(j, "threads", c.threads, diags);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j{{"experiment", c.experiment},
         {"model", c.model},
         {"tau_r", c.tau_r},
         {"tau_fraction", c.tau_fraction},
         {"tau_fractions", c.tau_fractions},
         {"betas", c.betas},
         {"sizes", c.sizes},
         {"consistency_path", slots_to_json(c.consistency_path)},
         {"markov_path", slots_to_json(c.markov_path)},
         {"initial_label", c.initial_label},
         {"t_max", c.t_max},
         {"t_step", c.t_step},
         {"fit_rates", c.fit_rates},
         {"uniform_label", c.uniform_label},
         {"lambda_max", c.lambda_max},
         {"trajectories", c.trajectories},
         {"samples", c.samples},
         {"dims", c.dims},
         {"rank_scheme", c.rank_scheme},
         {"output_dir", c.output_dir},
         {"threads", c.threads}};
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  return j;
}

std::vector<Diagnostic> validate(const ExperimentConfig& c) {
  std::vector<Diagnostic> d;
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end()) {
    d.push_back({"experiment", "unknown experiment '" + c.experiment + "'"});
  }
  const ModelParams& m = c.model;
  if (m.n < 1) d.push_back({"model.n", "must be >= 1"});
  if (!(m.J > 0.0)) d.push_back({"model.J", "must be > 0"});
  if (!(m.beta >= 0.0)) d.push_back({"model.beta", "must be >= 0"});
  if (!(m.e_min < m.e_max)) d.push_back({"model.energy_window", "E_min must be < E_max"});
  if (std::abs(m.total_sz) > 1e-12) d.push_back({"model.total_sz", "only the total_sz = 0 sector is supported"});
  if (!(c.tau_r > 0.0)) d.push_back({"tau_r", "must be > 0"});
  if (!(c.tau_fraction > 0.0)) d.push_back({"tau_fraction", "must be > 0"});
  for (double f : c.tau_fractions) {
    if (!(f > 0.0)) d.push_back({"tau_fractions", "entries must be > 0"});
  }
  for (double b : c.betas) {
    if (!(b >= 0.0)) d.push_back({"betas", "entries must be >= 0"});
  }
  for (int n : c.sizes) {
    if (n < 4 || n % 4 != 0) d.push_back({"sizes", "N must be a multiple of 4 (got " + std::to_string(n) + ")"});
  }
  const auto gaps = std::count_if(c.consistency_path.begin(), c.consistency_path.end(),
                                  [](const Slot& s) { return !s.measured; });
  if (c.consistency_path.size() < 2 || gaps == 0 || !c.consistency_path.front().measured) {
    d.push_back({"consistency_path", "needs a measured first slot and at least one '--'"});
  }
  if (c.markov_path.size() < 3 ||
      std::any_of(c.markov_path.begin(), c.markov_path.end(), [](const Slot& s) { return !s.measured; })) {
    d.push_back({"markov_path", "needs >= 3 measured slots"});
  }
  if (!(c.t_step > 0.0)) d.push_back({"t_step", "must be > 0"});
  if (!(c.t_max >= 0.0)) d.push_back({"t_max", "must be >= 0"});
  if (c.lambda_max < 1) d.push_back({"lambda_max", "must be >= 1"});
  if (c.trajectories < 1) d.push_back({"trajectories", "must be >= 1"});
  if (c.threads < 0) d.push_back({"threads", "must be >= 0"});
  if (c.output_dir.empty()) d.push_back({"output_dir", "must not be empty"});

  bool needs_seed = is_randomized(c.experiment);
  if (c.experiment == "size_scaling") {
    for (int n : c.sizes) {
      if (n >= 4 && n % 4 == 0 && sector_dimension(n) > dense_dimension_limit()) needs_seed = true;
    }
  }
  if (needs_seed && !c.seed) d.push_back({"seed", "randomized experiment '" + c.experiment + "' needs a seed"});
  if (c.experiment == "haar_consistency" || c.experiment == "haar_markov") {
    if (c.samples < 2) d.push_back({"samples", "must be >= 2"});
    if (c.dims.empty()) d.push_back({"dims", "must not be empty"});
    for (long dim : c.dims) {
      if (dim < 3) d.push_back({"dims", "entries must be >= 3"});
    }
    if (c.rank_scheme != "thirds" && c.rank_scheme != "halves") {
      d.push_back({"rank_scheme", "must be 'thirds' or 'halves'"});
    }
  }
  if ((c.experiment == "estimate" || c.experiment == "size_scaling") && c.samples < 8) {
    d.push_back({"samples", "typicality estimates need >= 8 samples"});
  }
  return d;
}

double empirical_relaxation_time(const std::vector<double>& t, const RMatrix& populations, double band) {
  const long rows = populations.rows();
  if (rows < 2) return -1.0;
  const RVector late = populations.bottomRows(rows - rows / 2).colwise().mean().transpose();
  for (long r = 0; r < rows; ++r) {
    if ((populations.row(r).transpose() - late).cwiseAbs().maxCoeff() < band) {
      return t[static_cast<std::size_t>(r)];
    }
  }
  return -1.0;
}

namespace {

// Hamiltonian, events and propagators of one model instance.
struct System {
  ModelParams params;
  long dim = 0;
  bool dense = true;
  ProjectorSet events;
  Spectrum spectrum;
  std::shared_ptr<const LinearOperator> h;

  Propagator step(double tau) const {
    return dense ? propagator(spectrum, tau) : Propagator::krylov(h, tau);
  }
};

System build_system(const ModelParams& params, bool allow_krylov) {
  params.validate();
  System s;
  s.params = params;
  const SectorBasis basis = build_basis(params.num_spins(), params.total_sz);
  s.dim = basis.dim();
  const LinearOperator h0 = build_hamiltonian(params, basis, false);
  const LinearOperator x = build_observable_X(basis, params.n);
  const EnergyWindow window{params.e_min * params.J, params.e_max * params.J};
  s.h = std::make_shared<const LinearOperator>(build_hamiltonian(params, basis, true));
  if (s.dim <= dense_dimension_limit()) {
    const Spectrum s0 = diagonalize_blocked(h0, x);
    s.events = build_event_projectors(energy_window_projector(s0, window), x);
    s.spectrum = diagonalize(*s.h);
    return s;
  }
  if (!allow_krylov) {
    fail(ErrorKind::ResourceLimit,
         "sector dimension " + std::to_string(s.dim) + " exceeds the dense threshold " +
             std::to_string(dense_dimension_limit()) +
             "; this experiment needs exact diagonalization. Use size_scaling or estimate, which fall "
             "back to Krylov propagation with typicality estimates, or raise QHIST_DENSE_MAX_DIM");
  }
  s.dense = false;
  s.events = event_projectors_from_blocks(block_diagonalize(h0, x), window, s.dim);
  return s;
}

HistorySpec path_spec(const std::vector<Slot>& slots, double tau, const ProjectorSet& events) {
  HistorySpec spec;
  spec.slots = slots;
  spec.tau = tau;
  spec.initial_state = InitialState::uniform_on(slots.front().label, events);
  return spec;
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream out;
  out << std::setprecision(digits) << v;
  return out.str();
}

class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void csv(const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) fail(ErrorKind::InvalidInput, "cannot write " + (dir_ / name).string());
    body(out);
    files_.push_back(name);
  }
  const std::vector<std::string>& files() const { return files_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

using Clock = std::chrono::steady_clock;

struct Context {
  Context(const ExperimentConfig& c, Writer& w) : cfg(c), out(w) {}
  const ExperimentConfig& cfg;
  Writer& out;
  std::ostringstream summary;
  json timings = json::object();
  json seeds = json::object();

  template <class F>
  auto timed(const std::string& stage, F&& f) {
    const auto t0 = Clock::now();
    auto result = f();
    timings[stage] = std::chrono::duration<double>(Clock::now() - t0).count();
    return result;
  }
};

std::vector<double> default_tau_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 20; ++k) g.push_back(0.05 * k);
  return g;
}

void run_relax(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const System sys = ctx.timed("diagonalize", [&] { return build_system(c.model, false); });
  std::vector<double> grid;
  const long steps = static_cast<long>(std::floor(c.t_max / c.t_step + 1e-9));
  for (long k = 0; k <= steps; ++k) grid.push_back(static_cast<double>(k) * c.t_step);
  const RelaxationTable table = ctx.timed("relaxation", [&] {
    return relaxation_curves(sys.spectrum, sys.events, InitialState::uniform_on(c.initial_label, sys.events), grid);
  });
  ctx.out.csv("relax.csv", [&](std::ostream& o) { table.write_csv(o); });
  const double leak = *std::max_element(table.leakage.begin(), table.leakage.end());
  ctx.summary << "sector dimension: " << sys.dim << "\n";
  ctx.summary << "max leakage over t <= " << c.t_max << ": " << fixed(leak) << "\n";
  ctx.summary << "empirical relaxation time (band 0.02): "
              << fixed(empirical_relaxation_time(table.t, table.populations)) << " (configured tau_r "
              << c.tau_r << ")\n";
  if (!c.fit_rates) return;
  try {
    RateFitOptions opts;
    opts.tau_r = c.tau_r;
    const RateFit fit = ctx.timed("rate_fit", [&] { return fit_rate_equation(table, opts); });
    ctx.out.csv("master.csv", [&](std::ostream& o) { fit.master.write_csv(o); });
    ctx.out.csv("rates.csv", [&](std::ostream& o) {
      csv::write_row(o, {"from", "to", "rate"});
      for (const auto& [edge, k] : fit.rates) {
        csv::write_row(o, {label_name(edge.first), label_name(edge.second), csv::number(k)});
      }
    });
    ctx.summary << "rate-equation fit: max deviation " << fixed(fit.max_deviation) << ", converged "
                << (fit.converged ? "yes" : "no") << "\n";
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SingularFit) throw;
    ctx.summary << "rate-equation fit skipped: " << e.what() << "\n";
  }
}

void run_tau_sweep(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const std::vector<double> grid = c.tau_fractions.empty() ? default_tau_grid() : c.tau_fractions;
  struct Row {
    double beta, frac, tau, cbar, mbar;
  };
  std::vector<Row> rows;
  for (double beta : c.betas) {
    ModelParams p = c.model;
    p.beta = beta;
    const System sys = ctx.timed("diagonalize_beta_" + fixed(beta), [&] { return build_system(p, false); });
    for (double f : grid) {
      const double tau = f * c.tau_r;
      const Propagator u = sys.step(tau);
      const double cb = nonconsistency(path_spec(c.consistency_path, tau, sys.events), sys.events, u);
      const double mb = nonmarkovianity(path_spec(c.markov_path, tau, sys.events), sys.events, u);
      rows.push_back({beta, f, tau, cb, mb});
    }
  }
  ctx.out.csv("tau_sweep.csv", [&](std::ostream& o) {
    csv::write_row(o, {"beta", "tau_over_tau_r", "tau", "cbar", "mbar"});
    for (const Row& r : rows) {
      csv::write_row(o, {csv::number(r.beta), csv::number(r.frac), csv::number(r.tau), csv::number(r.cbar),
                         csv::number(r.mbar)});
    }
  });
  ctx.summary << "paths: C " << format_path(c.consistency_path) << ", M " << format_path(c.markov_path) << "\n";
  for (double beta : c.betas) {
    double cmax = 0.0, mmax = 0.0;
    for (const Row& r : rows) {
      if (r.beta == beta && r.frac >= 0.1 - 1e-12) {
        cmax = std::max(cmax, r.cbar);
        mmax = std::max(mmax, r.mbar);
      }
    }
    ctx.summary << "beta " << beta << ": max over tau >= 0.1 tau_r of C " << fixed(cmax) << ", M " << fixed(mmax)
                << "\n";
  }
}

void run_beta_sweep(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const double tau = c.tau_fraction * c.tau_r;
  ctx.out.csv("beta_sweep.csv", [&](std::ostream& o) {
    csv::write_row(o, {"beta", "tau", "cbar", "mbar"});
    for (double beta : c.betas) {
      ModelParams p = c.model;
      p.beta = beta;
      const System sys = ctx.timed("beta_" + fixed(beta), [&] { return build_system(p, false); });
      const Propagator u = sys.step(tau);
      const double cb = nonconsistency(path_spec(c.consistency_path, tau, sys.events), sys.events, u);
      const double mb = nonmarkovianity(path_spec(c.markov_path, tau, sys.events), sys.events, u);
      csv::write_row(o, {csv::number(beta), csv::number(tau), csv::number(cb), csv::number(mb)});
      ctx.summary << "beta " << beta << ": C " << fixed(cb) << ", M " << fixed(mb) << "\n";
    }
  });
}

void run_size_scaling(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const double tau = c.tau_fraction * c.tau_r;
  ctx.out.csv("size_scaling.csv", [&](std::ostream& o) {
    csv::write_row(o, {"N", "dim", "method", "samples", "cbar", "cbar_std_error", "mbar", "mbar_std_error"});
    for (int spins : c.sizes) {
      ModelParams p = c.model;
      p.n = spins / 4;
      const System sys = ctx.timed("N_" + std::to_string(spins), [&] { return build_system(p, true); });
      const Propagator u = sys.step(tau);
      const HistorySpec cs = path_spec(c.consistency_path, tau, sys.events);
      const HistorySpec ms = path_spec(c.markov_path, tau, sys.events);
      if (sys.dense) {
        const double cb = nonconsistency(cs, sys.events, u);
        const double mb = nonmarkovianity(ms, sys.events, u);
        csv::write_row(o, {std::to_string(spins), std::to_string(sys.dim), "exact", "0", csv::number(cb), "0",
                           csv::number(mb), "0"});
        ctx.summary << "N=" << spins << " (exact): C " << fixed(cb) << ", M " << fixed(mb) << "\n";
      } else {
        const std::uint64_t seed = derive_seed(*c.seed, static_cast<std::uint64_t>(spins));
        ctx.seeds["N_" + std::to_string(spins)] = seed;
        const EstimateWithError ce = estimate_nonconsistency(cs, sys.events, u, c.samples, seed);
        const EstimateWithError me = estimate_nonmarkovianity(ms, sys.events, u, c.samples, derive_seed(seed, 1));
        csv::write_row(o, {std::to_string(spins), std::to_string(sys.dim), "typicality", std::to_string(c.samples),
                           csv::number(ce.mean), csv::number(ce.std_error), csv::number(me.mean),
                           csv::number(me.std_error)});
        ctx.summary << "N=" << spins << " (typicality, " << c.samples << " samples): C " << fixed(ce.mean) << " +- "
                    << fixed(ce.std_error, 2) << ", M " << fixed(me.mean) << " +- " << fixed(me.std_error, 2) << "\n";
      }
    }
  });
}

void run_manystep_uniform(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const double tau = c.tau_fraction * c.tau_r;
  const System sys = ctx.timed("diagonalize", [&] { return build_system(c.model, false); });
  const Propagator u = sys.step(tau);
  const std::vector<Label> history(static_cast<std::size_t>(c.lambda_max + 2), c.uniform_label);
  const ManyStepReport rep = ctx.timed("manystep", [&] { return manystep_analysis(history, sys.events, u, c.lambda_max); });
  ctx.out.csv("manystep_uniform.csv", [&](std::ostream& o) { rep.write_csv(o); });
  ctx.out.csv("transition_matrix.csv", [&](std::ostream& o) { transition_matrix(sys.events, u).write_csv(o); });
  ctx.summary << "uniform history x=" << label_name(c.uniform_label) << ", tau=" << tau << "\n";
  ctx.summary << "omega non-decreasing: " << (rep.monotone ? "yes" : "no") << "\n";
  if (!rep.mbar_lambda.empty()) {
    ctx.summary << "M_1 = " << fixed(rep.mbar_lambda.front()) << ", M_" << rep.lambda_values.back() << " = "
                << fixed(rep.mbar_lambda.back()) << "\n";
  }
  if (rep.truncated) ctx.summary << "truncated: " << rep.reason << "\n";
}

void run_manystep_random(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const double tau = c.tau_fraction * c.tau_r;
  const System sys = ctx.timed("diagonalize", [&] { return build_system(c.model, false); });
  const Propagator u = sys.step(tau);
  const TransitionMatrix tm = transition_matrix(sys.events, u);
  ctx.out.csv("transition_matrix.csv", [&](std::ostream& o) { tm.write_csv(o); });
  std::vector<Trajectory> trajs;
  for (int k = 0; k < c.trajectories; ++k) {
    trajs.push_back(sample_trajectory(tm, c.uniform_label, c.lambda_max + 2,
                                      derive_seed(*c.seed, static_cast<std::uint64_t>(k))));
  }
  ctx.out.csv("trajectories.csv", [&](std::ostream& o) {
    csv::write_row(o, {"trajectory", "step", "label"});
    for (std::size_t k = 0; k < trajs.size(); ++k) {
      for (std::size_t s = 0; s < trajs[k].outcomes.size(); ++s) {
        csv::write_row(o, {std::to_string(k), std::to_string(s), label_name(trajs[k].outcomes[s])});
      }
    }
  });
  for (std::size_t k = 0; k < trajs.size(); ++k) {
    const ManyStepReport rep = manystep_analysis(trajs[k].outcomes, sys.events, u, c.lambda_max);
    ctx.out.csv("manystep_random_" + std::to_string(k) + ".csv", [&](std::ostream& o) { rep.write_csv(o); });
    std::vector<Slot> slots;
    for (Label l : trajs[k].outcomes) slots.push_back(Slot::measure(l));
    ctx.summary << "trajectory " << k << ": " << format_path(slots);
    if (!rep.mbar_lambda.empty()) {
      const auto peak = std::max_element(rep.mbar_lambda.begin(), rep.mbar_lambda.end());
      ctx.summary << "; max M at lambda " << rep.lambda_values[static_cast<std::size_t>(peak - rep.mbar_lambda.begin())]
                  << " = " << fixed(*peak);
    }
    if (rep.truncated) ctx.summary << "; truncated: " << rep.reason;
    ctx.summary << "\n";
  }
}

RankScheme parse_scheme(const std::string& s) {
  return s == "halves" ? RankScheme::EqualHalves : RankScheme::EqualThirds;
}

void run_haar_consistency(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const HaarReport rep = ctx.timed("haar", [&] {
    return haar_consistency_experiment(c.dims, parse_scheme(c.rank_scheme), c.samples, *c.seed);
  });
  ctx.out.csv("haar_consistency.csv", [&](std::ostream& o) { rep.write_csv(o); });
  ctx.out.csv("haar_pair_means.csv", [&](std::ostream& o) {
    csv::write_row(o, {"dim", "pair", "mean_re", "std_error_re", "mean_im", "std_error_im"});
    for (std::size_t k = 0; k < rep.dims.size(); ++k) {
      for (std::size_t p = 0; p < rep.pair_mean_re[k].size(); ++p) {
        csv::write_row(o, {std::to_string(rep.dims[k]), std::to_string(p), csv::number(rep.pair_mean_re[k][p]),
                           csv::number(rep.pair_std_error_re[k][p]), csv::number(rep.pair_mean_im[k][p]),
                           csv::number(rep.pair_std_error_im[k][p])});
      }
    }
  });
  ctx.summary << "fitted exponent of RMS off-diagonal functional vs d: " << fixed(rep.fitted_exponent) << " +- "
              << fixed(rep.exponent_std_error, 2) << "\n";
}

void run_haar_markov(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const HaarMarkovReport rep = ctx.timed("haar", [&] { return haar_markov_experiment(c.dims, c.samples, *c.seed); });
  ctx.out.csv("haar_markov.csv", [&](std::ostream& o) { rep.write_csv(o); });
  for (std::size_t k = 0; k < rep.dims.size(); ++k) {
    ctx.summary << "d=" << rep.dims[k] << ": median deviation " << fixed(rep.median_deviation[k]) << "\n";
  }
}

void run_estimate(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const double tau = c.tau_fraction * c.tau_r;
  const System sys = ctx.timed("setup", [&] { return build_system(c.model, true); });
  const Propagator u = sys.step(tau);
  const HistorySpec cs = path_spec(c.consistency_path, tau, sys.events);
  const HistorySpec ms = path_spec(c.markov_path, tau, sys.events);
  const std::uint64_t seed = *c.seed;
  const EstimateWithError pe = estimate_history_probability(cs, sys.events, u, c.samples, seed);
  const EstimateWithError ce = estimate_nonconsistency(cs, sys.events, u, c.samples, seed);
  const EstimateWithError me = estimate_nonmarkovianity(ms, sys.events, u, c.samples, derive_seed(seed, 1));
  ctx.seeds["probability"] = seed;
  ctx.seeds["nonconsistency"] = seed;
  ctx.seeds["nonmarkovianity"] = derive_seed(seed, 1);
  const auto exact = [&](const std::function<double()>& f) {
    return sys.dense ? csv::number(f()) : std::string("nan");
  };
  ctx.out.csv("estimate.csv", [&](std::ostream& o) {
    csv::write_row(o, {"quantity", "path", "exact", "estimate", "std_error", "samples"});
    csv::write_row(o, {"probability", format_path(cs.slots),
                       exact([&] { return history_probability(cs, u, sys.events).probability; }),
                       csv::number(pe.mean), csv::number(pe.std_error), std::to_string(c.samples)});
    csv::write_row(o, {"cbar", format_path(cs.slots), exact([&] { return nonconsistency(cs, sys.events, u); }),
                       csv::number(ce.mean), csv::number(ce.std_error), std::to_string(c.samples)});
    csv::write_row(o, {"mbar", format_path(ms.slots), exact([&] { return nonmarkovianity(ms, sys.events, u); }),
                       csv::number(me.mean), csv::number(me.std_error), std::to_string(c.samples)});
  });
  ctx.summary << "N=" << c.model.num_spins() << " (" << (sys.dense ? "dense" : "Krylov") << " propagation)\n";
  ctx.summary << "P " << fixed(pe.mean) << " +- " << fixed(pe.std_error, 2) << "\n";
  ctx.summary << "C " << fixed(ce.mean) << " +- " << fixed(ce.std_error, 2) << "\n";
  ctx.summary << "M " << fixed(me.mean) << " +- " << fixed(me.std_error, 2) << "\n";
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

}  // namespace

RunResult run(const ExperimentConfig& config) {
  const std::vector<Diagnostic> diags = validate(config);
  if (!diags.empty()) {
    std::string msg = "invalid config:";
    for (const Diagnostic& d : diags) msg += "\n  " + d.field + ": " + d.reason;
    fail(ErrorKind::InvalidInput, msg);
  }
  if (config.threads > 0) omp_set_num_threads(config.threads);
  const auto t0 = Clock::now();
  Writer writer(config.output_dir);
  Context ctx{config, writer};
  ctx.summary << "experiment: " << config.experiment << "\n";
  ctx.summary << "model: N=" << config.model.num_spins() << ", J=" << config.model.J << ", delta=" << config.model.delta
              << ", beta=" << config.model.beta << ", window [" << config.model.e_min << ", " << config.model.e_max
              << "]\n";
  static const std::map<std::string, void (*)(Context&)> table{
      {"relax", run_relax},
      {"tau_sweep", run_tau_sweep},
      {"beta_sweep", run_beta_sweep},
      {"size_scaling", run_size_scaling},
      {"manystep_uniform", run_manystep_uniform},
      {"manystep_random", run_manystep_random},
      {"haar_consistency", run_haar_consistency},
      {"haar_markov", run_haar_markov},
      {"estimate", run_estimate},
  };
  table.at(config.experiment)(ctx);

  const json cfg = config_to_json(config);
  RunResult result;
  result.summary = ctx.summary.str();
  {
    std::ofstream out(writer.dir() / "summary.txt", std::ios::binary);
    out << result.summary;
  }
  result.files = writer.files();
  result.files.push_back("summary.txt");
  ctx.timings["total"] = std::chrono::duration<double>(Clock::now() - t0).count();
  result.manifest = json{{"version", kVersion},
                         {"experiment", config.experiment},
                         {"config", cfg},
                         {"config_hash", hex64(config_hash(cfg))},
                         {"seed", config.seed ? json(*config.seed) : json(nullptr)},
                         {"derived_seeds", ctx.seeds},
                         {"dense_threshold", dense_dimension_limit()},
                         {"threads", omp_get_max_threads()},
                         {"files", result.files},
                         {"wall_time_s", ctx.timings}};
  if (config.experiment == "tau_sweep" || config.experiment == "beta_sweep") {
    result.manifest["betas_source"] = config.betas == ExperimentConfig{}.betas ? "default choice" : "config";
  }
  std::ofstream out(writer.dir() / "manifest.json", std::ios::binary);
  out << result.manifest.dump(2) << "\n";
  return result;
}

}  // namespace qhist
