#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qhist/experiment.hpp"

using namespace qhist;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool has_field(const std::vector<Diagnostic>& d, const std::string& field) {
  for (const Diagnostic& x : d)
    if (x.field == field) return true;
  return false;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qhist_test_" + name);
  fs::remove_all(p);
  return p;
}

// Small configuration for each experiment.
ExperimentConfig tiny(const std::string& experiment, const fs::path& out) {
  std::vector<Diagnostic> d;
  ExperimentConfig c = parse_config(nlohmann::json{{"experiment", experiment}, {"model", {{"N", 8}}}}, d);
  REQUIRE(d.empty());
  c.output_dir = out.string();
  c.tau_fractions = {0.1, 0.5};
  c.betas = {0.5, 1.0};
  c.sizes = {4, 8};
  c.t_max = 10.0;
  c.lambda_max = 3;
  c.trajectories = 2;
  c.samples = 12;
  c.dims = {6, 12};
  c.seed = 17;
  return c;
}

}  // namespace

TEST_CASE("config diagnostics name the offending field") {
  std::vector<Diagnostic> d;
  parse_config(nlohmann::json::parse(R"({"experiment": "relax", "model": {"N": 14}})"), d);
  CHECK(has_field(d, "model.N"));

  d.clear();
  ExperimentConfig c = parse_config(nlohmann::json::parse(R"({"experiment": "relax"})"), d);
  CHECK(d.empty());
  CHECK(validate(c).empty());
  c.model.e_min = 1.0;
  CHECK(has_field(validate(c), "model.energy_window"));

  d.clear();
  c = parse_config(nlohmann::json::parse(R"({"experiment": "haar_consistency"})"), d);
  CHECK(has_field(validate(c), "seed"));
  c.seed = 1;
  CHECK(validate(c).empty());

  d.clear();
  parse_config(nlohmann::json::parse(R"({"experiment": "relax", "seed": -3})"), d);
  CHECK(has_field(d, "seed"));

  c = parse_config(nlohmann::json::parse(R"({"experiment": "nope"})"), d);
  CHECK(has_field(validate(c), "experiment"));

  c = parse_config(nlohmann::json::parse(R"({"experiment": "tau_sweep", "consistency_path": [2, 0, 0]})"), d);
  CHECK(has_field(validate(c), "consistency_path"));

  // exact sizes need no seed; sizes past the dense limit do
  c = parse_config(nlohmann::json::parse(R"({"experiment": "size_scaling", "sizes": [8, 12]})"), d);
  CHECK_FALSE(has_field(validate(c), "seed"));
  c.sizes = {12, 16};
  CHECK(has_field(validate(c), "seed"));
}

TEST_CASE("config JSON round trip") {
  std::vector<Diagnostic> d;
  ExperimentConfig c = parse_config(nlohmann::json::parse(R"({"experiment": "estimate", "seed": 4,
      "consistency_path": [2, "--", "--", 0], "model": {"N": 8, "beta": 0.2}})"), d);
  REQUIRE(d.empty());
  const nlohmann::json j = config_to_json(c);
  const ExperimentConfig back = parse_config(j, d);
  CHECK(d.empty());
  CHECK(config_to_json(back) == j);
  CHECK(back.consistency_path.size() == 4);
  CHECK(*back.seed == 4);
  CHECK(back.model.beta == 0.2);
}

TEST_CASE("FNV-1a") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("empirical relaxation time") {
  std::vector<double> t;
  RMatrix p(21, 2);
  for (int k = 0; k <= 20; ++k) {
    t.push_back(k);
    const double v = k < 5 ? 1.0 - 0.1 * k : 0.5;
    p(k, 0) = v;
    p(k, 1) = 1.0 - v;
  }
  CHECK(empirical_relaxation_time(t, p, 0.02) == doctest::Approx(5.0));
}

TEST_CASE("every experiment runs and is reproducible") {
  for (const std::string& name : experiment_names()) {
    INFO(name);
    const fs::path a = scratch(name + "_a");
    const fs::path b = scratch(name + "_b");
    const RunResult ra = run(tiny(name, a));
    const RunResult rb = run(tiny(name, b));
    REQUIRE(ra.files == rb.files);
    CHECK(fs::exists(a / "manifest.json"));
    CHECK(fs::exists(a / "summary.txt"));
    for (const std::string& f : ra.files) {
      REQUIRE(fs::exists(a / f));
      if (f.ends_with(".csv")) {
        const std::string text = slurp(a / f);
        CHECK(text.find('\n') != std::string::npos);
        CHECK(text == slurp(b / f));
      }
    }
    const nlohmann::json m = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(m.at("version") == kVersion);
    CHECK(m.at("config_hash") == rb.manifest.at("config_hash"));
    CHECK(m.contains("wall_time_s"));
    if (is_randomized(name)) CHECK(m.at("seed") == 17);
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST_CASE("different seeds give different randomized output") {
  const fs::path a = scratch("seed_a");
  const fs::path b = scratch("seed_b");
  ExperimentConfig ca = tiny("haar_markov", a);
  ExperimentConfig cb = tiny("haar_markov", b);
  cb.seed = 18;
  run(ca);
  run(cb);
  CHECK(slurp(a / "haar_markov.csv") != slurp(b / "haar_markov.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("invalid configs do not run") {
  ExperimentConfig c = tiny("relax", scratch("invalid"));
  c.t_step = 0.0;
  CHECK_THROWS_AS(run(c), Error);
}

TEST_CASE("default betas are labeled in the manifest") {
  const fs::path a = scratch("betas");
  ExperimentConfig c = tiny("beta_sweep", a);
  c.betas = ExperimentConfig{}.betas;
  CHECK(run(c).manifest.at("betas_source") == "default choice");
  c.betas = {0.3};
  CHECK(run(c).manifest.at("betas_source") == "config");
  fs::remove_all(a);
}
