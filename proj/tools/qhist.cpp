// qhist: run one experiment from a JSON config.
//
//   qhist <experiment> --config cfg.json [--seed S] [--out DIR] [--threads K]
//   qhist validate --config cfg.json
//
// Exit codes: 0 ok, 1 numerical failure, 2 config error, 3 resource limit.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "qhist/experiment.hpp"

namespace {

int report(const std::vector<qhist::Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << "config error: " << d.field << ": " << d.reason << "\n";
  return diags.empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum histories on coupled spin ladders"};
  app.set_version_flag("--version", qhist::kVersion);
  app.require_subcommand(1);
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  int threads = 0;

  std::vector<CLI::App*> subs;
  for (const std::string& name : qhist::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "RNG seed (overrides the config)");
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--threads", threads, "OpenMP threads (0: runtime default)")->check(CLI::NonNegativeNumber);
    subs.push_back(sub);
  }
  CLI::App* check = app.add_subcommand("validate", "check a config without running it");
  check->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  nlohmann::json j = nlohmann::json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    try {
      in >> j;
    } catch (const std::exception& e) {
      std::cerr << "config error: " << config_path << ": " << e.what() << "\n";
      return 2;
    }
  }

  std::vector<qhist::Diagnostic> diags;
  CLI::App* chosen = app.get_subcommands().front();
  if (chosen != check) {
    if (j.contains("experiment") && j["experiment"] != chosen->get_name()) {
      std::cerr << "config error: experiment: config says '" << j["experiment"].get<std::string>()
                << "' but subcommand is '" << chosen->get_name() << "'\n";
      return 2;
    }
    j["experiment"] = chosen->get_name();
  }
  qhist::ExperimentConfig cfg = qhist::parse_config(j, diags);
  if (chosen != check) {
    if (chosen->count("--seed")) cfg.seed = seed;
    if (chosen->count("--out")) cfg.output_dir = out_dir;
    if (chosen->count("--threads")) cfg.threads = threads;
  }
  for (const auto& d : qhist::validate(cfg)) diags.push_back(d);
  if (const int code = report(diags); code != 0 || chosen == check) {
    if (code == 0) std::cout << "config ok\n";
    return code;
  }

  try {
    const qhist::RunResult r = qhist::run(cfg);
    std::cout << r.summary;
    std::cout << "wrote " << r.files.size() + 1 << " files to " << cfg.output_dir << "\n";
  } catch (const qhist::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case qhist::ErrorKind::InvalidInput:
        return 2;
      case qhist::ErrorKind::ResourceLimit:
        return 3;
      default:
        return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
