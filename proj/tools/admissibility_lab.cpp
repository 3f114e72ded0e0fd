// admissibility-lab <experiment> [--config file] [overrides]
//
// Exit status: 0 run completed (any verdict), 1 selftest check failed,
// 2 usage or configuration error, 3 numerical or I/O failure.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "admlab/experiments.hpp"

namespace {

nlohmann::json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw admlab::InvalidArgument("cannot open config " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw admlab::InvalidArgument("config " + path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Admissibility and collocated-feedback experiments on diagonal semigroup systems"};
  app.set_version_flag("--version", std::string(admlab::kVersion));

  std::string experiment, config_path, out, family;
  std::optional<std::int64_t> N;
  std::optional<std::uint64_t> seed;
  std::optional<int> signals;
  std::optional<double> threshold;
  std::vector<std::int64_t> n_list;
  bool quiet = false;

  std::string names;
  for (const auto& n : admlab::experiment_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("experiment", experiment, "one of: " + names)->required();
  app.add_option("--config", config_path, "JSON config; flags override its fields");
  app.add_option("--N", N, "window size");
  app.add_option("--n-list", n_list, "witness indices")->delimiter(',');
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "seed for random signals");
  app.add_option("--signals", signals, "number of random signals (ex1-feedback)");
  app.add_option("--family", family, "criterion-scan family");
  app.add_option("--threshold", threshold, "divergence threshold for the not-admissible verdict");
  app.add_flag("-q,--quiet", quiet, "do not print result.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  admlab::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = admlab::RunConfig::from_json(read_config(config_path));
    const auto e = admlab::parse_experiment(experiment);
    if (!e) throw admlab::InvalidArgument("unknown experiment '" + experiment + "' (expected " + names + ")");
    cfg.experiment = *e;
    if (N) cfg.N = *N;
    if (!n_list.empty()) cfg.n_list = n_list;
    if (!out.empty()) cfg.out_dir = out;
    if (seed) cfg.seed = *seed;
    if (signals) cfg.signals = *signals;
    if (!family.empty()) cfg.family = family;
    if (threshold) cfg.divergence_threshold = *threshold;
  } catch (const std::invalid_argument& e) {
    std::cerr << "admissibility-lab: " << e.what() << '\n';
    return 2;
  }

  try {
    const admlab::ExperimentResult r = admlab::run(cfg);
    admlab::emit(r, cfg.out_dir);
    if (!quiet) std::cout << admlab::serialize(r);
    if (cfg.experiment == admlab::Experiment::Selftest && !r.checks_passed) {
      std::cerr << "admissibility-lab: selftest failed\n";
      return 1;
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "admissibility-lab: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "admissibility-lab: " << e.what() << '\n';
    return 3;
  }
}
