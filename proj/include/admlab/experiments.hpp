#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "admlab/criterion.hpp"
#include "admlab/mild_solution.hpp"
#include "admlab/report_io.hpp"

namespace admlab {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

enum class Experiment {
  Ex1Divergence,
  Ex1Feedback,
  Ex2Criterion,
  Ex2Divergence,
  Ex2Perturbation,
  CriterionScan,
  StabilityReport,
  Selftest,
};

[[nodiscard]] std::string_view to_string(Experiment e);
[[nodiscard]] std::optional<Experiment> parse_experiment(std::string_view name);
[[nodiscard]] std::vector<std::string> experiment_names();

struct RunConfig {
  Experiment experiment = Experiment::Selftest;
  std::int64_t N = 0;  // 0 selects the experiment default
  std::string beta_profile = "linear";  // linear | power | table
  double beta_scale = 1;
  double beta_exponent = 1;
  std::vector<double> beta_table;
  std::vector<std::int64_t> n_list;  // empty selects the experiment default
  GridSpec grid;
  std::string family = "example2-A";  // criterion-scan: example1-A0 | example2-A | example2-Aprime | power-law
  std::uint64_t seed = 20240611;
  int signals = 50;
  double divergence_threshold = 1e3;
  double feedback_tolerance = 1e-6;
  std::string out_dir = ".";

  /// Unknown keys are rejected; missing keys keep their defaults.
  static RunConfig from_json(const nlohmann::json& j);
  /// Every numeric input after defaults are resolved.
  [[nodiscard]] nlohmann::json echo() const;
  /// Throws InvalidArgument for out-of-range or inconsistent fields.
  void validate() const;
  [[nodiscard]] BetaProfile<double> beta() const;
};

/// Fills N and n_list with the experiment defaults where unset.
[[nodiscard]] RunConfig resolve_defaults(RunConfig cfg);

struct ExperimentResult {
  nlohmann::json document;  // result.json content without wall time
  std::vector<Table> tables;
  bool checks_passed = true;
  double wall_time_s = 0;
};

/// Runs one experiment. Throws InvalidArgument on configuration errors and NumericalError on
/// numerical failures; a "not-admissible" conclusion is an ordinary result.
[[nodiscard]] ExperimentResult run(const RunConfig& cfg);

/// result.json text: document plus wall time, sorted keys, two-space indent.
[[nodiscard]] std::string serialize(const ExperimentResult& result);

/// Writes result.json and one CSV per table into dir (created if needed).
void emit(const ExperimentResult& result, const std::filesystem::path& dir);

/// Unit-L2 input with 1-3 modulated pieces inside [0, horizon] and |omega| <= omega_max.
[[nodiscard]] InputSignal<double> random_unit_signal(std::mt19937_64& rng, double omega_max, double horizon = 4);

}  // namespace admlab
