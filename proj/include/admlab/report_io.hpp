#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "admlab/criterion.hpp"
#include "admlab/feedback.hpp"
#include "admlab/spectral_core.hpp"

namespace admlab {

/// Plain CSV table; doubles are written with 17 significant digits.
struct Table {
  using Cell = std::variant<double, std::int64_t, std::string>;

  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
};

[[nodiscard]] std::string format_double(double v);
[[nodiscard]] std::string to_csv(const Table& table);

/// Throws std::runtime_error naming the path on I/O failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);
void emit_csv(const Table& table, const std::filesystem::path& dir);

[[nodiscard]] nlohmann::json to_json(const CriterionReport<double>& rep);
[[nodiscard]] nlohmann::json to_json(const StabilityReport<double>& rep);
[[nodiscard]] nlohmann::json to_json(const MBound<double>& m);
[[nodiscard]] nlohmann::json to_json(std::complex<double> z);

[[nodiscard]] Table criterion_grid_table(const CriterionReport<double>& rep, std::string name);
[[nodiscard]] Table spectrum_table(const StabilityReport<double>& rep, std::string name);

}  // namespace admlab
