#include "admlab/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace admlab {

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != header.size())
    throw InvalidArgument("table " + name + ": row has " + std::to_string(row.size()) + " cells, header has " +
                          std::to_string(header.size()));
  rows.push_back(std::move(row));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>)
              out += format_double(v);
            else if constexpr (std::is_same_v<T, std::int64_t>)
              out += std::to_string(v);
            else
              out += v;
          },
          row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << content;
  f.flush();
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

void emit_csv(const Table& table, const std::filesystem::path& dir) {
  write_text_file(dir / (table.name + ".csv"), to_csv(table));
}

nlohmann::json to_json(std::complex<double> z) { return nlohmann::json::array({z.real(), z.imag()}); }

nlohmann::json to_json(const MBound<double>& m) {
  auto part = [](const MBound<double>::Part& p) {
    return nlohmann::json{{"window_sum", p.window_sum},
                          {"tail_lower", p.tail.lower},
                          {"tail_upper", p.tail.upper},
                          {"tail_estimate", p.tail.estimate},
                          {"estimate", p.estimate()}};
  };
  nlohmann::json j{{"divergent", m.divergent}, {"positive_side", part(m.positive)},
                   {"nonpositive_side", part(m.nonpositive)}};
  if (!m.divergent) {
    j["estimate"] = m.estimate();
    j["certified_upper"] = m.certified_upper();
  }
  return j;
}

nlohmann::json to_json(const CriterionReport<double>& rep) {
  nlohmann::json seq = nlohmann::json::array();
  for (const auto& w : rep.witness_sequence)
    seq.push_back({{"n", w.n}, {"z", to_json(w.z)}, {"value", w.value}, {"lower_bound", w.lower_bound}});
  nlohmann::json j;
  j["sup_estimate"] = rep.sup_estimate;
  j["witness"] = {{"z", to_json(rep.witness.z)}, {"source", std::string(to_string(rep.witness.source))},
                  {"n", rep.witness.n}};
  if (rep.M_bound)
    j["M_bound"] = *rep.M_bound;
  else
    j["M_bound"] = "divergent";
  j["tail_bound_at_witness"] = rep.tail_bound_at_witness;
  j["verdict"] = std::string(to_string(rep.verdict));
  j["witness_sequence"] = seq;
  return j;
}

nlohmann::json to_json(const StabilityReport<double>& rep) {
  nlohmann::json j;
  j["spectrum_size"] = rep.truncated_spectrum.size();
  j["spectral_abscissa"] = rep.spectral_abscissa;
  j["contraction_ok"] = rep.contraction_ok;
  j["hermitian_part_max"] = rep.hermitian_part_max;
  nlohmann::json decay = nlohmann::json::array();
  for (const auto& [t, v] : rep.strong_decay_samples) decay.push_back({t, v});
  j["strong_decay_samples"] = decay;
  nlohmann::json wit = nlohmann::json::array();
  for (const auto& [n, v] : rep.non_exp_witnesses) wit.push_back({n, v});
  j["non_exp_witnesses"] = wit;
  nlohmann::json trend = nlohmann::json::array();
  for (const auto& [n, v] : rep.abscissa_trend) trend.push_back({n, v});
  j["abscissa_trend"] = trend;
  j["exp_stability_verdict"] = std::string(to_string(rep.exp_stability_verdict));
  return j;
}

Table criterion_grid_table(const CriterionReport<double>& rep, std::string name) {
  Table t{std::move(name), {"re_z", "im_z", "S", "rezS", "tail", "source"}, {}};
  t.rows.reserve(rep.rows.size());
  for (const auto& r : rep.rows)
    t.rows.push_back({r.re_z, r.im_z, r.S, r.rezS, r.tail, std::string(to_string(r.source))});
  return t;
}

Table spectrum_table(const StabilityReport<double>& rep, std::string name) {
  Table t{std::move(name), {"re", "im"}, {}};
  for (const auto& z : rep.truncated_spectrum) t.rows.push_back({z.real(), z.imag()});
  return t;
}

}  // namespace admlab
