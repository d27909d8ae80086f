#pragma once

// CSV and metadata output.
//
//   regret_<label>.csv    t,mean_regret,std_regret
//   per_seed_<label>.csv  seed,final_pseudo_regret,final_realized_regret
//   curve_<label>_seed<k>.csv  t,pseudo_regret,realized_regret   (optional)
//   meta.json
//
// Numbers use %.17g so they parse back to the same double.

#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqbandit/core.hpp"
#include "eqbandit/errors.hpp"
#include "eqbandit/harness/runner.hpp"

namespace eqbandit {

inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// max(1, T / 2000).
inline std::int64_t default_record_stride(std::int64_t horizon) {
  return std::max<std::int64_t>(1, horizon / 2000);
}

/// Recorded timesteps (1-based): every multiple of `stride`, plus T itself.
inline std::vector<std::int64_t> stride_points(std::int64_t horizon, std::int64_t stride) {
  if (stride < 1) throw InvalidInput("record_stride must be >= 1");
  std::vector<std::int64_t> ts;
  for (std::int64_t t = stride; t <= horizon; t += stride) ts.push_back(t);
  if (horizon >= 1 && (ts.empty() || ts.back() != horizon)) ts.push_back(horizon);
  return ts;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

inline void close_out(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace detail

inline void write_regret_csv(const std::filesystem::path& path, const std::vector<double>& mean,
                             const std::vector<double>& stdev, std::int64_t stride) {
  if (mean.size() != stdev.size()) throw InvalidInput("write_regret_csv: size mismatch");
  auto out = detail::open_out(path);
  out << "t,mean_regret,std_regret\n";
  for (auto t : stride_points(static_cast<std::int64_t>(mean.size()), stride)) {
    const auto i = static_cast<std::size_t>(t - 1);
    out << t << ',' << format_number(mean[i]) << ',' << format_number(stdev[i]) << '\n';
  }
  detail::close_out(out, path);
}

inline void write_per_seed_csv(const std::filesystem::path& path,
                               const std::vector<SeedFinal>& finals) {
  auto out = detail::open_out(path);
  out << "seed,final_pseudo_regret,final_realized_regret\n";
  for (const auto& f : finals)
    out << f.seed << ',' << format_number(f.pseudo) << ',' << format_number(f.realized) << '\n';
  detail::close_out(out, path);
}

inline void write_curve_csv(const std::filesystem::path& path, const RegretTrajectory& traj,
                            std::int64_t stride) {
  auto out = detail::open_out(path);
  out << "t,pseudo_regret,realized_regret\n";
  for (auto t : stride_points(static_cast<std::int64_t>(traj.horizon()), stride)) {
    const auto i = static_cast<std::size_t>(t - 1);
    out << t << ',' << format_number(traj.pseudo_regret[i]) << ','
        << format_number(traj.realized_regret[i]) << '\n';
  }
  detail::close_out(out, path);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Values of one column, by header name.
  std::vector<double> column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) {
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(r.at(c));
        return out;
      }
    throw InvalidInput("csv: no column '" + name + "'");
  }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  CsvTable table;
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  if (!std::getline(in, line)) throw IoError("'" + path.string() + "' is empty");
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) row.push_back(std::stod(cell));
    if (row.size() != table.header.size())
      throw IoError("'" + path.string() + "': ragged row");
    table.rows.push_back(std::move(row));
  }
  return table;
}

struct ExportOptions {
  std::int64_t record_stride = 1;
  bool per_seed_curves = false;
};

/// Writes the CSVs of every result and then `meta` as meta.json. `curves`
/// (parallel to `results`) is only read when per-seed curves are requested.
inline void export_results(const std::vector<AggregateResult>& results,
                           const std::vector<std::vector<RegretTrajectory>>& curves,
                           const std::filesystem::path& dir, const ExportOptions& opt,
                           const nlohmann::json& meta) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    write_regret_csv(dir / ("regret_" + r.label + ".csv"), r.mean, r.stdev, opt.record_stride);
    write_per_seed_csv(dir / ("per_seed_" + r.label + ".csv"), r.finals);
    if (opt.per_seed_curves && i < curves.size())
      for (std::size_t k = 0; k < curves[i].size(); ++k)
        write_curve_csv(dir / ("curve_" + r.label + "_seed" + std::to_string(k) + ".csv"),
                        curves[i][k], opt.record_stride);
  }
  const auto path = dir / "meta.json";
  auto out = detail::open_out(path);
  out << meta.dump(2) << '\n';
  detail::close_out(out, path);
}

}  // namespace eqbandit
