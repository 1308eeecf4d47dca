#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "capshock/contour.hpp"
#include "capshock/profile.hpp"
#include "capshock/sweep.hpp"

namespace capshock {

/// Columnar text formats. Each file starts with "# capshock <kind> v<N>",
/// then "# key=value" metadata lines, then a column-name line and
/// whitespace-separated rows.
inline constexpr int kFormatVersion = 1;

struct Table {
  std::string kind;
  int version = 0;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;  // throws DomainError
  const std::string& meta_value(const std::string& key) const;
};

/// Writes to a sibling temporary and renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

/// Reads a table; refuses other kinds and unknown versions.
Table read_table(const std::filesystem::path& path, const std::string& kind);

/// x, v_hat, v_hat_x, v_hat_xx.
void write_profile(const std::filesystem::path& path, const ProfileSolution& profile);
/// v_hat, v_hat_x and phi(v_hat), the w = phi(v) curve at the same abscissae.
void write_phase_portrait(const std::filesystem::path& path, const ProfileSolution& profile);
/// s, lambda, D and the Evans step counts, ordered along the closed contour.
void write_contour(const std::filesystem::path& path, const ContourResult& contour,
                   const GasParams& params);
/// Real-axis scan: lambda, Re D, Im D.
void write_real_scan(const std::filesystem::path& path, const RealAxisScan& scan,
                     const GasParams& params);

/// Record files: a JSON header line {"format":"capshock-record","version":1}
/// followed by the record as one JSON line.
std::string record_to_text(const SweepRecord& record);
SweepRecord record_from_text(const std::string& text);
void write_record(const std::filesystem::path& path, const SweepRecord& record);
SweepRecord read_record(const std::filesystem::path& path);

/// Tab-separated summary, one row per record, no timing columns.
std::string summary_table(const std::vector<SweepRecord>& records);

/// Writes profile.dat, phase.dat, record.jsonl and, when present,
/// contour.dat and real_scan.dat into `dir`. Returns the written paths.
std::vector<std::filesystem::path> emit_figure_data(const PointRun& run,
                                                    const std::filesystem::path& dir);

}  // namespace capshock
