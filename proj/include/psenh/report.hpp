// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "psenh/evaluator.hpp"

namespace psenh {

// "mean (std)": two decimals for the mean, three for the std.
std::string format_cell(double mean, double std_dev);

// One table row: a pretraining scheme at one premixture SNR.
struct TableRow {
  std::string label;
  std::string scheme;
  std::optional<double> premix_snr_db;

  bool operator==(const TableRow &) const = default;
};

// Architectures present in the grid, sorted by name.
std::vector<std::string> grid_architectures(const Grid &grid);

// Rows for one architecture: Multi-Speaker first, then PseudoSE and CM
// blocks by ascending premixture SNR, then random init, then any other
// scheme alphabetically.
std::vector<TableRow> grid_rows(const Grid &grid, const std::string &architecture);

// The standard budgets 0/3/5/10/30/60 s plus any other budget in the grid.
std::vector<double> grid_columns(const Grid &grid);

std::string render_csv(const Grid &grid);
std::string render_text(const Grid &grid);
// Finetuning curves for one architecture: one panel per speaker plus a
// speaker-mean panel, SI-SDRi against budget, one line per row.
std::string render_svg(const Grid &grid, const std::string &architecture);

enum class ReportFormat { kAll, kJson, kCsv, kText, kSvg };
ReportFormat parse_report_format(const std::string &name);

// Writes report.json, report.csv, report.txt and curves_<arch>.svg into dir
// (or the subset selected by format). Returns the written paths. Throws
// DataError for an empty grid or an unwritable path.
std::vector<std::filesystem::path> emit_report(const Grid &grid, const std::filesystem::path &dir,
                                               ReportFormat format = ReportFormat::kAll);

Grid load_report(const std::filesystem::path &json_path);

}  // namespace psenh
