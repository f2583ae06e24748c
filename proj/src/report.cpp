// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "psenh/errors.hpp"
#include "psenh/partition.hpp"
#include "psenh/trainer.hpp"

namespace psenh {
namespace {

std::string printf_string(const char *fmt, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, a);
  return buf;
}

std::string budget_label(double sec) { return printf_string("%g s", sec); }

int scheme_rank(const std::string &s) {
  if (s == scheme::kMultiSpeaker) return 0;
  if (s == scheme::kPseudoSe) return 1;
  if (s == scheme::kContrastive) return 2;
  if (s == scheme::kRandomInit) return 3;
  return 4;
}

std::string scheme_label(const std::string &s) {
  if (s == scheme::kMultiSpeaker) return "Multi-Speaker";
  if (s == scheme::kPseudoSe) return "PseudoSE";
  if (s == scheme::kContrastive) return "CM";
  if (s == scheme::kRandomInit) return "Random init";
  return s;
}

std::string row_label(const std::string &scheme_name, const std::optional<double> &snr) {
  std::string label = scheme_label(scheme_name);
  if (!snr) return label;
  if (std::isinf(*snr)) return label + " (clean)";
  return label + printf_string(" (%g dB)", *snr);
}

const GridCell *find_cell(const Grid &grid, const std::string &arch, const TableRow &row,
                          double budget) {
  const auto it = grid.cells.find(GridKey{arch, row.scheme, row.premix_snr_db, budget});
  return it == grid.cells.end() ? nullptr : &it->second;
}

std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string snr_field(const std::optional<double> &snr) {
  if (!snr) return "";
  if (std::isinf(*snr)) return "inf";
  return printf_string("%g", *snr);
}

std::string xml_escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string sanitize(const std::string &s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-') ? c : '_';
  return out;
}

void write_file(const std::filesystem::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out.flush()) throw DataError("cannot write " + path.string());
}

const char *const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

std::string format_cell(double mean, double std_dev) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.2f (%.3f)", mean, std_dev);
  return buf;
}

std::vector<std::string> grid_architectures(const Grid &grid) {
  std::set<std::string> archs;
  for (const auto &[key, cell] : grid.cells) archs.insert(key.architecture);
  return {archs.begin(), archs.end()};
}

std::vector<TableRow> grid_rows(const Grid &grid, const std::string &architecture) {
  std::set<std::pair<std::string, std::optional<double>>> seen;
  for (const auto &[key, cell] : grid.cells) {
    if (key.architecture == architecture) seen.emplace(key.scheme, key.premix_snr_db);
  }
  std::vector<TableRow> rows;
  for (const auto &[s, snr] : seen) rows.push_back({row_label(s, snr), s, snr});
  std::stable_sort(rows.begin(), rows.end(), [](const TableRow &a, const TableRow &b) {
    const int ra = scheme_rank(a.scheme), rb = scheme_rank(b.scheme);
    if (ra != rb) return ra < rb;
    if (a.scheme != b.scheme) return a.scheme < b.scheme;
    return a.premix_snr_db < b.premix_snr_db;
  });
  return rows;
}

std::vector<double> grid_columns(const Grid &grid) {
  std::set<double> budgets(kFinetuneBudgets.begin(), kFinetuneBudgets.end());
  for (const auto &[key, cell] : grid.cells) budgets.insert(key.ft_budget_sec);
  return {budgets.begin(), budgets.end()};
}

std::string render_csv(const Grid &grid) {
  const auto columns = grid_columns(grid);
  std::ostringstream out;
  out << "architecture,row,scheme,premix_snr_db";
  for (double b : columns) out << ',' << budget_label(b);
  out << '\n';
  for (const auto &arch : grid_architectures(grid)) {
    for (const auto &row : grid_rows(grid, arch)) {
      out << csv_field(arch) << ',' << csv_field(row.label) << ',' << csv_field(row.scheme) << ','
          << snr_field(row.premix_snr_db);
      for (double b : columns) {
        out << ',';
        if (const auto *c = find_cell(grid, arch, row, b)) {
          out << format_cell(c->mean_sisdri_db, c->std_sisdri_db);
        }
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string render_text(const Grid &grid) {
  const auto columns = grid_columns(grid);
  std::ostringstream out;
  out << "Mean SI-SDR improvement (dB), std over speakers in parentheses\n";
  for (const auto &arch : grid_architectures(grid)) {
    const auto rows = grid_rows(grid, arch);
    std::vector<std::vector<std::string>> table;
    table.push_back({arch});
    for (double b : columns) table.back().push_back(budget_label(b));
    for (const auto &row : rows) {
      table.push_back({row.label});
      for (double b : columns) {
        const auto *c = find_cell(grid, arch, row, b);
        table.back().push_back(c ? format_cell(c->mean_sisdri_db, c->std_sisdri_db) : "-");
      }
    }
    std::vector<std::size_t> width(table.front().size(), 0);
    for (const auto &line : table) {
      for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
    }
    out << '\n';
    for (const auto &line : table) {
      std::string text;
      for (std::size_t i = 0; i < line.size(); ++i) {
        const std::string pad(width[i] - line[i].size(), ' ');
        text += i == 0 ? line[i] + pad : "  " + pad + line[i];
      }
      out << text << '\n';
    }
  }
  return out.str();
}

std::string render_svg(const Grid &grid, const std::string &architecture) {
  const auto columns = grid_columns(grid);
  const auto rows = grid_rows(grid, architecture);
  std::set<std::string> speaker_set;
  for (const auto &[key, cell] : grid.cells) {
    if (key.architecture != architecture) continue;
    for (const auto &[spk, m] : cell.speaker_means) speaker_set.insert(spk);
  }
  std::vector<std::string> panels = {""};  // empty name: mean over speakers
  panels.insert(panels.end(), speaker_set.begin(), speaker_set.end());

  auto value = [&](const std::string &panel, const TableRow &row, double b) -> std::optional<double> {
    const auto *c = find_cell(grid, architecture, row, b);
    if (!c) return std::nullopt;
    if (panel.empty()) return c->mean_sisdri_db;
    const auto it = c->speaker_means.find(panel);
    if (it == c->speaker_means.end()) return std::nullopt;
    return it->second;
  };

  double lo = 0.0, hi = 1.0;
  bool any = false;
  for (const auto &p : panels) {
    for (const auto &row : rows) {
      for (double b : columns) {
        if (const auto v = value(p, row, b)) {
          lo = any ? std::min(lo, *v) : *v;
          hi = any ? std::max(hi, *v) : *v;
          any = true;
        }
      }
    }
  }
  if (hi - lo < 1e-9) hi = lo + 1.0;
  const double margin = 0.05 * (hi - lo);
  lo -= margin;
  hi += margin;

  const int panel_w = 300, panel_h = 220, per_row = 3;
  const int left = 48, right = 12, top = 28, bottom = 36;
  const int legend_h = 18 * static_cast<int>(rows.size()) + 16;
  const int n_rows = (static_cast<int>(panels.size()) + per_row - 1) / per_row;
  const int width = panel_w * std::min<int>(per_row, static_cast<int>(panels.size()));
  const int height = panel_h * n_rows + legend_h;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  auto fmt = [](double v) { return printf_string("%.2f", v); };
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const double ox = static_cast<double>(p % per_row) * panel_w;
    const double oy = static_cast<double>(p / per_row) * panel_h;
    const double x0 = ox + left, x1 = ox + panel_w - right;
    const double y0 = oy + top, y1 = oy + panel_h - bottom;
    auto xpos = [&](std::size_t i) {
      return columns.size() < 2 ? (x0 + x1) / 2
                                : x0 + (x1 - x0) * static_cast<double>(i) / (columns.size() - 1);
    };
    auto ypos = [&](double v) { return y1 - (y1 - y0) * (v - lo) / (hi - lo); };
    const std::string title = panels[p].empty() ? architecture + ": mean over speakers"
                                                : architecture + ": " + panels[p];
    out << "<text x=\"" << fmt((x0 + x1) / 2) << "\" y=\"" << fmt(oy + 16)
        << "\" text-anchor=\"middle\">" << xml_escape(title) << "</text>\n";
    out << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(x1 - x0)
        << "\" height=\"" << fmt(y1 - y0) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (std::size_t i = 0; i < columns.size(); ++i) {
      out << "<text x=\"" << fmt(xpos(i)) << "\" y=\"" << fmt(y1 + 14)
          << "\" text-anchor=\"middle\">" << printf_string("%g", columns[i]) << "</text>\n";
    }
    out << "<text x=\"" << fmt((x0 + x1) / 2) << "\" y=\"" << fmt(y1 + 28)
        << "\" text-anchor=\"middle\">finetuning speech (s)</text>\n";
    for (int t = 0; t <= 4; ++t) {
      const double v = lo + (hi - lo) * t / 4.0;
      out << "<text x=\"" << fmt(x0 - 4) << "\" y=\"" << fmt(ypos(v) + 4)
          << "\" text-anchor=\"end\">" << printf_string("%.1f", v) << "</text>\n";
    }
    out << "<text transform=\"translate(" << fmt(ox + 10) << "," << fmt((y0 + y1) / 2)
        << ") rotate(-90)\" text-anchor=\"middle\">SI-SDRi (dB)</text>\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const char *color = kPalette[r % std::size(kPalette)];
      std::string points;
      for (std::size_t i = 0; i < columns.size(); ++i) {
        const auto v = value(panels[p], rows[r], columns[i]);
        if (!v) continue;
        points += (points.empty() ? "" : " ") + fmt(xpos(i)) + "," + fmt(ypos(*v));
        out << "<circle cx=\"" << fmt(xpos(i)) << "\" cy=\"" << fmt(ypos(*v))
            << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
      }
      if (!points.empty()) {
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
            << points << "\"/>\n";
      }
    }
  }
  const double ly = static_cast<double>(n_rows) * panel_h + 8;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double y = ly + 18.0 * r;
    out << "<line x1=\"12\" y1=\"" << fmt(y + 6) << "\" x2=\"36\" y2=\"" << fmt(y + 6)
        << "\" stroke=\"" << kPalette[r % std::size(kPalette)] << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"42\" y=\"" << fmt(y + 10) << "\">" << xml_escape(rows[r].label)
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

ReportFormat parse_report_format(const std::string &name) {
  if (name == "all") return ReportFormat::kAll;
  if (name == "json") return ReportFormat::kJson;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "text" || name == "txt") return ReportFormat::kText;
  if (name == "svg") return ReportFormat::kSvg;
  throw ConfigError("unknown report format '" + name + "' (expected all, json, csv, text or svg)");
}

std::vector<std::filesystem::path> emit_report(const Grid &grid, const std::filesystem::path &dir,
                                               ReportFormat format) {
  if (grid.cells.empty()) throw DataError("cannot emit a report for an empty grid");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  const bool all = format == ReportFormat::kAll;
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::filesystem::path &name, const std::string &content) {
    write_file(dir / name, content);
    written.push_back(dir / name);
  };
  if (all || format == ReportFormat::kJson) emit("report.json", nlohmann::json(grid).dump(2) + "\n");
  if (all || format == ReportFormat::kCsv) emit("report.csv", render_csv(grid));
  if (all || format == ReportFormat::kText) emit("report.txt", render_text(grid));
  if (all || format == ReportFormat::kSvg) {
    for (const auto &arch : grid_architectures(grid)) {
      emit("curves_" + sanitize(arch) + ".svg", render_svg(grid, arch));
    }
  }
  return written;
}

Grid load_report(const std::filesystem::path &json_path) {
  std::ifstream in(json_path);
  if (!in) throw DataError("cannot read report " + json_path.string());
  try {
    return nlohmann::json::parse(in).get<Grid>();
  } catch (const nlohmann::json::exception &e) {
    throw DataError("malformed report " + json_path.string() + ": " + e.what());
  }
}

}  // namespace psenh
