// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "psenh/errors.hpp"
#include "psenh/evaluator.hpp"
#include "psenh/report.hpp"
#include "psenh/stft.hpp"
#include "test_helpers.hpp"

namespace psenh {
namespace {

using testing::gaussian_signal;

ClipPool pool_of(const std::string &prefix, int n, std::uint64_t seed) {
  ClipPool p;
  for (int i = 0; i < n; ++i) {
    p.push_back({prefix + std::to_string(i), AudioClip(testing::sine(40000, 180.0 + 35 * i, 0.1))});
    const Signal g = gaussian_signal(40000, seed + i, 0.01);
    for (std::size_t k = 0; k < g.size(); ++k) p.back().clip.samples[k] += g[k];
  }
  return p;
}

ClipPool noise_of(const std::string &prefix, int n, std::uint64_t seed) {
  ClipPool p;
  for (int i = 0; i < n; ++i) p.push_back({prefix + std::to_string(i), AudioClip(gaussian_signal(40000, seed + i, 0.1))});
  return p;
}

TEST(Evaluator, MixturesAreFrozenPerSpeakerAndSeed) {
  const auto clean = pool_of("speech/a/u", 3, 1);
  const auto noise = noise_of("noise-test/n", 3, 100);
  EvalProtocol p;
  p.n_mixtures = 20;
  const auto a = build_eval_mixtures(clean, noise, p, "a", 1);
  const auto b = build_eval_mixtures(clean, noise, p, "a", 1);
  const auto c = build_eval_mixtures(clean, noise, p, "a", 2);
  ASSERT_EQ(a.size(), 20u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].input, b[i].input);
    EXPECT_EQ(a[i].input.size(), 16000u);
    EXPECT_EQ(a[i].noise_id.rfind("noise-test/", 0), 0u);
    EXPECT_GE(a[i].snr_db, -5.0);
    EXPECT_LE(a[i].snr_db, 5.0);
  }
  EXPECT_NE(a[0].input, c[0].input);
  EXPECT_THROW(build_eval_mixtures(clean, {}, p, "a", 1), DataError);
  EXPECT_THROW(build_eval_mixtures({}, noise, p, "a", 1), DataError);
}

TEST(Evaluator, IdentityEnhancerScoresZero) {
  EvalProtocol p;
  const auto mixtures = build_eval_mixtures(pool_of("speech/a/u", 2, 1), noise_of("noise-test/n", 2, 9), p, "a", 3);
  const auto scores = score_mixtures([](const TrainingExample &ex) { return ex.input.samples; }, mixtures);
  const auto stats = summarize("a", 3, scores);
  EXPECT_EQ(stats.n_mixtures, 100);
  EXPECT_NEAR(stats.mean_sisdri_db, 0.0, 1e-6);
  EXPECT_NEAR(stats.std_sisdri_db, 0.0, 1e-6);
}

TEST(Evaluator, OracleMaskScoresPositive) {
  EvalProtocol p;
  p.n_mixtures = 30;
  const auto mixtures = build_eval_mixtures(pool_of("speech/a/u", 2, 1), noise_of("noise-test/n", 2, 9), p, "a", 3);
  const Stft stft;
  const auto oracle = [&](const TrainingExample &ex) {
    const auto mask = oracle_ratio_mask(stft.analyze(ex.target), stft.analyze(ex.scaled_noise));
    return stft.synthesize(apply_mask(stft.analyze(ex.input), mask), ex.input.size()).samples;
  };
  const auto stats = summarize("a", 3, score_mixtures(oracle, mixtures));
  EXPECT_GT(stats.mean_sisdri_db, 3.0);
}

TEST(Evaluator, ModelScoringMatchesEnhancerScoring) {
  EvalProtocol p;
  p.n_mixtures = 30;
  const auto clean = pool_of("speech/a/u", 2, 1);
  const auto noise = noise_of("noise-test/n", 2, 9);
  const auto model = make_model(ModelConfig::from_name("gru8"), 1);
  const auto stats = evaluate_speaker(*model, clean, noise, p, "a", 4);
  const auto mixtures = build_eval_mixtures(clean, noise, p, "a", 4);
  const auto direct = summarize("a", 4, score_mixtures([&](const TrainingExample &ex) {
    return model->forward({&ex.input.samples})[0];
  }, mixtures));
  // Batched and single-mixture float GEMMs round differently.
  EXPECT_NEAR(stats.mean_sisdri_db, direct.mean_sisdri_db, 1e-6);
  EXPECT_NEAR(stats.std_sisdri_db, direct.std_sisdri_db, 1e-6);
}

TEST(Evaluator, PopulationMeanAndStd) {
  const auto [m, s] = mean_std({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m, 2.5);
  EXPECT_DOUBLE_EQ(s, std::sqrt(1.25));
  EXPECT_EQ(mean_std({7.0}).second, 0.0);
}

GridKey key(const std::string &scheme_name, std::optional<double> snr, double budget) {
  return {"gru64", scheme_name, snr, budget};
}

std::vector<CellReport> random_reports(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(5.0, 2.0);
  std::vector<CellReport> out;
  for (const auto &k : {key("multispeaker", std::nullopt, 0), key("cm", 10.0, 3), key("cm", 10.0, 0)}) {
    for (std::uint64_t s = 1; s <= 2; ++s) {
      CellReport r;
      r.key = k;
      for (const char *spk : {"a", "b", "c"}) r.speakers.push_back({spk, s, d(rng), std::abs(d(rng)), 100});
      out.push_back(r);
    }
  }
  return out;
}

TEST(Aggregation, MatchesBruteForce) {
  const auto reports = random_reports(1);
  const Grid g = aggregate_grid(reports);
  ASSERT_EQ(g.cells.size(), 3u);
  for (const auto &[k, cell] : g.cells) {
    std::map<std::string, std::vector<double>> per;
    for (const auto &r : reports) {
      if (!(r.key == k)) continue;
      for (const auto &s : r.speakers) per[s.speaker_id].push_back(s.mean_sisdri_db);
    }
    std::vector<double> means;
    for (const auto &[spk, v] : per) {
      double sum = 0;
      for (double x : v) sum += x;
      means.push_back(sum / v.size());
      EXPECT_NEAR(cell.speaker_means.at(spk), means.back(), 1e-12);
    }
    double mu = 0, var = 0;
    for (double m : means) mu += m;
    mu /= means.size();
    for (double m : means) var += (m - mu) * (m - mu);
    var /= means.size();
    EXPECT_NEAR(cell.mean_sisdri_db, mu, 1e-12);
    EXPECT_NEAR(cell.std_sisdri_db, std::sqrt(var), 1e-12);
    EXPECT_EQ(cell.n_speakers, 3);
    EXPECT_EQ(cell.speakers.size(), 6u);
  }
}

TEST(Aggregation, PermutationInvariant) {
  auto reports = random_reports(2);
  const Grid g = aggregate_grid(reports);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    std::shuffle(reports.begin(), reports.end(), rng);
    for (auto &r : reports) std::shuffle(r.speakers.begin(), r.speakers.end(), rng);
    EXPECT_EQ(aggregate_grid(reports), g);
  }
}

TEST(Aggregation, SingleSpeakerIsItsOwnCell) {
  CellReport r;
  r.key = key("pseudose", 5.0, 3);
  r.speakers = {{"a", 1, 4.25, 1.5, 100}};
  const Grid g = aggregate_grid({r});
  const auto &cell = g.cells.at(r.key);
  EXPECT_EQ(cell.mean_sisdri_db, 4.25);
  EXPECT_EQ(cell.std_sisdri_db, 0.0);
  EXPECT_EQ(cell.speakers, r.speakers);
}

TEST(Aggregation, RejectsMismatchedProtocolsAndDuplicates) {
  auto reports = random_reports(4);
  reports[1].protocol.n_mixtures = 50;
  for (auto &s : reports[1].speakers) s.n_mixtures = 50;
  EXPECT_THROW(aggregate_grid(reports), DataError);
  auto dup = random_reports(4);
  dup.push_back(dup.front());
  EXPECT_THROW(aggregate_grid(dup), DataError);
  auto wrong_count = random_reports(4);
  wrong_count[0].speakers[0].n_mixtures = 99;
  EXPECT_THROW(aggregate_grid(wrong_count), DataError);
}

TEST(Aggregation, GridJsonRoundTripsWithDisabledPremix) {
  auto reports = random_reports(5);
  reports[0].key.premix_snr_db = std::numeric_limits<double>::infinity();
  reports[1].key.premix_snr_db = std::numeric_limits<double>::infinity();
  const Grid g = aggregate_grid(reports);
  EXPECT_EQ(nlohmann::json(g).get<Grid>(), g);
}

Grid sample_grid() {
  Grid g;
  auto put = [&](const std::string &arch, const std::string &s, std::optional<double> snr, double b,
                 double mean, double sd) {
    GridCell c;
    c.mean_sisdri_db = mean;
    c.std_sisdri_db = sd;
    c.n_speakers = 2;
    c.speaker_means = {{"a", mean - 0.5}, {"b", mean + 0.5}};
    g.cells[{arch, s, snr, b}] = c;
  };
  put("gru64", "random-init", std::nullopt, 0, 0.01, 0.002);
  put("gru64", "cm", 10.0, 3, 9.2, 0.721);
  put("gru64", "cm", 5.0, 3, 8.5, 0.7);
  put("gru64", "pseudose", 10.0, 0, 8.9, 0.65);
  put("gru64", "multispeaker", std::nullopt, 0, 8.25, 0.6);
  put("gru64", "multispeaker", std::nullopt, 60, 10.5, 0.5);
  put("convtasnet", "multispeaker", std::nullopt, 3, 11.0, 1.0);
  return g;
}

TEST(Report, CellFormatting) {
  EXPECT_EQ(format_cell(9.2, 0.721), "9.20 (0.721)");
  EXPECT_EQ(format_cell(-0.004, 0.0), "-0.00 (0.000)");
  EXPECT_EQ(format_cell(10.956, 1.2345), "10.96 (1.234)");
}

TEST(Report, RowsAndColumnsFollowTheTableLayout) {
  const Grid g = sample_grid();
  EXPECT_EQ(grid_columns(g), (std::vector<double>{0, 3, 5, 10, 30, 60}));
  EXPECT_EQ(grid_architectures(g), (std::vector<std::string>{"convtasnet", "gru64"}));
  std::vector<std::string> labels;
  for (const auto &r : grid_rows(g, "gru64")) labels.push_back(r.label);
  EXPECT_EQ(labels, (std::vector<std::string>{"Multi-Speaker", "PseudoSE (10 dB)", "CM (5 dB)", "CM (10 dB)",
                                              "Random init"}));
}

TEST(Report, CsvCells) {
  const std::string csv = render_csv(sample_grid());
  std::istringstream in(csv);
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "architecture,row,scheme,premix_snr_db,0 s,3 s,5 s,10 s,30 s,60 s");
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 6u);
  EXPECT_EQ(lines[0], "convtasnet,Multi-Speaker,multispeaker,,,11.00 (1.000),,,,");
  EXPECT_EQ(lines[1], "gru64,Multi-Speaker,multispeaker,,8.25 (0.600),,,,,10.50 (0.500)");
  EXPECT_EQ(lines[4], "gru64,CM (10 dB),cm,10,,9.20 (0.721),,,,");
}

TEST(Report, TextTableIsAligned) {
  const std::string text = render_text(sample_grid());
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> block;
  while (std::getline(in, line)) {
    if (line.rfind("gru64", 0) == 0) block.clear();
    block.push_back(line);
  }
  ASSERT_EQ(block.size(), 6u);  // header + 5 rows
  for (const auto &l : block) EXPECT_EQ(l.size(), block.front().size()) << l;
  EXPECT_NE(text.find("9.20 (0.721)"), std::string::npos);
}

TEST(Report, EmitsEveryFormat) {
  const auto dir = testing::scratch_dir("report");
  const Grid g = sample_grid();
  const auto files = emit_report(g, dir);
  EXPECT_EQ(files.size(), 5u);
  for (const auto &f : files) EXPECT_GT(std::filesystem::file_size(f), 0u) << f;
  EXPECT_TRUE(std::filesystem::exists(dir / "curves_gru64.svg"));
  EXPECT_TRUE(std::filesystem::exists(dir / "curves_convtasnet.svg"));
  EXPECT_EQ(load_report(dir / "report.json"), g);
  const std::string svg = render_svg(g, "gru64");
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(svg.find("gru64: a"), std::string::npos);
  EXPECT_EQ(emit_report(g, dir / "only_csv", ReportFormat::kCsv).size(), 1u);
}

TEST(Report, ErrorsOnEmptyGridOrUnwritablePath) {
  EXPECT_THROW(emit_report(Grid{}, testing::scratch_dir("report_empty")), DataError);
  const auto dir = testing::scratch_dir("report_blocked");
  std::ofstream(dir / "file") << "x";
  EXPECT_THROW(emit_report(sample_grid(), dir / "file" / "sub"), DataError);
  EXPECT_THROW(parse_report_format("pdf"), ConfigError);
}

}  // namespace
}  // namespace psenh
