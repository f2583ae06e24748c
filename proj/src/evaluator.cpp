// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

#include "psenh/errors.hpp"
#include "psenh/metrics.hpp"

namespace psenh {

void to_json(nlohmann::json &j, const EvalProtocol &p) {
  j = {{"n_mixtures", p.n_mixtures},
       {"snr_lo_db", p.snr.lo_db},
       {"snr_hi_db", p.snr.hi_db},
       {"clip_sec", p.clip_sec}};
}

void from_json(const nlohmann::json &j, EvalProtocol &p) {
  p = EvalProtocol{};
  p.n_mixtures = j.value("n_mixtures", p.n_mixtures);
  p.snr.lo_db = j.value("snr_lo_db", p.snr.lo_db);
  p.snr.hi_db = j.value("snr_hi_db", p.snr.hi_db);
  p.clip_sec = j.value("clip_sec", p.clip_sec);
}

std::vector<TrainingExample> build_eval_mixtures(const ClipPool &clean_test,
                                                 const ClipPool &noise_test,
                                                 const EvalProtocol &protocol,
                                                 const std::string &speaker_id,
                                                 std::uint64_t seed) {
  if (clean_test.empty()) throw DataError("evaluation of '" + speaker_id + "': no test speech");
  if (noise_test.empty()) throw DataError("evaluation of '" + speaker_id + "': empty N_te");
  if (protocol.n_mixtures < 1) throw ConfigError("n_mixtures must be positive");
  Rng rng(derive_seed(seed, {hash_name("eval"), hash_name(speaker_id)}));
  return sample_supervised_batch(clean_test, noise_test, protocol.n_mixtures, protocol.snr,
                                 protocol.clip_sec, rng);
}

void to_json(nlohmann::json &j, const SpeakerStats &s) {
  j = {{"speaker_id", s.speaker_id},
       {"seed", s.seed},
       {"mean_sisdri_db", s.mean_sisdri_db},
       {"std_sisdri_db", s.std_sisdri_db},
       {"n_mixtures", s.n_mixtures}};
}

void from_json(const nlohmann::json &j, SpeakerStats &s) {
  s.speaker_id = j.at("speaker_id");
  s.seed = j.at("seed");
  s.mean_sisdri_db = j.at("mean_sisdri_db");
  s.std_sisdri_db = j.at("std_sisdri_db");
  s.n_mixtures = j.at("n_mixtures");
}

std::pair<double, double> mean_std(const std::vector<double> &values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

std::vector<double> score_mixtures(const ExampleEnhancer &enhance,
                                   const std::vector<TrainingExample> &mixtures) {
  std::vector<double> out;
  out.reserve(mixtures.size());
  for (const auto &ex : mixtures) {
    const Signal y = enhance(ex);
    out.push_back(si_sdr_improvement(ex.target.samples, ex.input.samples, y));
  }
  return out;
}

std::vector<double> score_mixtures(const EnhancementModel &model,
                                   const std::vector<TrainingExample> &mixtures) {
  constexpr std::size_t kChunk = 25;
  std::vector<double> out;
  out.reserve(mixtures.size());
  for (std::size_t b = 0; b < mixtures.size(); b += kChunk) {
    const std::size_t e = std::min(mixtures.size(), b + kChunk);
    std::vector<const Signal *> inputs;
    for (std::size_t i = b; i < e; ++i) inputs.push_back(&mixtures[i].input.samples);
    const auto ys = model.forward(inputs);
    for (std::size_t i = b; i < e; ++i) {
      out.push_back(si_sdr_improvement(mixtures[i].target.samples, mixtures[i].input.samples,
                                       ys[i - b]));
    }
  }
  return out;
}

SpeakerStats summarize(const std::string &speaker_id, std::uint64_t seed,
                       const std::vector<double> &improvements) {
  const auto [mean, sd] = mean_std(improvements);
  return {speaker_id, seed, mean, sd, static_cast<int>(improvements.size())};
}

SpeakerStats evaluate_speaker(const EnhancementModel &model, const ClipPool &clean_test,
                              const ClipPool &noise_test, const EvalProtocol &protocol,
                              const std::string &speaker_id, std::uint64_t seed) {
  const auto mixtures = build_eval_mixtures(clean_test, noise_test, protocol, speaker_id, seed);
  return summarize(speaker_id, seed, score_mixtures(model, mixtures));
}

void to_json(nlohmann::json &j, const GridKey &k) {
  j = {{"architecture", k.architecture}, {"scheme", k.scheme}, {"ft_budget_sec", k.ft_budget_sec}};
  if (!k.premix_snr_db) {
    j["premix_snr_db"] = nullptr;
  } else if (std::isinf(*k.premix_snr_db)) {
    j["premix_snr_db"] = "inf";
  } else {
    j["premix_snr_db"] = *k.premix_snr_db;
  }
}

void from_json(const nlohmann::json &j, GridKey &k) {
  k.architecture = j.at("architecture");
  k.scheme = j.at("scheme");
  k.ft_budget_sec = j.at("ft_budget_sec");
  const auto &snr = j.at("premix_snr_db");
  if (snr.is_null()) {
    k.premix_snr_db.reset();
  } else if (snr.is_string()) {
    if (snr.get<std::string>() != "inf") throw ConfigError("bad premix_snr_db: " + snr.dump());
    k.premix_snr_db = std::numeric_limits<double>::infinity();
  } else {
    k.premix_snr_db = snr.get<double>();
  }
}

void to_json(nlohmann::json &j, const CellReport &r) {
  j = {{"key", r.key}, {"protocol", r.protocol}, {"speakers", r.speakers}};
}

void from_json(const nlohmann::json &j, CellReport &r) {
  r.key = j.at("key").get<GridKey>();
  r.protocol = j.at("protocol").get<EvalProtocol>();
  r.speakers = j.at("speakers").get<std::vector<SpeakerStats>>();
}

void to_json(nlohmann::json &j, const Grid &g) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto &[key, cell] : g.cells) {
    cells.push_back({{"key", key},
                     {"mean_sisdri_db", cell.mean_sisdri_db},
                     {"std_sisdri_db", cell.std_sisdri_db},
                     {"n_speakers", cell.n_speakers},
                     {"speaker_means", cell.speaker_means},
                     {"speakers", cell.speakers}});
  }
  j = {{"protocol", g.protocol}, {"cells", cells}};
}

void from_json(const nlohmann::json &j, Grid &g) {
  g = Grid{};
  g.protocol = j.at("protocol").get<EvalProtocol>();
  for (const auto &c : j.at("cells")) {
    GridCell cell;
    cell.mean_sisdri_db = c.at("mean_sisdri_db");
    cell.std_sisdri_db = c.at("std_sisdri_db");
    cell.n_speakers = c.at("n_speakers");
    cell.speaker_means = c.at("speaker_means").get<std::map<std::string, double>>();
    cell.speakers = c.at("speakers").get<std::vector<SpeakerStats>>();
    g.cells.emplace(c.at("key").get<GridKey>(), std::move(cell));
  }
}

Grid aggregate_grid(const std::vector<CellReport> &reports) {
  Grid grid;
  if (reports.empty()) return grid;
  grid.protocol = reports.front().protocol;
  std::map<GridKey, std::vector<SpeakerStats>> pooled;
  for (const auto &r : reports) {
    if (!(r.protocol == grid.protocol)) {
      throw DataError("cannot aggregate reports with different evaluation protocols");
    }
    for (const auto &s : r.speakers) {
      if (s.n_mixtures != grid.protocol.n_mixtures) {
        throw DataError("speaker '" + s.speaker_id + "' was scored on " +
                        std::to_string(s.n_mixtures) + " mixtures, protocol says " +
                        std::to_string(grid.protocol.n_mixtures));
      }
    }
    auto &dst = pooled[r.key];
    dst.insert(dst.end(), r.speakers.begin(), r.speakers.end());
  }
  for (auto &[key, speakers] : pooled) {
    std::sort(speakers.begin(), speakers.end(), [](const SpeakerStats &a, const SpeakerStats &b) {
      return std::tie(a.speaker_id, a.seed) < std::tie(b.speaker_id, b.seed);
    });
    for (std::size_t i = 1; i < speakers.size(); ++i) {
      if (speakers[i].speaker_id == speakers[i - 1].speaker_id &&
          speakers[i].seed == speakers[i - 1].seed) {
        throw DataError("speaker '" + speakers[i].speaker_id + "' seed " +
                        std::to_string(speakers[i].seed) + " reported twice for one cell");
      }
    }
    GridCell cell;
    std::map<std::string, std::vector<double>> by_speaker;
    for (const auto &s : speakers) by_speaker[s.speaker_id].push_back(s.mean_sisdri_db);
    std::vector<double> means;
    for (const auto &[id, vals] : by_speaker) {
      const double m = mean_std(vals).first;
      cell.speaker_means[id] = m;
      means.push_back(m);
    }
    std::tie(cell.mean_sisdri_db, cell.std_sisdri_db) = mean_std(means);
    cell.n_speakers = static_cast<int>(means.size());
    cell.speakers = std::move(speakers);
    grid.cells.emplace(key, std::move(cell));
  }
  return grid;
}

}  // namespace psenh
