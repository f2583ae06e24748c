// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/premixture.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

#include "psenh/errors.hpp"
#include "psenh/mixing.hpp"
#include "psenh/rng.hpp"

namespace psenh {

namespace {

AudioClip noise_segment(const AudioClip &noise, std::size_t n, Rng &rng, std::size_t &offset) {
  if (noise.size() >= n) {
    AudioClip seg = random_clip(noise, static_cast<double>(n) / noise.sample_rate, rng, offset);
    return seg;
  }
  offset = std::uniform_int_distribution<std::size_t>(0, noise.size() - 1)(rng);
  AudioClip seg;
  seg.sample_rate = noise.sample_rate;
  seg.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) seg.samples[i] = noise.samples[(offset + i) % noise.size()];
  return seg;
}

std::string file_name(std::size_t index) {
  std::ostringstream s;
  s << std::setw(5) << std::setfill('0') << index << ".wav";
  return s.str();
}

}  // namespace

void PremixtureSet::index_pool() {
  pool_.clear();
  pool_.reserve(items_.size());
  for (const auto &it : items_) pool_.push_back({it.id, it.premixed});
}

PremixtureSet PremixtureSet::slice(std::size_t begin, std::size_t end) const {
  PremixtureSet out;
  end = std::min(end, items_.size());
  if (begin < end) out.items_.assign(items_.begin() + begin, items_.begin() + end);
  out.index_pool();
  return out;
}

PremixtureSet PremixtureSet::select(const std::vector<std::size_t> &indices) const {
  PremixtureSet out;
  out.items_.reserve(indices.size());
  for (std::size_t i : indices) out.items_.push_back(items_.at(i));
  out.index_pool();
  return out;
}

PremixtureSet build_premixture(const ClipPool &clean_test, const ClipPool &premix_noise,
                               const PremixOptions &opts) {
  if (premix_noise.empty()) throw DataError("build_premixture: premix noise set is empty");
  PremixtureSet out;
  out.items_.reserve(clean_test.size());
  for (std::size_t i = 0; i < clean_test.size(); ++i) {
    const auto &clean = clean_test[i];
    PremixtureItem item;
    item.id = "premix/" + clean.id;
    item.clean_ref_id = clean.id;
    if (std::isinf(opts.snr_db) && opts.snr_db > 0) {
      item.premix_snr_db = opts.snr_db;
      item.premixed = clean.clip;
      out.items_.push_back(std::move(item));
      continue;
    }
    Rng rng(derive_seed(opts.seed, {hash_name("premix"), hash_name(clean.id)}));
    const auto which =
        std::uniform_int_distribution<std::size_t>(0, premix_noise.size() - 1)(rng);
    std::size_t offset = 0;
    const AudioClip seg = noise_segment(premix_noise[which].clip, clean.clip.size(), rng, offset);
    item.premix_snr_db = opts.snr_db + uniform(rng, -opts.jitter_db, opts.jitter_db);
    item.premix_noise_id = premix_noise[which].id + "@" + std::to_string(offset);
    item.premixed = mix_at_snr(clean.clip, seg, item.premix_snr_db).mixture;
    out.items_.push_back(std::move(item));
  }
  out.index_pool();
  return out;
}

void PremixtureSet::save(const std::filesystem::path &dir) const {
  std::filesystem::create_directories(dir);
  nlohmann::json index = nlohmann::json::array();
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const auto &it = items_[i];
    const std::string file = file_name(i);
    write_wav(dir / file, it.premixed, WavEncoding::kFloat32);
    nlohmann::json j = {{"id", it.id},
                        {"clean_ref_id", it.clean_ref_id},
                        {"premix_noise_id", it.premix_noise_id},
                        {"file", file}};
    if (std::isinf(it.premix_snr_db)) {
      j["premix_snr_db"] = "inf";
    } else {
      j["premix_snr_db"] = it.premix_snr_db;
    }
    index.push_back(std::move(j));
  }
  std::ofstream out(dir / "index.json", std::ios::trunc);
  if (!out) throw DataError("cannot write premixture index in " + dir.string());
  out << index.dump(2) << '\n';
}

PremixtureSet PremixtureSet::load(const std::filesystem::path &dir) {
  std::ifstream in(dir / "index.json");
  if (!in) throw DataError("no premixture index in " + dir.string());
  const auto index = nlohmann::json::parse(in);
  PremixtureSet out;
  for (const auto &j : index) {
    PremixtureItem it;
    it.id = j.at("id");
    it.clean_ref_id = j.at("clean_ref_id");
    it.premix_noise_id = j.at("premix_noise_id");
    const auto &snr = j.at("premix_snr_db");
    it.premix_snr_db = snr.is_string() ? kPremixDisabled : snr.get<double>();
    it.premixed = read_wav(dir / j.at("file").get<std::string>());
    out.items_.push_back(std::move(it));
  }
  out.index_pool();
  return out;
}

}  // namespace psenh
