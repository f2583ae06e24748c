// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "psenh/errors.hpp"

namespace psenh {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

namespace {

constexpr char kMagic[8] = {'P', 'S', 'E', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint64_t kMaxHeaderBytes = 64ull << 20;

}  // namespace

void to_json(nlohmann::json &j, const Provenance &p) {
  j = {{"scheme", p.scheme}, {"seed", p.seed}, {"step", p.step}};
  if (!p.premix_snr_db) {
    j["premix_snr_db"] = nullptr;
  } else if (std::isinf(*p.premix_snr_db)) {
    j["premix_snr_db"] = "inf";
  } else {
    j["premix_snr_db"] = *p.premix_snr_db;
  }
  if (!p.init_scheme.empty()) j["init_scheme"] = p.init_scheme;
  if (p.scheme == "finetune") j["ft_budget_sec"] = p.ft_budget_sec;
}

void from_json(const nlohmann::json &j, Provenance &p) {
  p = Provenance{};
  p.scheme = j.at("scheme").get<std::string>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.step = j.at("step").get<int>();
  const auto &snr = j.at("premix_snr_db");
  if (snr.is_string()) {
    p.premix_snr_db = std::numeric_limits<double>::infinity();
  } else if (!snr.is_null()) {
    p.premix_snr_db = snr.get<double>();
  }
  p.init_scheme = j.value("init_scheme", "");
  p.ft_budget_sec = j.value("ft_budget_sec", 0.0);
}

std::unique_ptr<EnhancementModel> ModelCheckpoint::instantiate() const {
  auto m = make_model(model, 0);
  m->params().assign(weights);
  return m;
}

ModelCheckpoint make_checkpoint(const EnhancementModel &model, Provenance provenance,
                                nlohmann::json experiment) {
  return ModelCheckpoint{model.config(), std::move(experiment), std::move(provenance),
                         model.params()};
}

void save_checkpoint(const ModelCheckpoint &c, const std::filesystem::path &path) {
  nlohmann::json dir = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto &t : c.weights.tensors()) {
    dir.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}, {"numel", t.data.size()}});
    offset += t.data.size() * sizeof(float);
  }
  const nlohmann::json header = {{"format", "psenh-checkpoint"},
                                 {"version", 1},
                                 {"model", c.model},
                                 {"experiment", c.experiment},
                                 {"provenance", c.provenance},
                                 {"tensors", dir}};
  const std::string text = header.dump();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint " + path.string());
    const std::uint64_t len = text.size();
    out.write(kMagic, sizeof(kMagic));
    out.write(reinterpret_cast<const char *>(&len), sizeof(len));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto &t : c.weights.tensors()) {
      out.write(reinterpret_cast<const char *>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    }
    if (!out) throw DataError("failed writing checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

ModelCheckpoint load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[8];
  std::uint64_t len = 0;
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(path.string() + ": not a psenh checkpoint (bad magic)");
  }
  if (!in.read(reinterpret_cast<char *>(&len), sizeof(len)) || len == 0 || len > kMaxHeaderBytes) {
    throw DataError(path.string() + ": corrupt checkpoint header length");
  }
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) {
    throw DataError(path.string() + ": truncated checkpoint header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw DataError(path.string() + ": corrupt checkpoint header: " + e.what());
  }

  ModelCheckpoint c;
  try {
    c.model = header.at("model").get<ModelConfig>();
    c.experiment = header.at("experiment");
    c.provenance = header.at("provenance").get<Provenance>();
    for (const auto &t : header.at("tensors")) {
      const std::size_t idx =
          c.weights.add(t.at("name").get<std::string>(), t.at("shape").get<std::vector<int>>());
      if (c.weights[idx].numel() != t.at("numel").get<std::size_t>()) {
        throw DataError(path.string() + ": tensor '" + c.weights[idx].name +
                        "' size disagrees with its shape");
      }
    }
  } catch (const nlohmann::json::exception &e) {
    throw DataError(path.string() + ": malformed checkpoint header: " + e.what());
  }
  for (auto &t : c.weights.tensors()) {
    if (!in.read(reinterpret_cast<char *>(t.data.data()),
                 static_cast<std::streamsize>(t.data.size() * sizeof(float)))) {
      throw DataError(path.string() + ": truncated data for tensor '" + t.name + "'");
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError(path.string() + ": trailing bytes after tensor data");
  }
  // Validates every tensor against the declared architecture.
  auto probe = make_model(c.model, 0);
  probe->params().assign(c.weights);
  return c;
}

}  // namespace psenh
