// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/model.hpp"

#include <nlohmann/json.hpp>

#include "psenh/errors.hpp"
#include "psenh/masknet.hpp"
#include "psenh/separator.hpp"

namespace psenh {

std::string ModelConfig::name() const {
  if (family == ModelFamily::kSeparator) return "convtasnet";
  return "gru" + std::to_string(masknet.hidden_size);
}

ModelConfig ModelConfig::from_name(const std::string &name) {
  ModelConfig c;
  if (name == "convtasnet") {
    c.family = ModelFamily::kSeparator;
    return c;
  }
  if (name.rfind("gru", 0) == 0) {
    try {
      std::size_t used = 0;
      c.masknet.hidden_size = std::stoi(name.substr(3), &used);
      if (used == name.size() - 3 && c.masknet.hidden_size > 0) return c;
    } catch (const std::exception &) {
    }
  }
  throw ConfigError("unknown architecture '" + name +
                    "' (expected gru64, gru128, gru256 or convtasnet)");
}

void to_json(nlohmann::json &j, const ModelConfig &c) {
  if (c.family == ModelFamily::kMaskNet) {
    j = {{"family", "masknet"},
         {"hidden_size", c.masknet.hidden_size},
         {"num_layers", c.masknet.num_layers},
         {"window_size", c.masknet.window_size}};
  } else {
    const auto &s = c.separator;
    j = {{"family", "separator"}, {"num_filters", s.num_filters}, {"filter_length", s.filter_length},
         {"bottleneck", s.bottleneck}, {"hidden", s.hidden},    {"skip", s.skip},
         {"kernel", s.kernel},         {"blocks", s.blocks},    {"repeats", s.repeats}};
  }
}

void from_json(const nlohmann::json &j, ModelConfig &c) {
  c = ModelConfig{};
  const std::string family = j.at("family");
  if (family == "masknet") {
    c.family = ModelFamily::kMaskNet;
    c.masknet.hidden_size = j.at("hidden_size");
    c.masknet.num_layers = j.value("num_layers", 2);
    c.masknet.window_size = j.value("window_size", 1024);
  } else if (family == "separator") {
    c.family = ModelFamily::kSeparator;
    auto &s = c.separator;
    s.num_filters = j.value("num_filters", s.num_filters);
    s.filter_length = j.value("filter_length", s.filter_length);
    s.bottleneck = j.value("bottleneck", s.bottleneck);
    s.hidden = j.value("hidden", s.hidden);
    s.skip = j.value("skip", s.skip);
    s.kernel = j.value("kernel", s.kernel);
    s.blocks = j.value("blocks", s.blocks);
    s.repeats = j.value("repeats", s.repeats);
  } else {
    throw ConfigError("unknown model family '" + family + "'");
  }
}

std::size_t param_count(const ModelConfig &config) {
  if (config.family == ModelFamily::kMaskNet) {
    const std::size_t h = config.masknet.hidden_size;
    const std::size_t bins = config.masknet.num_bins();
    std::size_t total = 0;
    std::size_t in = bins;
    for (int l = 0; l < config.masknet.num_layers; ++l) {
      // Three gates, each with input and recurrent weights and two biases.
      total += 3 * h * (in + h) + 3 * 2 * h;
      in = h;
    }
    return total + h * bins + bins;
  }
  const auto &s = config.separator;
  const std::size_t n = s.num_filters, l = s.filter_length, b = s.bottleneck, h = s.hidden,
                    sc = s.skip, p = s.kernel;
  const std::size_t block = (b * h + h) + 1 + 2 * h + (h * p + h) + 1 + 2 * h + (h * b + b) +
                            (h * sc + sc);
  return n * l                            // encoder
         + 2 * n + (n * b + b)            // input norm + bottleneck
         + block * s.blocks * s.repeats   // TCN
         + 1 + (sc * n + n)               // output PReLU + mask conv
         + n * l;                         // decoder
}

AudioClip EnhancementModel::enhance(const AudioClip &mixture) const {
  auto out = forward({&mixture.samples});
  return AudioClip(std::move(out.front()), mixture.sample_rate);
}

std::unique_ptr<EnhancementModel> make_model(const ModelConfig &config, std::uint64_t seed) {
  std::unique_ptr<EnhancementModel> m;
  if (config.family == ModelFamily::kMaskNet) {
    m = std::make_unique<MaskNet>(config.masknet);
  } else {
    m = std::make_unique<Separator>(config.separator);
  }
  m->initialize(seed);
  return m;
}

}  // namespace psenh
