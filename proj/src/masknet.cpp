// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/masknet.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "psenh/errors.hpp"
#include "psenh/rng.hpp"

namespace psenh {

namespace {

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived> &x) {
  return (1.0f + (-x).exp()).inverse();
}

// Tensor indices within params_: four per GRU layer, then dense weight/bias.
constexpr std::size_t kPerLayer = 4;
enum LayerTensor : std::size_t { kWih = 0, kWhh = 1, kBih = 2, kBhh = 3 };

}  // namespace

MaskNet::MaskNet(const MaskNetConfig &config)
    : EnhancementModel(ModelConfig{ModelFamily::kMaskNet, config, {}}),
      stft_(config.window_size) {
  if (config.hidden_size < 1 || config.num_layers < 1) {
    throw ConfigError("mask net needs a positive hidden size and layer count");
  }
  const double window_sum = std::accumulate(stft_.window().begin(), stft_.window().end(), 0.0);
  feature_scale_ = static_cast<float>(2.0 / window_sum);
  const int h = config.hidden_size;
  int in = config.num_bins();
  for (int l = 0; l < config.num_layers; ++l) {
    const std::string sfx = "_l" + std::to_string(l);
    params_.add("gru.weight_ih" + sfx, {3 * h, in});
    params_.add("gru.weight_hh" + sfx, {3 * h, h});
    params_.add("gru.bias_ih" + sfx, {3 * h});
    params_.add("gru.bias_hh" + sfx, {3 * h});
    in = h;
  }
  params_.add("dense.weight", {config.num_bins(), h});
  params_.add("dense.bias", {config.num_bins()});
}

void MaskNet::initialize(std::uint64_t seed) {
  Rng rng(derive_seed(seed, {hash_name("masknet-init")}));
  const float gru_bound = 1.0f / std::sqrt(static_cast<float>(hidden()));
  const std::size_t dense = params_.size() - 2;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const float bound = i < dense ? gru_bound : 1.0f / std::sqrt(static_cast<float>(hidden()));
    std::uniform_real_distribution<float> dist(-bound, bound);
    for (float &v : params_[i].data) v = dist(rng);
  }
}

std::size_t MaskNet::min_input_length() const {
  return static_cast<std::size_t>(config_.masknet.window_size);
}

std::unique_ptr<EnhancementModel> MaskNet::clone() const {
  return std::make_unique<MaskNet>(*this);
}

void MaskNet::run(const std::vector<const Signal *> &inputs, Cache &cache) const {
  const int batch = static_cast<int>(inputs.size());
  const int bins = num_bins();
  const int h = hidden();
  cache.specs.clear();
  cache.specs.reserve(batch);
  for (const Signal *x : inputs) {
    if (x->size() < min_input_length()) {
      throw ShapeError("mask net input of " + std::to_string(x->size()) +
                       " samples is shorter than one STFT window");
    }
    cache.specs.push_back(stft_.analyze(std::span<const double>(*x)));
  }
  const int frames = cache.specs.front().num_frames;
  const Eigen::Index cols = static_cast<Eigen::Index>(frames) * batch;
  cache.features.resize(bins, cols);
  for (int b = 0; b < batch; ++b) {
    const auto &spec = cache.specs[b];
    for (int t = 0; t < frames; ++t) {
      auto col = cache.features.col(static_cast<Eigen::Index>(t) * batch + b);
      for (int k = 0; k < bins; ++k) col(k) = static_cast<float>(std::abs(spec.at(t, k))) * feature_scale_;
    }
  }

  const int layers = config_.masknet.num_layers;
  cache.layers.resize(layers);
  for (int l = 0; l < layers; ++l) {
    const Eigen::Ref<const MatrixF> input =
        l == 0 ? Eigen::Ref<const MatrixF>(cache.features)
               : Eigen::Ref<const MatrixF>(cache.layers[l - 1].h.rightCols(cols));
    const auto wih = params_[l * kPerLayer + kWih].matrix();
    const auto whh = params_[l * kPerLayer + kWhh].matrix();
    const auto bih = params_[l * kPerLayer + kBih].vector();
    const auto bhh = params_[l * kPerLayer + kBhh].vector();
    LayerCache &lc = cache.layers[l];
    MatrixF gi = wih * input;
    gi.colwise() += bih;
    lc.r.resize(h, cols);
    lc.z.resize(h, cols);
    lc.n.resize(h, cols);
    lc.hn.resize(h, cols);
    lc.h.setZero(h, cols + batch);
    MatrixF gh(3 * h, batch);
    for (int t = 0; t < frames; ++t) {
      const Eigen::Index c0 = static_cast<Eigen::Index>(t) * batch;
      const auto hprev = lc.h.middleCols(c0, batch);
      gh.noalias() = whh * hprev;
      gh.colwise() += bhh;
      lc.r.middleCols(c0, batch) =
          sigmoid((gi.block(0, c0, h, batch) + gh.topRows(h)).array()).matrix();
      lc.z.middleCols(c0, batch) =
          sigmoid((gi.block(h, c0, h, batch) + gh.middleRows(h, h)).array()).matrix();
      lc.hn.middleCols(c0, batch) = gh.bottomRows(h);
      lc.n.middleCols(c0, batch) = (gi.block(2 * h, c0, h, batch).array() +
                                    lc.r.middleCols(c0, batch).array() * gh.bottomRows(h).array())
                                       .tanh()
                                       .matrix();
      const auto z = lc.z.middleCols(c0, batch).array();
      lc.h.middleCols(c0 + batch, batch) =
          ((1.0f - z) * lc.n.middleCols(c0, batch).array() + z * hprev.array()).matrix();
    }
  }

  const auto wd = params_[layers * kPerLayer].matrix();
  const auto bd = params_[layers * kPerLayer + 1].vector();
  cache.mask.noalias() = wd * cache.layers.back().h.rightCols(cols);
  cache.mask.colwise() += bd;
  cache.mask = sigmoid(cache.mask.array()).matrix();
}

std::vector<Signal> MaskNet::synthesize(const Cache &cache,
                                        const std::vector<const Signal *> &inputs) const {
  const int batch = static_cast<int>(inputs.size());
  std::vector<Signal> out(batch);
  for (int b = 0; b < batch; ++b) {
    Spectrogram spec = cache.specs[b];
    const int bins = spec.num_bins;
    for (int t = 0; t < spec.num_frames; ++t) {
      const auto col = cache.mask.col(static_cast<Eigen::Index>(t) * batch + b);
      for (int k = 0; k < bins; ++k) spec.at(t, k) *= static_cast<double>(col(k));
    }
    out[b] = stft_.synthesize(spec, inputs[b]->size()).samples;
  }
  return out;
}

namespace {

// Groups input indices by length so each group runs as one batch.
std::map<std::size_t, std::vector<std::size_t>> by_length(const std::vector<const Signal *> &inputs) {
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < inputs.size(); ++i) groups[inputs[i]->size()].push_back(i);
  return groups;
}

}  // namespace

std::vector<Signal> MaskNet::forward(const std::vector<const Signal *> &inputs) const {
  std::vector<Signal> out(inputs.size());
  for (const auto &[len, idx] : by_length(inputs)) {
    std::vector<const Signal *> group;
    for (auto i : idx) group.push_back(inputs[i]);
    Cache cache;
    run(group, cache);
    auto ys = synthesize(cache, group);
    for (std::size_t j = 0; j < idx.size(); ++j) out[idx[j]] = std::move(ys[j]);
  }
  return out;
}

MaskNetOutput MaskNet::enhance_with_mask(const AudioClip &mixture) const {
  Cache cache;
  run({&mixture.samples}, cache);
  MaskNetOutput out;
  out.estimate = AudioClip(synthesize(cache, {&mixture.samples}).front(), mixture.sample_rate);
  const auto &spec = cache.specs.front();
  out.mask.num_frames = spec.num_frames;
  out.mask.num_bins = spec.num_bins;
  out.mask.values.resize(spec.frames.size());
  for (int t = 0; t < spec.num_frames; ++t) {
    for (int k = 0; k < spec.num_bins; ++k) out.mask.at(t, k) = cache.mask(k, t);
  }
  return out;
}

void MaskNet::backward(const std::vector<const Signal *> &inputs,
                       const std::vector<Signal> &grad_outputs, ParameterSet &grads) const {
  if (grad_outputs.size() != inputs.size()) {
    throw ShapeError("mask net backward: gradient count does not match inputs");
  }
  const int layers = config_.masknet.num_layers;
  const int h = hidden();
  for (const auto &[len, idx] : by_length(inputs)) {
    std::vector<const Signal *> group;
    for (auto i : idx) group.push_back(inputs[i]);
    Cache cache;
    run(group, cache);
    const int batch = static_cast<int>(group.size());
    const int frames = cache.specs.front().num_frames;
    const Eigen::Index cols = static_cast<Eigen::Index>(frames) * batch;

    // dL/dmask through inverse STFT, then through the sigmoid.
    MatrixF d_act(num_bins(), cols);
    for (int b = 0; b < batch; ++b) {
      const RatioMask dm = stft_.mask_gradient(cache.specs[b], grad_outputs[idx[b]]);
      for (int t = 0; t < frames; ++t) {
        auto col = d_act.col(static_cast<Eigen::Index>(t) * batch + b);
        for (int k = 0; k < num_bins(); ++k) col(k) = static_cast<float>(dm.at(t, k));
      }
    }
    d_act.array() *= cache.mask.array() * (1.0f - cache.mask.array());

    const auto top = cache.layers.back().h.rightCols(cols);
    grads[layers * kPerLayer].matrix().noalias() += d_act * top.transpose();
    grads[layers * kPerLayer + 1].vector() += d_act.rowwise().sum();
    MatrixF d_out = params_[layers * kPerLayer].matrix().transpose() * d_act;

    for (int l = layers - 1; l >= 0; --l) {
      const LayerCache &lc = cache.layers[l];
      const auto whh = params_[l * kPerLayer + kWhh].matrix();
      MatrixF d_gi(3 * h, cols);
      MatrixF d_gh(3 * h, cols);
      MatrixF carry = MatrixF::Zero(h, batch);
      for (int t = frames - 1; t >= 0; --t) {
        const Eigen::Index c0 = static_cast<Eigen::Index>(t) * batch;
        const MatrixF dh = d_out.middleCols(c0, batch) + carry;
        const auto r = lc.r.middleCols(c0, batch).array();
        const auto z = lc.z.middleCols(c0, batch).array();
        const auto n = lc.n.middleCols(c0, batch).array();
        const auto hn = lc.hn.middleCols(c0, batch).array();
        const auto hprev = lc.h.middleCols(c0, batch).array();
        const auto dha = dh.array();
        const auto dan = (dha * (1.0f - z) * (1.0f - n * n)).eval();
        const auto dar = (dan * hn * r * (1.0f - r)).eval();
        const auto daz = (dha * (hprev - n) * z * (1.0f - z)).eval();
        d_gi.block(0, c0, h, batch) = dar.matrix();
        d_gi.block(h, c0, h, batch) = daz.matrix();
        d_gi.block(2 * h, c0, h, batch) = dan.matrix();
        d_gh.block(0, c0, h, batch) = dar.matrix();
        d_gh.block(h, c0, h, batch) = daz.matrix();
        d_gh.block(2 * h, c0, h, batch) = (dan * r).matrix();
        carry = (dha * z).matrix();
        carry.noalias() += whh.transpose() * d_gh.middleCols(c0, batch);
      }
      const Eigen::Ref<const MatrixF> input =
          l == 0 ? Eigen::Ref<const MatrixF>(cache.features)
                 : Eigen::Ref<const MatrixF>(cache.layers[l - 1].h.rightCols(cols));
      grads[l * kPerLayer + kWih].matrix().noalias() += d_gi * input.transpose();
      grads[l * kPerLayer + kWhh].matrix().noalias() += d_gh * lc.h.leftCols(cols).transpose();
      grads[l * kPerLayer + kBih].vector() += d_gi.rowwise().sum();
      grads[l * kPerLayer + kBhh].vector() += d_gh.rowwise().sum();
      if (l > 0) d_out = params_[l * kPerLayer + kWih].matrix().transpose() * d_gi;
    }
  }
}

}  // namespace psenh
