// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/separator.hpp"

#include <cmath>

#include "psenh/errors.hpp"
#include "psenh/rng.hpp"

namespace psenh {

namespace {

constexpr float kNormEps = 1e-8f;

// Global layer norm over all channels and frames, per-channel affine.
MatrixF global_norm(const MatrixF &x, ConstMapVectorF gamma, ConstMapVectorF beta,
                    float &inv_std, MatrixF &xhat) {
  const double n = static_cast<double>(x.size());
  const double mean = x.cast<double>().sum() / n;
  const double var = (x.cast<double>().array() - mean).square().sum() / n;
  inv_std = static_cast<float>(1.0 / std::sqrt(var + kNormEps));
  xhat = ((x.array() - static_cast<float>(mean)) * inv_std).matrix();
  MatrixF y = (xhat.array().colwise() * gamma.array()).matrix();
  y.colwise() += beta;
  return y;
}

MatrixF global_norm_backward(const MatrixF &dy, const MatrixF &xhat, float inv_std,
                             ConstMapVectorF gamma, MapVectorF dgamma, MapVectorF dbeta) {
  dgamma += (dy.array() * xhat.array()).rowwise().sum().matrix();
  dbeta += dy.rowwise().sum();
  const MatrixF dxhat = (dy.array().colwise() * gamma.array()).matrix();
  const double n = static_cast<double>(dy.size());
  const float mean_d = static_cast<float>(dxhat.cast<double>().sum() / n);
  const float mean_dx = static_cast<float>((dxhat.array() * xhat.array()).cast<double>().sum() / n);
  return ((dxhat.array() - mean_d - xhat.array() * mean_dx) * inv_std).matrix();
}

MatrixF prelu(const MatrixF &x, float a) {
  return x.unaryExpr([a](float v) { return v > 0.0f ? v : a * v; });
}

MatrixF prelu_backward(const MatrixF &x, float a, const MatrixF &dy, float &da) {
  double acc = 0.0;
  MatrixF dx(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const float v = x.data()[i];
    const float g = dy.data()[i];
    if (v > 0.0f) {
      dx.data()[i] = g;
    } else {
      dx.data()[i] = a * g;
      acc += static_cast<double>(g) * v;
    }
  }
  da += static_cast<float>(acc);
  return dx;
}

// Valid output range [k0, k1) for tap offset `off` over K frames.
inline void tap_range(Eigen::Index frames, Eigen::Index off, Eigen::Index &k0, Eigen::Index &k1) {
  k0 = std::max<Eigen::Index>(0, -off);
  k1 = std::min<Eigen::Index>(frames, frames - off);
}

MatrixF depthwise_conv(const MatrixF &x, ConstMapMatrixF w, ConstMapVectorF b, int dilation) {
  const Eigen::Index frames = x.cols();
  const int taps = static_cast<int>(w.cols());
  const Eigen::Index pad = static_cast<Eigen::Index>(dilation) * (taps - 1) / 2;
  MatrixF y(x.rows(), frames);
  y.colwise() = b;
  for (int j = 0; j < taps; ++j) {
    const Eigen::Index off = static_cast<Eigen::Index>(j) * dilation - pad;
    Eigen::Index k0, k1;
    tap_range(frames, off, k0, k1);
    if (k1 <= k0) continue;
    y.middleCols(k0, k1 - k0).array() +=
        x.middleCols(k0 + off, k1 - k0).array().colwise() * w.col(j).array();
  }
  return y;
}

MatrixF depthwise_conv_backward(const MatrixF &dy, const MatrixF &x, ConstMapMatrixF w,
                                int dilation, MapMatrixF dw, MapVectorF db) {
  const Eigen::Index frames = x.cols();
  const int taps = static_cast<int>(w.cols());
  const Eigen::Index pad = static_cast<Eigen::Index>(dilation) * (taps - 1) / 2;
  MatrixF dx = MatrixF::Zero(x.rows(), frames);
  db += dy.rowwise().sum();
  for (int j = 0; j < taps; ++j) {
    const Eigen::Index off = static_cast<Eigen::Index>(j) * dilation - pad;
    Eigen::Index k0, k1;
    tap_range(frames, off, k0, k1);
    if (k1 <= k0) continue;
    const auto g = dy.middleCols(k0, k1 - k0).array();
    dx.middleCols(k0 + off, k1 - k0).array() += g.colwise() * w.col(j).array();
    dw.col(j) += (g * x.middleCols(k0 + off, k1 - k0).array()).rowwise().sum().matrix();
  }
  return dx;
}

template <typename Derived>
MatrixF sigmoid(const Eigen::MatrixBase<Derived> &x) {
  return (1.0f + (-x.array()).exp()).inverse().matrix();
}

}  // namespace

Separator::Separator(const SeparatorConfig &c)
    : EnhancementModel(ModelConfig{ModelFamily::kSeparator, {}, c}) {
  if (c.filter_length < 2 || c.filter_length % 2 != 0) {
    throw ConfigError("separator filter length must be even and >= 2");
  }
  if (c.kernel < 1 || c.kernel % 2 == 0) throw ConfigError("separator kernel must be odd");
  encoder_ = params_.add("encoder.weight", {c.num_filters, c.filter_length});
  in_norm_g_ = params_.add("input_norm.gamma", {c.num_filters});
  in_norm_b_ = params_.add("input_norm.beta", {c.num_filters});
  bottleneck_w_ = params_.add("bottleneck.weight", {c.bottleneck, c.num_filters});
  bottleneck_b_ = params_.add("bottleneck.bias", {c.bottleneck});
  for (int r = 0; r < c.repeats; ++r) {
    for (int x = 0; x < c.blocks; ++x) {
      const std::string p = "tcn." + std::to_string(r * c.blocks + x) + ".";
      BlockIndex b{};
      b.conv_in_w = params_.add(p + "conv_in.weight", {c.hidden, c.bottleneck});
      b.conv_in_b = params_.add(p + "conv_in.bias", {c.hidden});
      b.prelu1 = params_.add(p + "prelu1", {1});
      b.norm1_g = params_.add(p + "norm1.gamma", {c.hidden});
      b.norm1_b = params_.add(p + "norm1.beta", {c.hidden});
      b.dconv_w = params_.add(p + "dconv.weight", {c.hidden, c.kernel});
      b.dconv_b = params_.add(p + "dconv.bias", {c.hidden});
      b.prelu2 = params_.add(p + "prelu2", {1});
      b.norm2_g = params_.add(p + "norm2.gamma", {c.hidden});
      b.norm2_b = params_.add(p + "norm2.beta", {c.hidden});
      b.res_w = params_.add(p + "res.weight", {c.bottleneck, c.hidden});
      b.res_b = params_.add(p + "res.bias", {c.bottleneck});
      b.skip_w = params_.add(p + "skip.weight", {c.skip, c.hidden});
      b.skip_b = params_.add(p + "skip.bias", {c.skip});
      b.dilation = 1 << x;
      blocks_.push_back(b);
    }
  }
  out_prelu_ = params_.add("output_prelu", {1});
  mask_w_ = params_.add("mask.weight", {c.num_filters, c.skip});
  mask_b_ = params_.add("mask.bias", {c.num_filters});
  decoder_ = params_.add("decoder.weight", {c.filter_length, c.num_filters});
}

void Separator::initialize(std::uint64_t seed) {
  Rng rng(derive_seed(seed, {hash_name("separator-init")}));
  auto fill_uniform = [&rng](Tensor &t, int fan_in) {
    const float bound = 1.0f / std::sqrt(static_cast<float>(fan_in));
    std::uniform_real_distribution<float> dist(-bound, bound);
    for (float &v : t.data) v = dist(rng);
  };
  auto fill = [](Tensor &t, float v) { std::fill(t.data.begin(), t.data.end(), v); };
  const auto &c = config_.separator;
  fill_uniform(params_[encoder_], c.filter_length);
  fill(params_[in_norm_g_], 1.0f);
  fill(params_[in_norm_b_], 0.0f);
  fill_uniform(params_[bottleneck_w_], c.num_filters);
  fill_uniform(params_[bottleneck_b_], c.num_filters);
  for (const auto &b : blocks_) {
    fill_uniform(params_[b.conv_in_w], c.bottleneck);
    fill_uniform(params_[b.conv_in_b], c.bottleneck);
    fill(params_[b.prelu1], 0.25f);
    fill(params_[b.norm1_g], 1.0f);
    fill(params_[b.norm1_b], 0.0f);
    fill_uniform(params_[b.dconv_w], c.kernel);
    fill_uniform(params_[b.dconv_b], c.kernel);
    fill(params_[b.prelu2], 0.25f);
    fill(params_[b.norm2_g], 1.0f);
    fill(params_[b.norm2_b], 0.0f);
    fill_uniform(params_[b.res_w], c.hidden);
    fill_uniform(params_[b.res_b], c.hidden);
    fill_uniform(params_[b.skip_w], c.hidden);
    fill_uniform(params_[b.skip_b], c.hidden);
  }
  fill(params_[out_prelu_], 0.25f);
  fill_uniform(params_[mask_w_], c.skip);
  fill_uniform(params_[mask_b_], c.skip);
  fill_uniform(params_[decoder_], c.filter_length);
}

std::size_t Separator::min_input_length() const {
  return static_cast<std::size_t>(config_.separator.filter_length);
}

std::unique_ptr<EnhancementModel> Separator::clone() const {
  return std::make_unique<Separator>(*this);
}

Signal Separator::run(const Signal &x, Cache *cache) const {
  const auto &c = config_.separator;
  const int len = c.filter_length;
  const int hop = stride();
  if (x.size() < static_cast<std::size_t>(len)) {
    throw ShapeError("separator input of " + std::to_string(x.size()) +
                     " samples is shorter than the encoder filter (" + std::to_string(len) + ")");
  }
  const int frames = static_cast<int>((x.size() - len + hop - 1) / hop) + 1;

  Cache local;
  Cache &k = cache ? *cache : local;
  k.length = x.size();
  k.frames = frames;
  k.segments.resize(len, frames);
  for (int f = 0; f < frames; ++f) {
    for (int l = 0; l < len; ++l) {
      const std::size_t p = static_cast<std::size_t>(f) * hop + l;
      k.segments(l, f) = p < x.size() ? static_cast<float>(x[p]) : 0.0f;
    }
  }
  k.enc_pre.noalias() = params_[encoder_].matrix() * k.segments;
  k.enc = k.enc_pre.cwiseMax(0.0f);

  const MatrixF normed = global_norm(k.enc, params_[in_norm_g_].vector(),
                                     params_[in_norm_b_].vector(), k.in_norm.inv_std,
                                     k.in_norm.xhat);
  MatrixF stream = params_[bottleneck_w_].matrix() * normed;
  stream.colwise() += params_[bottleneck_b_].vector();
  k.bottleneck_in = normed;

  k.skip.setZero(c.skip, frames);
  k.blocks.resize(cache ? blocks_.size() : 0);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto &b = blocks_[i];
    BlockCache tmp;
    BlockCache &bc = cache ? k.blocks[i] : tmp;
    bc.input = stream;
    bc.a1.noalias() = params_[b.conv_in_w].matrix() * stream;
    bc.a1.colwise() += params_[b.conv_in_b].vector();
    bc.g1 = global_norm(prelu(bc.a1, params_[b.prelu1].data[0]), params_[b.norm1_g].vector(),
                        params_[b.norm1_b].vector(), bc.n1.inv_std, bc.n1.xhat);
    bc.c = depthwise_conv(bc.g1, params_[b.dconv_w].matrix(), params_[b.dconv_b].vector(),
                          b.dilation);
    bc.g2 = global_norm(prelu(bc.c, params_[b.prelu2].data[0]), params_[b.norm2_g].vector(),
                        params_[b.norm2_b].vector(), bc.n2.inv_std, bc.n2.xhat);
    stream.noalias() += params_[b.res_w].matrix() * bc.g2;
    stream.colwise() += params_[b.res_b].vector();
    k.skip.noalias() += params_[b.skip_w].matrix() * bc.g2;
    k.skip.colwise() += params_[b.skip_b].vector();
  }

  MatrixF logits = params_[mask_w_].matrix() * prelu(k.skip, params_[out_prelu_].data[0]);
  logits.colwise() += params_[mask_b_].vector();
  k.mask = sigmoid(logits);
  const MatrixF frames_out =
      params_[decoder_].matrix() * (k.mask.array() * k.enc.array()).matrix();

  Signal y(x.size(), 0.0);
  for (int f = 0; f < frames; ++f) {
    for (int l = 0; l < len; ++l) {
      const std::size_t p = static_cast<std::size_t>(f) * hop + l;
      if (p < y.size()) y[p] += frames_out(l, f);
    }
  }
  return y;
}

std::vector<Signal> Separator::forward(const std::vector<const Signal *> &inputs) const {
  std::vector<Signal> out;
  out.reserve(inputs.size());
  for (const Signal *x : inputs) out.push_back(run(*x, nullptr));
  return out;
}

void Separator::backward(const std::vector<const Signal *> &inputs,
                         const std::vector<Signal> &grad_outputs, ParameterSet &grads) const {
  if (grad_outputs.size() != inputs.size()) {
    throw ShapeError("separator backward: gradient count does not match inputs");
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) backward_one(*inputs[i], grad_outputs[i], grads);
}

void Separator::backward_one(const Signal &x, const Signal &grad, ParameterSet &grads) const {
  if (grad.size() != x.size()) throw ShapeError("separator backward: gradient length mismatch");
  Cache k;
  run(x, &k);
  const int len = config_.separator.filter_length;
  const int hop = stride();

  MatrixF d_frames(len, k.frames);
  for (int f = 0; f < k.frames; ++f) {
    for (int l = 0; l < len; ++l) {
      const std::size_t p = static_cast<std::size_t>(f) * hop + l;
      d_frames(l, f) = p < grad.size() ? static_cast<float>(grad[p]) : 0.0f;
    }
  }
  const MatrixF masked = (k.mask.array() * k.enc.array()).matrix();
  grads[decoder_].matrix().noalias() += d_frames * masked.transpose();
  const MatrixF d_masked = params_[decoder_].matrix().transpose() * d_frames;
  MatrixF d_enc = (d_masked.array() * k.mask.array()).matrix();
  const MatrixF d_logits =
      (d_masked.array() * k.enc.array() * k.mask.array() * (1.0f - k.mask.array())).matrix();

  const float out_a = params_[out_prelu_].data[0];
  grads[mask_w_].matrix().noalias() += d_logits * prelu(k.skip, out_a).transpose();
  grads[mask_b_].vector() += d_logits.rowwise().sum();
  const MatrixF d_q = params_[mask_w_].matrix().transpose() * d_logits;
  const MatrixF d_skip = prelu_backward(k.skip, out_a, d_q, grads[out_prelu_].data[0]);

  // The residual stream after the last block feeds nothing.
  MatrixF d_stream = MatrixF::Zero(config_.separator.bottleneck, k.frames);
  for (std::size_t i = blocks_.size(); i-- > 0;) {
    const auto &b = blocks_[i];
    const BlockCache &bc = k.blocks[i];
    grads[b.res_w].matrix().noalias() += d_stream * bc.g2.transpose();
    grads[b.res_b].vector() += d_stream.rowwise().sum();
    grads[b.skip_w].matrix().noalias() += d_skip * bc.g2.transpose();
    grads[b.skip_b].vector() += d_skip.rowwise().sum();
    MatrixF d_g2 = params_[b.res_w].matrix().transpose() * d_stream;
    d_g2.noalias() += params_[b.skip_w].matrix().transpose() * d_skip;

    const MatrixF d_p2 = global_norm_backward(d_g2, bc.n2.xhat, bc.n2.inv_std,
                                              params_[b.norm2_g].vector(),
                                              grads[b.norm2_g].vector(), grads[b.norm2_b].vector());
    const MatrixF d_c = prelu_backward(bc.c, params_[b.prelu2].data[0], d_p2, grads[b.prelu2].data[0]);
    const MatrixF d_g1 = depthwise_conv_backward(d_c, bc.g1, params_[b.dconv_w].matrix(), b.dilation,
                                                 grads[b.dconv_w].matrix(), grads[b.dconv_b].vector());
    const MatrixF d_p1 = global_norm_backward(d_g1, bc.n1.xhat, bc.n1.inv_std,
                                              params_[b.norm1_g].vector(),
                                              grads[b.norm1_g].vector(), grads[b.norm1_b].vector());
    const MatrixF d_a1 = prelu_backward(bc.a1, params_[b.prelu1].data[0], d_p1, grads[b.prelu1].data[0]);
    grads[b.conv_in_w].matrix().noalias() += d_a1 * bc.input.transpose();
    grads[b.conv_in_b].vector() += d_a1.rowwise().sum();
    d_stream.noalias() += params_[b.conv_in_w].matrix().transpose() * d_a1;
  }

  grads[bottleneck_w_].matrix().noalias() += d_stream * k.bottleneck_in.transpose();
  grads[bottleneck_b_].vector() += d_stream.rowwise().sum();
  const MatrixF d_normed = params_[bottleneck_w_].matrix().transpose() * d_stream;
  d_enc += global_norm_backward(d_normed, k.in_norm.xhat, k.in_norm.inv_std,
                                params_[in_norm_g_].vector(), grads[in_norm_g_].vector(),
                                grads[in_norm_b_].vector());
  const MatrixF d_pre = (d_enc.array() * (k.enc_pre.array() > 0.0f).cast<float>()).matrix();
  grads[encoder_].matrix().noalias() += d_pre * k.segments.transpose();
}

}  // namespace psenh
