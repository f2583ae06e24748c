// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>

#include "psenh/adam.hpp"
#include "psenh/checkpoint.hpp"
#include "psenh/errors.hpp"
#include "psenh/premixture.hpp"
#include "psenh/trainer.hpp"
#include "test_helpers.hpp"

namespace psenh {
namespace {

using testing::gaussian_signal;
using testing::sine;

ModelConfig tiny_config() { return ModelConfig::from_name("gru8"); }

// Harmonic "speech" so that enhancement is learnable in a few steps.
ClipPool speech_pool(const std::string &prefix, int n, std::uint64_t seed) {
  ClipPool p;
  for (int i = 0; i < n; ++i) {
    Signal s = sine(12000, 150.0 + 20.0 * i + seed, 0.1);
    const Signal h = sine(12000, 2 * (150.0 + 20.0 * i + seed), 0.05, 0.3);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] += h[k];
    p.push_back({prefix + std::to_string(i) + ".wav", AudioClip(std::move(s))});
  }
  return p;
}

ClipPool noise_pool(const std::string &prefix, int n, std::uint64_t seed) {
  ClipPool p;
  for (int i = 0; i < n; ++i) {
    p.push_back({prefix + std::to_string(i) + ".wav", AudioClip(gaussian_signal(12000, seed + i, 0.1))});
  }
  return p;
}

TrainConfig quick_config(const std::string &scheme_name) {
  TrainConfig c;
  c.scheme = scheme_name;
  c.batch_size = 4;
  c.max_steps = 6;
  c.validation_every = 3;
  c.validation_size = 4;
  c.clip_sec = 0.25;
  c.seed = 5;
  c.prefetch = 0;
  return c;
}

TEST(Checkpoint, RoundTripIsBitwise) {
  const auto dir = testing::scratch_dir("ckpt");
  const auto model = make_model(tiny_config(), 3);
  const auto ckpt = make_checkpoint(*model, Provenance{scheme::kContrastive, 7, 12, 10.0, "", 0.0},
                                    {{"note", "x"}});
  save_checkpoint(ckpt, dir / "a.ckpt");
  const auto back = load_checkpoint(dir / "a.ckpt");
  EXPECT_EQ(back.model, ckpt.model);
  EXPECT_EQ(back.provenance, ckpt.provenance);
  EXPECT_EQ(back.experiment, ckpt.experiment);
  EXPECT_EQ(back.weights, ckpt.weights);
  const Signal x = gaussian_signal(4000, 1, 0.1);
  EXPECT_EQ(back.instantiate()->forward({&x}), model->forward({&x}));
}

TEST(Checkpoint, DisabledPremixSurvivesRoundTrip) {
  const auto dir = testing::scratch_dir("ckpt_inf");
  const auto model = make_model(tiny_config(), 3);
  const auto ckpt = make_checkpoint(
      *model, Provenance{scheme::kPseudoSe, 1, 0, std::numeric_limits<double>::infinity(), "", 0.0});
  save_checkpoint(ckpt, dir / "a.ckpt");
  const auto back = load_checkpoint(dir / "a.ckpt");
  ASSERT_TRUE(back.provenance.premix_snr_db.has_value());
  EXPECT_TRUE(std::isinf(*back.provenance.premix_snr_db));
}

TEST(Checkpoint, ArchitectureMismatchNamesTheTensor) {
  auto ckpt = make_checkpoint(*make_model(tiny_config(), 3), Provenance{scheme::kRandomInit});
  ckpt.model = ModelConfig::from_name("gru16");
  try {
    ckpt.instantiate();
    FAIL() << "expected ShapeError";
  } catch (const ShapeError &e) {
    EXPECT_NE(std::string(e.what()).find("gru."), std::string::npos) << e.what();
  }
}

TEST(Checkpoint, CorruptFilesAreDataErrors) {
  const auto dir = testing::scratch_dir("ckpt_bad");
  const auto ckpt = make_checkpoint(*make_model(tiny_config(), 3), Provenance{scheme::kRandomInit});
  save_checkpoint(ckpt, dir / "good.ckpt");
  std::ifstream in(dir / "good.ckpt", std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), {});
  std::ofstream(dir / "short.ckpt", std::ios::binary) << bytes.substr(0, bytes.size() - 10);
  std::ofstream(dir / "magic.ckpt", std::ios::binary) << "NOTACKPT" << bytes.substr(8);
  std::ofstream(dir / "long.ckpt", std::ios::binary) << bytes << "extra";
  EXPECT_THROW(load_checkpoint(dir / "short.ckpt"), DataError);
  EXPECT_THROW(load_checkpoint(dir / "magic.ckpt"), DataError);
  EXPECT_THROW(load_checkpoint(dir / "long.ckpt"), DataError);
  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), DataError);
}

TEST(Adam, MinimizesAQuadratic) {
  ParameterSet p;
  p.add("w", {3});
  p[0].data = {1.0f, -2.0f, 0.5f};
  const std::vector<float> target = {0.25f, 0.75f, -1.0f};
  Adam adam(p, AdamConfig{0.05});
  ParameterSet g = p.zeros_like();
  for (int t = 0; t < 2000; ++t) {
    for (int i = 0; i < 3; ++i) g[0].data[i] = 2.0f * (p[0].data[i] - target[i]);
    adam.step(p, g);
  }
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[0].data[i], target[i], 1e-3);
  EXPECT_EQ(adam.steps_taken(), 2000);
}

TEST(Adam, FirstStepMovesEachWeightByTheLearningRate) {
  ParameterSet p;
  p.add("w", {2});
  ParameterSet g = p.zeros_like();
  g[0].data = {3.0f, -0.01f};
  Adam adam(p, AdamConfig{1e-3});
  adam.step(p, g);
  EXPECT_NEAR(p[0].data[0], -1e-3, 1e-7);
  EXPECT_NEAR(p[0].data[1], 1e-3, 1e-6);
}

TEST(Adam, GlobalNormClipping) {
  ParameterSet g;
  g.add("a", {2});
  g.add("b", {1});
  g[0].data = {3.0f, 0.0f};
  g[1].data = {4.0f};
  EXPECT_NEAR(clip_global_norm(g, 1.0), 5.0, 1e-6);
  EXPECT_NEAR(std::sqrt(g.squared_norm()), 1.0, 1e-6);
  EXPECT_NEAR(clip_global_norm(g, 10.0), 1.0, 1e-6);
  EXPECT_NEAR(std::sqrt(g.squared_norm()), 1.0, 1e-6);
}

TEST(TrainConfig, JsonRoundTripAndValidation) {
  TrainConfig c = quick_config(scheme::kContrastive);
  c.contrastive = {0.2, 0.01};
  c.reduction = Reduction::kMean;
  c.premix_snr_db = 5.0;
  const auto back = nlohmann::json(c).get<TrainConfig>();
  EXPECT_EQ(back, c);
  EXPECT_THROW(nlohmann::json({{"batch_sise", 3}}).get<TrainConfig>(), ConfigError);
  EXPECT_THROW(nlohmann::json({{"reduction", "max"}}).get<TrainConfig>(), ConfigError);
  c.batch_size = 0;
  EXPECT_THROW(validate_train_config(c), ConfigError);
  EXPECT_EQ(default_train_config(ModelConfig::from_name("convtasnet")).batch_size, 8);
}

TEST(Holdout, KeepsEnoughTrainingItems) {
  for (std::size_t n = 0; n < 40; ++n) {
    for (std::size_t min_train : {1u, 2u}) {
      const auto h = split_holdout(n, 0.1, min_train);
      EXPECT_EQ(h.train.size() + h.validation.size(), n);
      if (!h.validation.empty()) EXPECT_GE(h.train.size(), min_train);
      if (n >= min_train + 1) EXPECT_FALSE(h.validation.empty()) << n;
      for (auto v : h.validation) EXPECT_EQ(std::count(h.train.begin(), h.train.end(), v), 0);
    }
  }
}

TEST(Trainer, StepSeedsAreDistinctAndStable) {
  TrainConfig a = quick_config(scheme::kPseudoSe);
  TrainConfig b = quick_config(scheme::kContrastive);
  EXPECT_EQ(step_seed(a, 3), step_seed(a, 3));
  EXPECT_NE(step_seed(a, 3), step_seed(a, 4));
  EXPECT_NE(step_seed(a, 3), step_seed(b, 3));
}

TEST(Trainer, OneSmallStepLowersTheBatchLoss) {
  auto model = make_model(tiny_config(), 2);
  const auto speech = speech_pool("speech/g/u", 3, 0);
  const auto noise = noise_pool("noise-train/n", 3, 10);
  Rng rng(4);
  const auto batch = sample_supervised_batch(speech, noise, 4, SnrRange{}, 0.25, rng);
  std::vector<const Signal *> inputs;
  std::vector<const AudioClip *> targets;
  for (const auto &ex : batch) {
    inputs.push_back(&ex.input.samples);
    targets.push_back(&ex.target);
  }
  const auto before = loss_se_batch_grad(targets, model->forward(inputs));
  ParameterSet grads = model->params().zeros_like();
  model->backward(inputs, before.d_estimates, grads);
  Adam adam(model->params(), AdamConfig{1e-4});
  adam.step(model->params(), grads);
  const auto after = loss_se_batch(targets, model->forward(inputs));
  EXPECT_LT(after.total, before.loss.total);
}

TEST(Trainer, DeterministicWithAndWithoutPrefetch) {
  const auto init = make_model(tiny_config(), 2);
  const auto speech = speech_pool("speech/g/u", 4, 0);
  const auto noise = noise_pool("noise-train/n", 3, 10);
  TrainConfig c = quick_config(scheme::kMultiSpeaker);
  const auto a = pretrain_multispeaker(*init, speech, noise, c);
  const auto b = pretrain_multispeaker(*init, speech, noise, c);
  c.prefetch = 3;
  const auto d = pretrain_multispeaker(*init, speech, noise, c);
  EXPECT_EQ(a.checkpoint.weights, b.checkpoint.weights);
  EXPECT_EQ(a.checkpoint.weights, d.checkpoint.weights);
  ASSERT_EQ(a.trace.steps.size(), d.trace.steps.size());
  for (std::size_t i = 0; i < a.trace.steps.size(); ++i) {
    EXPECT_EQ(a.trace.steps[i].loss, d.trace.steps[i].loss);
    EXPECT_EQ(a.trace.steps[i].batch_seed, d.trace.steps[i].batch_seed);
  }
  EXPECT_NE(a.checkpoint.weights, init->params());
}

TEST(Trainer, SelectsTheBestValidatedWeights) {
  const auto init = make_model(tiny_config(), 2);
  TrainConfig c = quick_config(scheme::kMultiSpeaker);
  c.max_steps = 9;
  const auto r = pretrain_multispeaker(*init, speech_pool("speech/g/u", 4, 0), noise_pool("n", 3, 10), c);
  ASSERT_EQ(r.trace.validations.size(), 4u);  // steps 0, 3, 6, 9
  double best = -1e9;
  int best_step = -1;
  for (const auto &v : r.trace.validations) {
    if (v.si_sdri_db > best) {
      best = v.si_sdri_db;
      best_step = v.step;
    }
  }
  EXPECT_EQ(r.trace.best_step, best_step);
  EXPECT_EQ(r.checkpoint.provenance.step, best_step);
}

TEST(Trainer, ContrastiveWithZeroWeightsEqualsFlattenedPairs) {
  const auto init = make_model(tiny_config(), 2);
  PremixOptions po;
  po.seed = 3;
  const auto pm = build_premixture(speech_pool("speech/t/u", 4, 0), noise_pool("noise-premix/p", 2, 40), po);
  const auto noise = noise_pool("noise-train/n", 3, 10);
  TrainConfig c = quick_config(scheme::kContrastive);
  c.contrastive = {0.0, 0.0};
  c.pair_count = 1;
  Rng vr(1);
  const ValidationSet val{sample_pseudose_batch(pm, noise, 4, c.snr, c.clip_sec, vr)};
  const auto pairs = pair_producer(pm, noise, c);
  const BatchProducer flattened = [&](int step, std::uint64_t seed) {
    StepBatch b = pairs(step, seed);
    b.examples = pair_batch_examples(*b.pairs);
    b.pairs.reset();
    return b;
  };
  const auto a = train(*init, pairs, val, c, Provenance{scheme::kContrastive});
  const auto b = train(*init, flattened, val, c, Provenance{scheme::kContrastive});
  ASSERT_EQ(a.trace.steps.size(), b.trace.steps.size());
  for (std::size_t i = 0; i < a.trace.steps.size(); ++i) {
    EXPECT_NEAR(a.trace.steps[i].loss, b.trace.steps[i].loss, 1e-9 * std::abs(b.trace.steps[i].loss));
  }
  EXPECT_EQ(a.checkpoint.weights, b.checkpoint.weights);
}

TEST(Trainer, PseudoSeWithoutPremixingMatchesSupervisedTraining) {
  const auto init = make_model(tiny_config(), 2);
  const auto clean = speech_pool("speech/t/u", 4, 0);
  const auto noise = noise_pool("noise-train/n", 3, 10);
  PremixOptions po;
  po.snr_db = kPremixDisabled;
  const auto pm = build_premixture(clean, noise_pool("noise-premix/p", 1, 40), po);
  TrainConfig c = quick_config(scheme::kPseudoSe);
  Rng vr(1);
  const ValidationSet val{sample_supervised_batch(clean, noise, 4, c.snr, c.clip_sec, vr)};
  const auto a = train(*init, supervised_producer(pm.as_pool(), noise, c), val, c, Provenance{});
  const auto b = train(*init, supervised_producer(clean, noise, c), val, c, Provenance{});
  EXPECT_EQ(a.checkpoint.weights, b.checkpoint.weights);
}

TEST(Trainer, PretrainingNeverReadsCleanTestSpeech) {
  const auto init = make_model(tiny_config(), 2);
  const auto clean = speech_pool("speech/test00/u", 5, 0);
  const auto general = speech_pool("speech/gen00/u", 4, 7);
  const auto noise = noise_pool("noise-train/n", 3, 10);
  PremixOptions po;
  po.seed = 2;
  const auto pm = build_premixture(clean, noise_pool("noise-premix/p", 2, 40), po);
  const TrainConfig c = quick_config(scheme::kPseudoSe);
  const auto ps = pretrain_pseudose(*init, pm, noise, c);
  const auto cm = pretrain_cm(*init, pm, noise, c);
  const auto ms = pretrain_multispeaker(*init, general, noise, c);
  for (const auto *trace : {&ps.trace, &cm.trace}) {
    EXPECT_FALSE(trace->accessed_ids.empty());
    for (const auto &id : trace->accessed_ids) {
      for (const auto &s : clean) EXPECT_NE(id, s.id);
      EXPECT_TRUE(id.rfind("premix/", 0) == 0 || id.rfind("noise-train/", 0) == 0) << id;
    }
  }
  for (const auto &id : ms.trace.accessed_ids) {
    EXPECT_EQ(id.find("test00"), std::string::npos) << id;
  }
}

TEST(Trainer, NonFiniteLossRaisesDivergenceAndKeepsTheTrace) {
  const auto dir = testing::scratch_dir("diverge");
  const auto init = make_model(tiny_config(), 2);
  const auto speech = speech_pool("speech/g/u", 3, 0);
  const auto noise = noise_pool("noise-train/n", 3, 10);
  TrainConfig c = quick_config(scheme::kMultiSpeaker);
  const auto good = supervised_producer(speech, noise, c);
  const BatchProducer poisoned = [&](int step, std::uint64_t seed) {
    StepBatch b = good(step, seed);
    if (step == 2) b.examples[0].target.samples[0] = std::numeric_limits<double>::quiet_NaN();
    return b;
  };
  Rng vr(1);
  const ValidationSet val{sample_supervised_batch(speech, noise, 2, c.snr, c.clip_sec, vr)};
  EXPECT_THROW(train(*init, poisoned, val, c, Provenance{}, dir / "trace.jsonl"), DivergenceError);
  const auto trace = TrainTrace::load(dir / "trace.jsonl");
  ASSERT_EQ(trace.steps.size(), 2u);
  EXPECT_FALSE(std::isfinite(trace.steps.back().loss));
}

TEST(Trainer, TraceJsonLinesRoundTrip) {
  const auto dir = testing::scratch_dir("trace");
  const auto init = make_model(tiny_config(), 2);
  const auto r = pretrain_multispeaker(*init, speech_pool("speech/g/u", 4, 0), noise_pool("noise-train/n", 3, 10),
                                       quick_config(scheme::kMultiSpeaker), dir / "t.jsonl");
  const auto back = TrainTrace::load(dir / "t.jsonl");
  EXPECT_EQ(back.scheme, r.trace.scheme);
  EXPECT_EQ(back.best_step, r.trace.best_step);
  EXPECT_EQ(back.accessed_ids, r.trace.accessed_ids);
  EXPECT_EQ(back.warnings, r.trace.warnings);
  ASSERT_EQ(back.steps.size(), r.trace.steps.size());
  for (std::size_t i = 0; i < back.steps.size(); ++i) {
    EXPECT_EQ(back.steps[i].batch_seed, r.trace.steps[i].batch_seed);
    EXPECT_DOUBLE_EQ(back.steps[i].loss, r.trace.steps[i].loss);
  }
  ASSERT_EQ(back.validations.size(), r.trace.validations.size());
}

TEST(Finetune, ZeroBudgetReturnsTheInitializer) {
  const auto init = random_init_checkpoint(tiny_config(), 4);
  TrainConfig c = quick_config(scheme::kFinetune);
  c.ft_budget_sec = 0.0;
  const auto r = finetune(init, {}, noise_pool("noise-train/n", 2, 10), c);
  EXPECT_EQ(r.checkpoint.weights, init.weights);
  EXPECT_TRUE(r.trace.steps.empty());
}

TEST(Finetune, StartsFromTheInitializerWeights) {
  const auto init = random_init_checkpoint(tiny_config(), 4);
  auto ft_set = speech_pool("speech/test00/u", 1, 0);
  ft_set[0].clip.samples.resize(24000);  // 1.5 s
  TrainConfig c = quick_config(scheme::kFinetune);
  c.ft_budget_sec = 3.0;
  c.max_steps = 0;
  const auto r = finetune(init, ft_set, noise_pool("noise-train/n", 2, 10), c);
  EXPECT_EQ(r.checkpoint.weights, init.weights);
  EXPECT_EQ(r.checkpoint.provenance.scheme, scheme::kFinetune);
  EXPECT_EQ(r.checkpoint.provenance.init_scheme, scheme::kRandomInit);
  EXPECT_EQ(r.checkpoint.provenance.ft_budget_sec, 3.0);

  c.max_steps = 3;
  c.validation_every = 3;
  const auto moved = finetune(init, ft_set, noise_pool("noise-train/n", 2, 10), c);
  EXPECT_EQ(moved.trace.steps.size(), 3u);
}

TEST(Finetune, BudgetIsEnforced) {
  const auto init = random_init_checkpoint(tiny_config(), 4);
  TrainConfig c = quick_config(scheme::kFinetune);
  c.ft_budget_sec = 3.0;
  const auto noise = noise_pool("noise-train/n", 2, 10);
  ClipPool over;
  over.push_back({"speech/test00/u0.wav", AudioClip(sine(64000, 200.0, 0.1))});  // 4 s
  EXPECT_THROW(finetune(init, over, noise, c), DataError);
  EXPECT_THROW(finetune(init, {}, noise, c), DataError);
}

}  // namespace
}  // namespace psenh
