// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "psenh/errors.hpp"
#include "psenh/experiment.hpp"
#include "psenh/mixing.hpp"
#include "psenh/report.hpp"
#include "psenh/synthetic.hpp"
#include "test_helpers.hpp"

namespace psenh {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

SyntheticCorpusConfig small_corpus() {
  SyntheticCorpusConfig c;
  c.test_speakers = 2;
  c.test_speaker_sec = 16.0;
  c.general_speakers = 3;
  c.general_speaker_sec = 6.0;
  c.noise_train_files = 4;
  c.noise_test_files = 3;
  c.noise_premix_files = 2;
  c.noise_file_sec = 2.0;
  c.premix_file_sec = 4.0;
  return c;
}

TEST(Synthetic, SpeechAndNoiseHaveTheRequestedLevel) {
  Rng rng(3);
  const Voice v = random_voice(rng);
  const Signal s = synthesize_speech(v, 2.0, rng, 0.1);
  EXPECT_EQ(s.size(), 32000u);
  EXPECT_NEAR(rms(s), 0.1, 1e-9);
  for (int k = 0; k < kNumNoiseKinds; ++k) {
    const Signal n = synthesize_noise(static_cast<NoiseKind>(k), 1.0, rng, 0.05);
    EXPECT_EQ(n.size(), 16000u);
    EXPECT_NEAR(rms(n), 0.05, 1e-9) << k;
    for (double x : n) ASSERT_TRUE(std::isfinite(x));
  }
}

TEST(Synthetic, VoicesDiffer) {
  Rng rng(1);
  const Voice a = random_voice(rng);
  const Voice b = random_voice(rng);
  EXPECT_NE(a.f0_hz, b.f0_hz);
}

TEST(Synthetic, CorpusIsByteIdenticalOnRegeneration) {
  const auto a = testing::scratch_dir("synth_a");
  const auto b = testing::scratch_dir("synth_b");
  const auto c = small_corpus();
  const auto n = generate_synthetic_corpus(a, c);
  EXPECT_EQ(generate_synthetic_corpus(b, c), n);
  std::size_t seen = 0;
  for (const auto &e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++seen;
    EXPECT_EQ(slurp(e.path()), slurp(b / fs::relative(e.path(), a))) << e.path();
  }
  EXPECT_EQ(seen, n);
  EXPECT_EQ(synthetic_test_speakers(c), (std::vector<std::string>{"test00", "test01"}));
  EXPECT_TRUE(fs::is_directory(a / "speech" / "test01"));
  EXPECT_TRUE(fs::is_directory(a / "noise-premix"));
  const auto premix = read_wav(*fs::directory_iterator(a / "noise-premix"));
  EXPECT_NEAR(premix.duration_sec(), 4.0, 1e-3);
}

ExperimentConfig tiny_experiment(const fs::path &out) {
  ExperimentConfig c;
  c.name = "tiny";
  c.output_dir = out;
  c.corpus.synthetic = small_corpus();
  c.corpus.root = out / "corpus";
  c.architectures = {"gru8"};
  c.ft_budgets_sec = {0, 3};
  c.pretrain = {{"batch_size", 4}, {"max_steps", 4}, {"validation_every", 2}, {"validation_size", 4},
                {"clip_sec", 0.5}, {"prefetch", 0}};
  c.finetune = {{"batch_size", 4}, {"max_steps", 2}, {"validation_every", 2}, {"validation_size", 4},
                {"clip_sec", 0.5}, {"prefetch", 0}};
  c.scheme_overrides["cm"] = {{"batch_size", 2}};
  c.eval.n_mixtures = 6;
  return c;
}

TEST(ExperimentConfig, JsonRoundTrip) {
  auto c = tiny_experiment("/tmp/x");
  c.premix_snr_db = {10.0, std::numeric_limits<double>::infinity()};
  const nlohmann::json j = c;
  EXPECT_EQ(j.at("premix_snr_db")[1], "inf");
  const auto back = j.get<ExperimentConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
}

TEST(ExperimentConfig, UnknownKeysAreRejected) {
  nlohmann::json j = tiny_experiment("/tmp/x");
  j["sedes"] = {1};
  EXPECT_THROW(j.get<ExperimentConfig>(), ConfigError);
}

TEST(ExperimentConfig, OverridesEditNestedFields) {
  nlohmann::json j = tiny_experiment("/tmp/x");
  apply_overrides(j, {"pretrain.max_steps=9", "name=other", "seeds=[4,5]", "eval.n_mixtures=7"});
  const auto c = j.get<ExperimentConfig>();
  EXPECT_EQ(c.pretrain.at("max_steps"), 9);
  EXPECT_EQ(c.name, "other");
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{4, 5}));
  EXPECT_EQ(c.eval.n_mixtures, 7);
  EXPECT_THROW(apply_overrides(j, {"no_equals_sign"}), ConfigError);
}

TEST(ExperimentConfig, ValidationCatchesBadFields) {
  const auto base = tiny_experiment("/tmp/x");
  auto c = base;
  c.seeds.clear();
  EXPECT_THROW(validate_experiment_config(c), ConfigError);
  c = base;
  c.schemes = {"supervised"};
  EXPECT_THROW(validate_experiment_config(c), ConfigError);
  c = base;
  c.ft_budgets_sec = {7};
  EXPECT_THROW(validate_experiment_config(c), ConfigError);
  c = base;
  c.architectures = {"lstm"};
  EXPECT_THROW(validate_experiment_config(c), ConfigError);
  EXPECT_NO_THROW(validate_experiment_config(base));
}

TEST(ExperimentConfig, ResolvedTrainingSettingsLayerOverrides) {
  const auto c = tiny_experiment("/tmp/x");
  const auto cm = resolve_pretrain_config(c, "gru8", scheme::kContrastive, 3);
  EXPECT_EQ(cm.batch_size, 2);
  EXPECT_EQ(cm.max_steps, 4);
  EXPECT_EQ(cm.scheme, scheme::kContrastive);
  EXPECT_EQ(cm.seed, 3u);
  EXPECT_EQ(resolve_pretrain_config(c, "gru8", scheme::kPseudoSe, 3).batch_size, 4);
  const auto ft = resolve_finetune_config(c, "gru8", 3.0, 3);
  EXPECT_EQ(ft.ft_budget_sec, 3.0);
  EXPECT_EQ(ft.max_steps, 2);
}

TEST(ExperimentConfig, LoadResolvesPathsAndAcceptsComments) {
  const auto dir = testing::scratch_dir("cfg_load");
  {
    std::ofstream f(dir / "c.json");
    f << "{\n  // a comment\n  \"name\": \"x\",\n  \"corpus\": {\"root\": \"data\"},\n"
         "  \"test_speakers\": [\"a\"],\n  \"output_dir\": \"runs/x\"\n}\n";
  }
  ::setenv("PSENH_OUTPUT_ROOT", (dir / "out").c_str(), 1);
  const auto c = load_experiment_config(dir / "c.json", {"name=y"});
  ::unsetenv("PSENH_OUTPUT_ROOT");
  EXPECT_EQ(c.name, "y");
  EXPECT_EQ(c.corpus.root, dir / "data");
  EXPECT_EQ(c.output_dir, dir / "out" / "runs" / "x");
  EXPECT_THROW(load_experiment_config(dir / "missing.json"), ConfigError);
}

TEST(Stages, NamesRoundTrip) {
  for (Stage s : {Stage::kManifest, Stage::kPartition, Stage::kPremix, Stage::kPretrain, Stage::kFinetune,
                  Stage::kEvaluate, Stage::kReport}) {
    EXPECT_EQ(parse_stage(stage_name(s)), s);
  }
  EXPECT_THROW(parse_stage("train"), ConfigError);
}

// One small end-to-end run shared by the pipeline tests below.
class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(testing::scratch_dir("pipeline"));
    summary_ = new RunSummary(run_experiment(tiny_experiment(*dir_ / "run")));
  }
  static void TearDownTestSuite() {
    delete summary_;
    delete dir_;
  }
  static fs::path *dir_;
  static RunSummary *summary_;
};

fs::path *PipelineTest::dir_ = nullptr;
RunSummary *PipelineTest::summary_ = nullptr;

TEST_F(PipelineTest, ProducesEveryArtifact) {
  const fs::path run = *dir_ / "run";
  ASSERT_TRUE(summary_->grid.has_value());
  EXPECT_GT(summary_->units_run, 0);
  for (const char *f : {"config.resolved.json", "seeds.json", "manifest.jsonl", "partition/seed1.json",
                        "eval/cells.json", "report/report.json", "report/report.csv", "report/report.txt",
                        "report/curves_gru8.svg"}) {
    EXPECT_TRUE(fs::exists(run / f)) << f;
  }
  EXPECT_TRUE(fs::is_directory(run / "stages"));
  EXPECT_TRUE(fs::is_directory(run / "traces"));
  EXPECT_TRUE(fs::exists(run / "checkpoints/pretrain/gru8/seed1/multispeaker.ckpt"));
  EXPECT_TRUE(fs::exists(run / "checkpoints/pretrain/gru8/seed1/test00/cm_10dB.ckpt"));
  EXPECT_TRUE(fs::exists(run / "checkpoints/finetune/gru8/seed1/test01/pseudose_10dB_3s.ckpt"));
  // 4 schemes x 2 budgets.
  EXPECT_EQ(summary_->grid->cells.size(), 8u);
  for (const auto &[key, cell] : summary_->grid->cells) EXPECT_EQ(cell.n_speakers, 2);
}

TEST_F(PipelineTest, RerunReusesEveryUnitAndReproducesTheReport) {
  const fs::path run = *dir_ / "run";
  const std::string before = slurp(run / "report/report.json");
  const auto again = run_experiment(tiny_experiment(run));
  EXPECT_EQ(again.units_run, 0);
  EXPECT_EQ(again.units_reused, summary_->units_run);
  EXPECT_EQ(slurp(run / "report/report.json"), before);
}

TEST_F(PipelineTest, FreshRunIsBitwiseIdentical) {
  const fs::path other = *dir_ / "fresh";
  run_experiment(tiny_experiment(other));
  for (const char *f : {"report/report.json", "report/report.csv", "eval/cells.json"}) {
    EXPECT_EQ(slurp(other / f), slurp(*dir_ / "run" / f)) << f;
  }
}

TEST(Pipeline, SmallerBudgetReusesPretraining) {
  const auto dir = testing::scratch_dir("pipeline_budget");
  auto c = tiny_experiment(dir / "run");
  c.ft_budgets_sec = {3};
  run_experiment(c, Stage::kFinetune);
  c.ft_budgets_sec = {0, 3};
  std::vector<std::string> ran;
  const auto s = run_experiment(c, Stage::kEvaluate, [&](const std::string &m) { ran.push_back(m); });
  EXPECT_GT(s.units_run, 0);
  for (const auto &m : ran) EXPECT_NE(m.rfind("pretrain ", 0), 0u) << m;
}

TEST_F(PipelineTest, MergeOfOneRunIsThatRun) {
  EXPECT_EQ(merge_runs({*dir_ / "run"}), *summary_->grid);
  EXPECT_EQ(load_report(*dir_ / "run" / "report" / "report.json"), *summary_->grid);
  EXPECT_EQ(aggregate_grid(load_run_reports(*dir_ / "run")), *summary_->grid);
}

TEST_F(PipelineTest, StopsAfterTheRequestedStage) {
  const fs::path out = *dir_ / "partial";
  const auto s = run_experiment(tiny_experiment(out), Stage::kPremix);
  EXPECT_FALSE(s.grid.has_value());
  EXPECT_TRUE(fs::is_directory(out / "premix"));
  EXPECT_FALSE(fs::exists(out / "checkpoints"));
}

TEST(Pipeline, UnknownTestSpeakerIsAStageTaggedDataError) {
  const auto dir = testing::scratch_dir("pipeline_bad");
  auto c = tiny_experiment(dir / "run");
  c.test_speakers = {"nobody"};
  try {
    run_experiment(c);
    FAIL() << "expected DataError";
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("[partition]"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("nobody"), std::string::npos) << e.what();
  }
  EXPECT_TRUE(fs::exists(dir / "run" / "manifest.jsonl"));
}

}  // namespace
}  // namespace psenh
