// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/trainer.hpp"

#include <cmath>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "psenh/adam.hpp"
#include "psenh/errors.hpp"
#include "psenh/metrics.hpp"
#include "psenh/partition.hpp"

namespace psenh {

namespace {

std::string strip_offset(const std::string &id) {
  const auto at = id.rfind('@');
  return at == std::string::npos ? id : id.substr(0, at);
}

std::vector<std::string> example_ids(const std::vector<TrainingExample> &batch) {
  std::vector<std::string> ids;
  ids.reserve(batch.size() * 2);
  for (const auto &ex : batch) {
    ids.push_back(strip_offset(ex.source_id));
    ids.push_back(strip_offset(ex.noise_id));
  }
  return ids;
}

std::vector<std::string> pair_ids(const PairBatch &b) {
  std::vector<std::string> ids;
  for (const auto &p : b.positives) {
    ids.push_back(strip_offset(p.s_tilde.id));
    ids.push_back(strip_offset(p.n1_id));
    ids.push_back(strip_offset(p.n2_id));
  }
  for (const auto &p : b.negatives) {
    ids.push_back(strip_offset(p.s1_tilde.id));
    ids.push_back(strip_offset(p.s2_tilde.id));
    ids.push_back(strip_offset(p.n_id));
  }
  return ids;
}

// Bounded queue of batches built ahead of the training thread. Each step's
// batch depends only on its own seed, so production order cannot change the
// data a step sees.
class Prefetcher {
 public:
  Prefetcher(const BatchProducer &producer, const TrainConfig &cfg)
      : producer_(producer), cfg_(cfg), depth_(static_cast<std::size_t>(cfg.prefetch)) {
    if (depth_ > 0) worker_ = std::jthread([this](std::stop_token st) { run(st); });
  }


  StepBatch next(int step) {
    if (depth_ == 0) return producer_(step, step_seed(cfg_, step));
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !queue_.empty() || error_; });
    if (queue_.empty()) std::rethrow_exception(error_);
    StepBatch b = std::move(queue_.front());
    queue_.pop_front();
    cv_.notify_all();
    return b;
  }

 private:
  void run(std::stop_token st) {
    for (int step = 1; step <= cfg_.max_steps && !st.stop_requested(); ++step) {
      StepBatch b;
      try {
        b = producer_(step, step_seed(cfg_, step));
      } catch (...) {
        std::lock_guard lock(mu_);
        error_ = std::current_exception();
        cv_.notify_all();
        return;
      }
      std::unique_lock lock(mu_);
      if (!cv_.wait(lock, st, [&] { return queue_.size() < depth_; })) return;
      queue_.push_back(std::move(b));
      cv_.notify_all();
    }
  }

  const BatchProducer &producer_;
  const TrainConfig &cfg_;
  std::size_t depth_;
  std::mutex mu_;
  std::condition_variable_any cv_;
  std::deque<StepBatch> queue_;
  std::exception_ptr error_;
  std::jthread worker_;  // last member: stopped and joined first
};

void write_trace_file(const TrainTrace &trace, const std::optional<std::filesystem::path> &path) {
  if (path) trace.save(*path);
}

ClipPool pick(const ClipPool &pool, const std::vector<std::size_t> &idx) {
  ClipPool out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(pool[i]);
  return out;
}

}  // namespace

bool is_pretraining_scheme(const std::string &name) {
  return name == scheme::kMultiSpeaker || name == scheme::kPseudoSe ||
         name == scheme::kContrastive || name == scheme::kRandomInit;
}

void to_json(nlohmann::json &j, const TrainConfig &c) {
  j = {{"scheme", c.scheme},
       {"batch_size", c.batch_size},
       {"pair_count", c.pair_count},
       {"learning_rate", c.learning_rate},
       {"max_steps", c.max_steps},
       {"validation_every", c.validation_every},
       {"validation_size", c.validation_size},
       {"validation_fraction", c.validation_fraction},
       {"patience", c.patience},
       {"grad_clip", c.grad_clip},
       {"seed", c.seed},
       {"lambda_p", c.contrastive.lambda_p},
       {"lambda_n", c.contrastive.lambda_n},
       {"ft_budget_sec", c.ft_budget_sec},
       {"snr_lo_db", c.snr.lo_db},
       {"snr_hi_db", c.snr.hi_db},
       {"clip_sec", c.clip_sec},
       {"prefetch", c.prefetch},
       {"reduction", c.reduction == Reduction::kSum ? "sum" : "mean"}};
  j["premix_snr_db"] = c.premix_snr_db ? nlohmann::json(*c.premix_snr_db) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json &j, TrainConfig &c) {
  if (!j.is_object()) throw ConfigError("training config must be an object");
  static const std::set<std::string> known = {
      "scheme",    "batch_size", "pair_count", "learning_rate", "max_steps",     "validation_every",
      "validation_size", "validation_fraction", "patience", "grad_clip", "seed", "lambda_p",
      "lambda_n",  "ft_budget_sec", "snr_lo_db", "snr_hi_db", "clip_sec", "prefetch",
      "premix_snr_db", "reduction"};
  for (const auto &[k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError("unknown training config key '" + k + "'");
  }
  try {
    c.scheme = j.value("scheme", c.scheme);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.pair_count = j.value("pair_count", c.pair_count);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.validation_every = j.value("validation_every", c.validation_every);
    c.validation_size = j.value("validation_size", c.validation_size);
    c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
    c.patience = j.value("patience", c.patience);
    c.grad_clip = j.value("grad_clip", c.grad_clip);
    c.seed = j.value("seed", c.seed);
    c.contrastive.lambda_p = j.value("lambda_p", c.contrastive.lambda_p);
    c.contrastive.lambda_n = j.value("lambda_n", c.contrastive.lambda_n);
    c.ft_budget_sec = j.value("ft_budget_sec", c.ft_budget_sec);
    c.snr.lo_db = j.value("snr_lo_db", c.snr.lo_db);
    c.snr.hi_db = j.value("snr_hi_db", c.snr.hi_db);
    c.clip_sec = j.value("clip_sec", c.clip_sec);
    c.prefetch = j.value("prefetch", c.prefetch);
    if (j.contains("reduction")) {
      const std::string r = j.at("reduction");
      if (r != "sum" && r != "mean") throw ConfigError("reduction must be \"sum\" or \"mean\"");
      c.reduction = r == "sum" ? Reduction::kSum : Reduction::kMean;
    }
    if (j.contains("premix_snr_db") && !j.at("premix_snr_db").is_null()) {
      c.premix_snr_db = j.at("premix_snr_db").get<double>();
    }
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("invalid training config: ") + e.what());
  }
}

void validate_train_config(const TrainConfig &c) {
  auto fail = [](const std::string &msg) { throw ConfigError("training config: " + msg); };
  if (!is_pretraining_scheme(c.scheme) && c.scheme != scheme::kFinetune) {
    fail("unknown scheme '" + c.scheme + "'");
  }
  if (c.batch_size < 1) fail("batch_size must be >= 1");
  if (c.pair_count < 0) fail("pair_count must be >= 0");
  if (!(c.learning_rate > 0.0)) fail("learning_rate must be > 0");
  if (c.max_steps < 0) fail("max_steps must be >= 0");
  if (c.validation_every < 1) fail("validation_every must be >= 1");
  if (c.validation_size < 1) fail("validation_size must be >= 1");
  if (!(c.validation_fraction > 0.0 && c.validation_fraction < 1.0)) {
    fail("validation_fraction must be in (0, 1)");
  }
  if (c.patience < 0) fail("patience must be >= 0");
  if (c.grad_clip < 0.0) fail("grad_clip must be >= 0");
  if (c.contrastive.lambda_p < 0.0 || c.contrastive.lambda_n < 0.0) fail("lambdas must be >= 0");
  if (!(c.snr.lo_db <= c.snr.hi_db)) fail("snr range is empty");
  if (!(c.clip_sec > 0.0)) fail("clip_sec must be > 0");
  if (c.prefetch < 0) fail("prefetch must be >= 0");
  if (!is_allowed_budget(c.ft_budget_sec)) {
    fail("ft_budget_sec must be one of 0, 3, 5, 10, 30, 60");
  }
}

TrainConfig default_train_config(const ModelConfig &model) {
  TrainConfig c;
  if (model.family == ModelFamily::kSeparator) {
    c.batch_size = 8;
    c.learning_rate = 1e-4;
  }
  return c;
}

void TrainTrace::write_jsonl(std::ostream &out) const {
  out << nlohmann::json{{"type", "header"}, {"scheme", scheme}, {"best_step", best_step},
                        {"stopped_early", stopped_early}}
             .dump()
      << '\n';
  for (const auto &s : steps) {
    out << nlohmann::json{{"type", "step"},
                          {"step", s.step},
                          {"loss", s.loss},
                          {"se_terms", s.se_terms},
                          {"contrastive", s.contrastive},
                          {"degenerate_pairs", s.degenerate_pairs},
                          {"grad_norm", s.grad_norm},
                          {"batch_seed", s.batch_seed}}
               .dump()
        << '\n';
  }
  for (const auto &v : validations) {
    out << nlohmann::json{{"type", "validation"},
                          {"step", v.step},
                          {"si_sdri_db", v.si_sdri_db},
                          {"loss", v.loss},
                          {"best", v.best}}
               .dump()
        << '\n';
  }
  for (const auto &w : warnings) out << nlohmann::json{{"type", "warning"}, {"message", w}}.dump() << '\n';
  out << nlohmann::json{{"type", "access"}, {"ids", accessed_ids}}.dump() << '\n';
}

void TrainTrace::save(const std::filesystem::path &path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write trace " + path.string());
  write_jsonl(out);
}

namespace {

// JSON has no NaN; non-finite values are written as null.
double number_or_nan(const nlohmann::json &v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

}  // namespace

TrainTrace TrainTrace::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read trace " + path.string());
  TrainTrace t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const std::string type = j.at("type");
    if (type == "header") {
      t.scheme = j.at("scheme");
      t.best_step = j.at("best_step");
      t.stopped_early = j.at("stopped_early");
    } else if (type == "step") {
      t.steps.push_back({j.at("step"), number_or_nan(j.at("loss")), number_or_nan(j.at("se_terms")),
                         number_or_nan(j.at("contrastive")), j.at("degenerate_pairs"),
                         number_or_nan(j.at("grad_norm")), j.at("batch_seed")});
    } else if (type == "validation") {
      t.validations.push_back({j.at("step"), j.at("si_sdri_db"), j.at("loss"), j.at("best")});
    } else if (type == "warning") {
      t.warnings.push_back(j.at("message"));
    } else if (type == "access") {
      for (const auto &id : j.at("ids")) t.accessed_ids.insert(id.get<std::string>());
    }
  }
  return t;
}

std::uint64_t step_seed(const TrainConfig &cfg, int step) {
  return derive_seed(cfg.seed, {hash_name(cfg.scheme), hash_name("step"), static_cast<std::uint64_t>(step)});
}

ValidationSet make_validation_set(const ClipPool &speech, const ClipPool &noise, int count,
                                  const SnrRange &snr, double clip_sec, std::uint64_t seed) {
  Rng rng(seed);
  return {sample_supervised_batch(speech, noise, count, snr, clip_sec, rng)};
}

ValidationScore score_validation(const EnhancementModel &model, const ValidationSet &val) {
  if (val.mixtures.empty()) return {};
  constexpr std::size_t kChunk = 32;
  double sdri = 0.0, loss = 0.0;
  for (std::size_t b = 0; b < val.mixtures.size(); b += kChunk) {
    const std::size_t e = std::min(val.mixtures.size(), b + kChunk);
    std::vector<const Signal *> inputs;
    for (std::size_t i = b; i < e; ++i) inputs.push_back(&val.mixtures[i].input.samples);
    const auto ys = model.forward(inputs);
    for (std::size_t i = b; i < e; ++i) {
      const auto &ex = val.mixtures[i];
      sdri += si_sdr_improvement(ex.target.samples, ex.input.samples, ys[i - b]);
      loss += se_loss(ex.target.samples, ys[i - b]);
    }
  }
  const double n = static_cast<double>(val.mixtures.size());
  return {sdri / n, loss / n};
}

TrainResult train(const EnhancementModel &init, const BatchProducer &producer,
                  const ValidationSet &validation, const TrainConfig &cfg, Provenance provenance,
                  const std::optional<std::filesystem::path> &trace_path) {
  validate_train_config(cfg);
  auto model = init.clone();
  TrainTrace trace;
  trace.scheme = cfg.scheme;
  for (const auto &ex : validation.mixtures) {
    trace.accessed_ids.insert(strip_offset(ex.source_id));
    trace.accessed_ids.insert(strip_offset(ex.noise_id));
  }

  Adam adam(model->params(), AdamConfig{cfg.learning_rate});
  ParameterSet grads = model->params().zeros_like();
  ParameterSet best = model->params();
  double best_score = -std::numeric_limits<double>::infinity();
  int since_best = 0;

  auto validate = [&](int step) {
    const auto score = score_validation(*model, validation);
    ValidationRecord rec{step, score.si_sdri_db, score.loss, false};
    if (score.si_sdri_db > best_score || step == 0) {
      best_score = score.si_sdri_db;
      best = model->params();
      trace.best_step = step;
      rec.best = true;
      since_best = 0;
    } else {
      ++since_best;
    }
    trace.validations.push_back(rec);
    spdlog::debug("[{}] step {} validation SI-SDRi {:.3f} dB", cfg.scheme, step, score.si_sdri_db);
  };

  validate(0);
  Prefetcher prefetch(producer, cfg);
  for (int step = 1; step <= cfg.max_steps; ++step) {
    StepBatch batch = prefetch.next(step);
    trace.accessed_ids.insert(batch.accessed_ids.begin(), batch.accessed_ids.end());

    std::vector<const Signal *> inputs;
    BatchLossGrad lg;
    if (batch.pairs) {
      for (const AudioClip *c : batch.pairs->inputs()) inputs.push_back(&c->samples);
      const auto ys = model->forward(inputs);
      lg = loss_cm_batch_grad(*batch.pairs, ys, cfg.contrastive, cfg.reduction);
    } else {
      std::vector<const AudioClip *> targets;
      for (const auto &ex : batch.examples) {
        inputs.push_back(&ex.input.samples);
        targets.push_back(&ex.target);
      }
      const auto ys = model->forward(inputs);
      lg = loss_se_batch_grad(targets, ys, cfg.reduction);
    }

    StepRecord rec{step, lg.loss.total, lg.loss.se_terms, lg.loss.contrastive,
                   lg.loss.degenerate_pairs, 0.0, step_seed(cfg, step)};
    if (lg.loss.degenerate_pairs > 0) {
      trace.warnings.push_back("step " + std::to_string(step) + ": " +
                               std::to_string(lg.loss.degenerate_pairs) + " degenerate pair(s)");
    }
    if (!std::isfinite(lg.loss.total)) {
      trace.steps.push_back(rec);
      write_trace_file(trace, trace_path);
      throw DivergenceError(cfg.scheme + " training diverged at step " + std::to_string(step) +
                            " (non-finite loss)");
    }

    grads.set_zero();
    model->backward(inputs, lg.d_estimates, grads);
    rec.grad_norm = clip_global_norm(grads, cfg.grad_clip);
    if (!std::isfinite(rec.grad_norm)) {
      trace.steps.push_back(rec);
      write_trace_file(trace, trace_path);
      throw DivergenceError(cfg.scheme + " training diverged at step " + std::to_string(step) +
                            " (non-finite gradient)");
    }
    adam.step(model->params(), grads);
    trace.steps.push_back(rec);

    if (step % cfg.validation_every == 0 || step == cfg.max_steps) {
      validate(step);
      if (cfg.patience > 0 && since_best >= cfg.patience) {
        trace.stopped_early = true;
        break;
      }
    }
  }

  model->params().assign(best);
  provenance.step = trace.best_step;
  write_trace_file(trace, trace_path);
  nlohmann::json experiment = {{"train", cfg}};
  return {make_checkpoint(*model, std::move(provenance), std::move(experiment)), std::move(trace)};
}

BatchProducer supervised_producer(const ClipPool &speech, const ClipPool &noise,
                                  const TrainConfig &cfg) {
  return [&speech, &noise, cfg](int, std::uint64_t seed) {
    Rng rng(seed);
    StepBatch b;
    b.examples = sample_supervised_batch(speech, noise, cfg.batch_size, cfg.snr, cfg.clip_sec, rng);
    b.accessed_ids = example_ids(b.examples);
    return b;
  };
}

BatchProducer pair_producer(const PremixtureSet &premixtures, const ClipPool &noise,
                            const TrainConfig &cfg) {
  return [&premixtures, &noise, cfg](int, std::uint64_t seed) {
    Rng rng(seed);
    StepBatch b;
    b.pairs = build_pair_batch(premixtures, noise, cfg.effective_pair_count(), cfg.snr,
                               cfg.clip_sec, rng);
    b.accessed_ids = pair_ids(*b.pairs);
    return b;
  };
}

std::vector<TrainingExample> pair_batch_examples(const PairBatch &pairs) {
  std::vector<TrainingExample> out;
  for (const auto &p : pairs.positives) {
    out.push_back({p.x1, p.s_tilde.clip, p.scaled_n1, p.s_tilde.id, p.n1_id, p.snr1_db});
    out.push_back({p.x2, p.s_tilde.clip, p.scaled_n2, p.s_tilde.id, p.n2_id, p.snr2_db});
  }
  for (const auto &p : pairs.negatives) {
    out.push_back({p.x1, p.s1_tilde.clip, p.scaled_noise, p.s1_tilde.id, p.n_id, p.snr_db});
    out.push_back({p.x2, p.s2_tilde.clip, p.scaled_noise, p.s2_tilde.id, p.n_id, p.snr_db});
  }
  return out;
}

Holdout split_holdout(std::size_t n, double fraction, std::size_t min_train) {
  Holdout h;
  const std::size_t want = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fraction * n)));
  if (n < min_train + 1 || want == 0) {
    for (std::size_t i = 0; i < n; ++i) h.train.push_back(i);
    return h;
  }
  const std::size_t count = std::min(want, n - min_train);
  const std::size_t stride = n / count;
  for (std::size_t i = 0; i < n; ++i) {
    const bool held = (i % stride == stride - 1) && h.validation.size() < count;
    (held ? h.validation : h.train).push_back(i);
  }
  return h;
}

TrainResult pretrain_multispeaker(const EnhancementModel &init, const ClipPool &general,
                                  const ClipPool &noise_train, const TrainConfig &cfg,
                                  const std::optional<std::filesystem::path> &trace_path) {
  if (general.empty()) throw DataError("multi-speaker pretraining needs general speech");
  const Holdout h = split_holdout(general.size(), cfg.validation_fraction, 1);
  const ClipPool train_pool = pick(general, h.train);
  const ClipPool val_pool = h.validation.empty() ? train_pool : pick(general, h.validation);
  const auto val = make_validation_set(val_pool, noise_train, cfg.validation_size, cfg.snr,
                                       cfg.clip_sec, derive_seed(cfg.seed, {hash_name("validation")}));
  TrainConfig c = cfg;
  c.scheme = scheme::kMultiSpeaker;
  c.premix_snr_db.reset();
  const auto producer = supervised_producer(train_pool, noise_train, c);
  std::vector<std::string> warnings;
  if (cfg.ft_budget_sec != 0.0) warnings.push_back("ft_budget_sec is ignored by multi-speaker pretraining");
  if (h.validation.empty()) warnings.push_back("validation reuses training speech (too few utterances)");
  for (const auto &w : warnings) spdlog::warn("{}", w);
  auto result = train(init, producer, val, c, Provenance{c.scheme, c.seed, 0, std::nullopt, "", 0.0},
                      std::nullopt);
  result.trace.warnings.insert(result.trace.warnings.begin(), warnings.begin(), warnings.end());
  write_trace_file(result.trace, trace_path);
  return result;
}

namespace {

TrainResult pretrain_on_premixtures(const EnhancementModel &init, const PremixtureSet &premixtures,
                                    const ClipPool &noise_train, TrainConfig c,
                                    const std::optional<std::filesystem::path> &trace_path,
                                    bool pairs) {
  const std::size_t min_train = pairs ? 2 : 1;
  if (premixtures.size() < min_train) {
    throw DataError(c.scheme + " pretraining needs at least " + std::to_string(min_train) +
                    " premixture item(s), have " + std::to_string(premixtures.size()));
  }
  const Holdout h = split_holdout(premixtures.size(), c.validation_fraction, min_train);
  const PremixtureSet train_set = premixtures.select(h.train);
  const PremixtureSet val_set = h.validation.empty() ? train_set : premixtures.select(h.validation);
  const auto val = make_validation_set(val_set.as_pool(), noise_train, c.validation_size, c.snr,
                                       c.clip_sec, derive_seed(c.seed, {hash_name("validation")}));
  std::optional<double> snr = c.premix_snr_db;
  if (!snr && !premixtures.empty()) snr = premixtures.items().front().premix_snr_db;
  c.premix_snr_db = snr;
  const auto producer = pairs ? pair_producer(train_set, noise_train, c)
                              : supervised_producer(train_set.as_pool(), noise_train, c);
  auto result = train(init, producer, val, c, Provenance{c.scheme, c.seed, 0, snr, "", 0.0},
                      std::nullopt);
  if (h.validation.empty()) {
    result.trace.warnings.insert(result.trace.warnings.begin(),
                                 "validation reuses training premixtures (too few items)");
  }
  write_trace_file(result.trace, trace_path);
  return result;
}

}  // namespace

TrainResult pretrain_pseudose(const EnhancementModel &init, const PremixtureSet &premixtures,
                              const ClipPool &noise_train, const TrainConfig &cfg,
                              const std::optional<std::filesystem::path> &trace_path) {
  TrainConfig c = cfg;
  c.scheme = scheme::kPseudoSe;
  return pretrain_on_premixtures(init, premixtures, noise_train, c, trace_path, false);
}

TrainResult pretrain_cm(const EnhancementModel &init, const PremixtureSet &premixtures,
                        const ClipPool &noise_train, const TrainConfig &cfg,
                        const std::optional<std::filesystem::path> &trace_path) {
  TrainConfig c = cfg;
  c.scheme = scheme::kContrastive;
  return pretrain_on_premixtures(init, premixtures, noise_train, c, trace_path, true);
}

ModelCheckpoint random_init_checkpoint(const ModelConfig &model, std::uint64_t seed) {
  auto m = make_model(model, seed);
  return make_checkpoint(*m, Provenance{scheme::kRandomInit, seed, 0, std::nullopt, "", 0.0});
}

TrainResult finetune(const ModelCheckpoint &init, const ClipPool &finetune_set,
                     const ClipPool &noise_train, const TrainConfig &cfg,
                     const std::optional<std::filesystem::path> &trace_path) {
  TrainConfig c = cfg;
  c.scheme = scheme::kFinetune;
  validate_train_config(c);
  if (c.ft_budget_sec == 0.0) {
    TrainTrace trace;
    trace.scheme = c.scheme;
    write_trace_file(trace, trace_path);
    return {init, std::move(trace)};
  }
  if (finetune_set.empty()) throw DataError("finetuning with a nonzero budget needs clean speech");
  const double have = pool_duration_sec(finetune_set);
  if (have > c.ft_budget_sec + 1e-6) {
    throw DataError("finetune set holds " + std::to_string(have) + " s, over the " +
                    std::to_string(c.ft_budget_sec) + " s budget");
  }
  const auto val = make_validation_set(finetune_set, noise_train, c.validation_size, c.snr,
                                       c.clip_sec, derive_seed(c.seed, {hash_name("ft-validation")}));
  const auto model = init.instantiate();
  const auto producer = supervised_producer(finetune_set, noise_train, c);
  Provenance prov{scheme::kFinetune, c.seed, 0, init.provenance.premix_snr_db,
                  init.provenance.scheme == scheme::kFinetune ? init.provenance.init_scheme
                                                              : init.provenance.scheme,
                  c.ft_budget_sec};
  auto result = train(*model, producer, val, c, std::move(prov), trace_path);
  result.checkpoint.experiment["init"] = init.experiment;
  return result;
}

}  // namespace psenh
