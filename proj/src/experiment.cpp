// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "psenh/checkpoint.hpp"
#include "psenh/clip_pool.hpp"
#include "psenh/errors.hpp"
#include "psenh/manifest.hpp"
#include "psenh/partition.hpp"
#include "psenh/premixture.hpp"
#include "psenh/report.hpp"
#include "psenh/rng.hpp"

namespace psenh {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json snr_to_json(double snr) { return std::isinf(snr) ? json("inf") : json(snr); }

double snr_from_json(const json &j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw ConfigError("premixture SNR must be a number or \"inf\", got " + j.dump());
  }
  if (!j.is_number()) throw ConfigError("premixture SNR must be a number or \"inf\", got " + j.dump());
  return j.get<double>();
}

std::string snr_label(double snr) {
  if (std::isinf(snr)) return "clean";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%gdB", snr);
  return buf;
}

std::string budget_tag(double sec) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%gs", sec);
  return buf;
}

std::string unit_key(const json &inputs) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(hash_name(inputs.dump())));
  return buf;
}

bool schemes_premix(const std::string &s) { return s == scheme::kPseudoSe || s == scheme::kContrastive; }

json merge_patch(json base, const json &patch) {
  base.merge_patch(patch);
  return base;
}

std::string read_text(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_text(const fs::path &path, const std::string &text) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out.flush()) throw DataError("cannot write " + path.string());
  }
  fs::rename(tmp, path);
}

json read_json(const fs::path &path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception &e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

[[noreturn]] void rethrow_tagged(Stage stage) {
  const std::string tag = std::string("[") + stage_name(stage) + "] ";
  try {
    throw;
  } catch (const ConfigError &e) {
    throw ConfigError(tag + e.what());
  } catch (const DataError &e) {
    throw DataError(tag + e.what());
  } catch (const DivergenceError &e) {
    throw DivergenceError(tag + e.what());
  } catch (const ShapeError &e) {
    throw ShapeError(tag + e.what());
  } catch (const ZeroEnergyError &e) {
    throw ZeroEnergyError(tag + e.what());
  } catch (const fs::filesystem_error &e) {
    throw DataError(tag + e.what());
  } catch (const Error &e) {
    throw Error(tag + e.what());
  }
}

template <class F>
auto in_stage(Stage stage, F &&f) {
  try {
    return f();
  } catch (...) {
    rethrow_tagged(stage);
  }
}

// Stage records: stages/<unit>.json holding the unit's key and outputs.
class StageStore {
 public:
  explicit StageStore(fs::path root) : root_(std::move(root)) {}

  bool fresh(const std::string &unit, const std::string &key) const {
    const fs::path rec = record_path(unit);
    if (!fs::exists(rec)) return false;
    try {
      const json j = json::parse(read_text(rec));
      if (j.at("key") != key) return false;
      for (const auto &o : j.at("outputs")) {
        if (!fs::exists(root_ / o.get<std::string>())) return false;
      }
      return true;
    } catch (const std::exception &) {
      return false;
    }
  }

  void record(Stage stage, const std::string &unit, const std::string &key,
              const std::vector<fs::path> &outputs) const {
    json outs = json::array();
    for (const auto &o : outputs) outs.push_back(fs::relative(o, root_).generic_string());
    write_text(record_path(unit),
               json{{"stage", stage_name(stage)}, {"unit", unit}, {"key", key}, {"outputs", outs}}
                       .dump(2) +
                   "\n");
  }

 private:
  fs::path record_path(const std::string &unit) const {
    std::string file = unit;
    std::replace(file.begin(), file.end(), '/', '.');
    return root_ / "stages" / (file + ".json");
  }

  fs::path root_;
};

struct InitSpec {
  std::string scheme;
  std::optional<double> premix_snr_db;

  std::string label() const {
    return premix_snr_db ? scheme + "_" + snr_label(*premix_snr_db) : scheme;
  }
};

struct SeedData {
  std::uint64_t seed = 0;
  std::string partition_key;
  SpeakerPartition partition;
  ClipPool general, noise_train, noise_test, noise_premix;
  std::map<std::string, ClipPool> test_clean;  // loaded on demand
};

class Pipeline {
 public:
  Pipeline(const ExperimentConfig &cfg, const ProgressLog &log)
      : cfg_(cfg), out_(cfg.output_dir), store_(cfg.output_dir), log_(log) {}

  RunSummary run(Stage last) {
    fs::create_directories(out_);
    write_text(out_ / "config.resolved.json", json(cfg_).dump(2) + "\n");
    write_text(out_ / "seeds.json", seeds_json().dump(2) + "\n");
    in_stage(Stage::kManifest, [&] { build_manifest(); });
    RunSummary summary;
    summary.output_dir = out_;
    if (last == Stage::kManifest) return finish(summary);

    std::map<GridKey, CellReport> cells;
    for (const auto seed : cfg_.seeds) {
      SeedData data = in_stage(Stage::kPartition, [&] { return build_partition(seed); });
      if (last == Stage::kPartition) continue;
      std::map<std::pair<std::string, double>, std::pair<std::string, PremixtureSet>> premixes;
      in_stage(Stage::kPremix, [&] { build_premixtures(data, premixes); });
      if (last == Stage::kPremix) continue;
      for (const auto &arch : cfg_.architectures) {
        run_architecture(arch, data, premixes, last, cells);
      }
    }
    if (last < Stage::kEvaluate) return finish(summary);

    std::vector<CellReport> reports;
    for (auto &[key, r] : cells) reports.push_back(std::move(r));
    write_text(out_ / "eval" / "cells.json", json(reports).dump(2) + "\n");
    if (last < Stage::kReport) return finish(summary);
    summary.grid = in_stage(Stage::kReport, [&] {
      Grid grid = aggregate_grid(reports);
      emit_report(grid, out_ / "report");
      return grid;
    });
    return finish(summary);
  }

 private:
  RunSummary finish(RunSummary s) const {
    s.units_run = run_;
    s.units_reused = reused_;
    return s;
  }

  void say(const std::string &msg) const {
    if (log_) log_(msg);
  }

  bool reuse(const std::string &unit, const std::string &key) {
    if (!store_.fresh(unit, key)) return false;
    ++reused_;
    say("reuse " + unit);
    return true;
  }

  void done(Stage stage, const std::string &unit, const std::string &key,
            const std::vector<fs::path> &outputs) {
    store_.record(stage, unit, key, outputs);
    ++run_;
  }

  json seeds_json() const {
    json j = json::array();
    for (const auto seed : cfg_.seeds) {
      json init = json::object();
      for (const auto &a : cfg_.architectures) init[a] = init_seed(seed, a);
      json premix = json::object();
      for (const auto &spk : test_speakers_or_default()) {
        for (double snr : cfg_.premix_snr_db) premix[spk][snr_label(snr)] = premix_seed(seed, spk, snr);
      }
      j.push_back({{"seed", seed},
                   {"partition", seed},
                   {"init", init},
                   {"premix", premix},
                   {"train", seed},
                   {"eval", seed}});
    }
    return j;
  }

  std::vector<std::string> test_speakers_or_default() const {
    if (!cfg_.test_speakers.empty()) return cfg_.test_speakers;
    if (cfg_.corpus.synthetic) return synthetic_test_speakers(*cfg_.corpus.synthetic);
    return {};
  }

  static std::uint64_t init_seed(std::uint64_t seed, const std::string &arch) {
    return derive_seed(seed, {hash_name("init"), hash_name(arch)});
  }

  static std::uint64_t premix_seed(std::uint64_t seed, const std::string &spk, double snr) {
    return derive_seed(seed, {hash_name("premix"), hash_name(spk), hash_name(snr_label(snr))});
  }

  void build_manifest() {
    fs::path root = cfg_.corpus.root;
    if (cfg_.corpus.synthetic) {
      if (root.empty()) root = out_ / "corpus";
      const std::string key = unit_key(json(*cfg_.corpus.synthetic));
      if (!reuse("corpus", key)) {
        if (fs::exists(root) && !fs::is_empty(root) && !fs::exists(out_ / "stages" / "corpus.json")) {
          throw DataError("refusing to generate a synthetic corpus into non-empty " + root.string());
        }
        fs::remove_all(root);
        say("generate synthetic corpus in " + root.string());
        generate_synthetic_corpus(root, *cfg_.corpus.synthetic);
        done(Stage::kManifest, "corpus", key, {root});
      }
    }
    if (cfg_.corpus.manifest) {
      manifest_ = load_manifest(*cfg_.corpus.manifest);
      if (!root.empty()) manifest_.base_dir = root;
    } else {
      auto scan = scan_corpus(root);
      for (const auto &w : scan.warnings) say("warning: " + w);
      manifest_ = std::move(scan.manifest);
      manifest_.base_dir = root;
    }
    validate_manifest(manifest_);
    save_manifest(manifest_, out_ / "manifest.jsonl");
    manifest_key_ = unit_key(json(read_text(out_ / "manifest.jsonl")));
    speakers_ = test_speakers_or_default();
    if (speakers_.empty()) throw ConfigError("no test speakers configured");
  }

  SeedData build_partition(std::uint64_t seed) {
    SeedData d;
    d.seed = seed;
    const double max_budget = *std::max_element(cfg_.ft_budgets_sec.begin(), cfg_.ft_budgets_sec.end());
    d.partition_key = unit_key(
        {{"manifest", manifest_key_}, {"speakers", speakers_}, {"budget", max_budget}, {"seed", seed}});
    const std::string unit = "partition/seed" + std::to_string(seed);
    const fs::path path = out_ / "partition" / ("seed" + std::to_string(seed) + ".json");
    if (reuse(unit, d.partition_key)) {
      d.partition = read_json(path).get<SpeakerPartition>();
    } else {
      say("partition seed " + std::to_string(seed));
      d.partition = partition_speakers(manifest_, speakers_, max_budget, seed);
      write_text(path, json(d.partition).dump(2) + "\n");
      done(Stage::kPartition, unit, d.partition_key, {path});
    }
    d.general = load_pool(manifest_, d.partition.general);
    d.noise_train = load_pool(manifest_, d.partition.noise_train);
    d.noise_test = load_pool(manifest_, d.partition.noise_test);
    d.noise_premix = load_pool(manifest_, d.partition.noise_premix);
    return d;
  }

  const ClipPool &test_clean(SeedData &d, const std::string &spk) {
    auto it = d.test_clean.find(spk);
    if (it == d.test_clean.end()) {
      it = d.test_clean.emplace(spk, load_pool(manifest_, d.partition.speakers.at(spk).test)).first;
    }
    return it->second;
  }

  bool any_premix_scheme() const {
    return std::any_of(cfg_.schemes.begin(), cfg_.schemes.end(), schemes_premix);
  }

  void build_premixtures(SeedData &d,
                         std::map<std::pair<std::string, double>, std::pair<std::string, PremixtureSet>> &out) {
    if (!any_premix_scheme()) return;
    for (const auto &spk : speakers_) {
      for (double snr : cfg_.premix_snr_db) {
        const std::string key = unit_key({{"partition", d.partition_key},
                                          {"speaker", spk},
                                          {"snr", snr_to_json(snr)},
                                          {"jitter", cfg_.premix_jitter_db}});
        const std::string rel = "premix/seed" + std::to_string(d.seed) + "/" + spk + "/" + snr_label(snr);
        const fs::path dir = out_ / rel;
        if (!reuse(rel, key)) {
          say("premix " + rel);
          PremixOptions opts;
          opts.snr_db = snr;
          opts.jitter_db = cfg_.premix_jitter_db;
          opts.seed = premix_seed(d.seed, spk, snr);
          fs::remove_all(dir);
          build_premixture(test_clean(d, spk), d.noise_premix, opts).save(dir);
          done(Stage::kPremix, rel, key, {dir / "index.json"});
        }
        // Always train from the stored copy so fresh and resumed runs agree.
        out[{spk, snr}] = {key, PremixtureSet::load(dir)};
      }
    }
  }

  void run_architecture(
      const std::string &arch, SeedData &d,
      const std::map<std::pair<std::string, double>, std::pair<std::string, PremixtureSet>> &premixes,
      Stage last, std::map<GridKey, CellReport> &cells) {
    const ModelConfig mc = ModelConfig::from_name(arch);
    const std::uint64_t iseed = init_seed(d.seed, arch);
    const std::string seed_dir = arch + "/seed" + std::to_string(d.seed);
    const std::string init_key = unit_key({{"architecture", arch}, {"init_seed", iseed}});

    struct Init {
      InitSpec spec;
      std::string speaker;  // empty when shared across speakers
      std::string key;
      fs::path path;
    };
    std::vector<Init> inits;
    in_stage(Stage::kPretrain, [&] {
      std::unique_ptr<EnhancementModel> init_model;
      auto fresh_init = [&]() -> const EnhancementModel & {
        if (!init_model) init_model = make_model(mc, iseed);
        return *init_model;
      };
      for (const auto &s : cfg_.schemes) {
        if (schemes_premix(s)) {
          for (const auto &spk : speakers_) {
            for (double snr : cfg_.premix_snr_db) {
              const auto &[pm_key, pm] = premixes.at({spk, snr});
              TrainConfig tc = resolve_pretrain_config(cfg_, arch, s, d.seed);
              tc.premix_snr_db = snr;
              const InitSpec spec{s, snr};
              const std::string rel = "pretrain/" + seed_dir + "/" + spk + "/" + spec.label();
              const std::string key =
                  unit_key({{"init", init_key}, {"train", tc}, {"premix", pm_key}});
              const fs::path path = out_ / "checkpoints" / (rel + ".ckpt");
              if (!reuse(rel, key)) {
                say("pretrain " + rel);
                const fs::path trace = out_ / "traces" / (rel + ".jsonl");
                const TrainResult r = s == scheme::kPseudoSe
                                          ? pretrain_pseudose(fresh_init(), pm, d.noise_train, tc, trace)
                                          : pretrain_cm(fresh_init(), pm, d.noise_train, tc, trace);
                save_checkpoint(r.checkpoint, path);
                done(Stage::kPretrain, rel, key, {path, trace});
              }
              inits.push_back({spec, spk, key, path});
            }
          }
        } else {
          const InitSpec spec{s, std::nullopt};
          const std::string rel = "pretrain/" + seed_dir + "/" + spec.label();
          const fs::path path = out_ / "checkpoints" / (rel + ".ckpt");
          std::string key;
          if (s == scheme::kMultiSpeaker) {
            const TrainConfig tc = resolve_pretrain_config(cfg_, arch, s, d.seed);
            key = unit_key({{"init", init_key}, {"train", tc}, {"partition", d.partition_key}});
            if (!reuse(rel, key)) {
              say("pretrain " + rel);
              const fs::path trace = out_ / "traces" / (rel + ".jsonl");
              const TrainResult r = pretrain_multispeaker(fresh_init(), d.general, d.noise_train, tc, trace);
              save_checkpoint(r.checkpoint, path);
              done(Stage::kPretrain, rel, key, {path, trace});
            }
          } else {
            key = unit_key({{"init", init_key}, {"scheme", s}});
            if (!reuse(rel, key)) {
              say("initialize " + rel);
              save_checkpoint(random_init_checkpoint(mc, iseed), path);
              done(Stage::kPretrain, rel, key, {path});
            }
          }
          inits.push_back({spec, "", key, path});
        }
      }
    });
    if (last == Stage::kPretrain) return;

    for (const auto &spk : speakers_) {
      const auto &split = d.partition.speakers.at(spk);
      std::map<double, ClipPool> ft_sets;
      for (double b : cfg_.ft_budgets_sec) ft_sets[b] = load_pool(manifest_, select_finetune_subset(split, b));
      for (const auto &init : inits) {
        if (!init.speaker.empty() && init.speaker != spk) continue;
        std::optional<ModelCheckpoint> init_ckpt;
        for (double b : cfg_.ft_budgets_sec) {
          const std::string rel = "finetune/" + seed_dir + "/" + spk + "/" + init.spec.label() + "_" + budget_tag(b);
          const fs::path path = out_ / "checkpoints" / (rel + ".ckpt");
          const TrainConfig tc = resolve_finetune_config(cfg_, arch, b, d.seed);
          const std::string ft_key =
              unit_key({{"init", init.key}, {"train", tc}, {"partition", d.partition_key}, {"speaker", spk}});
          in_stage(Stage::kFinetune, [&] {
            if (reuse(rel, ft_key)) return;
            say("finetune " + rel);
            if (!init_ckpt) init_ckpt = load_checkpoint(init.path);
            const fs::path trace = out_ / "traces" / (rel + ".jsonl");
            const TrainResult r = finetune(*init_ckpt, ft_sets.at(b), d.noise_train, tc,
                                           b > 0.0 ? std::optional<fs::path>(trace) : std::nullopt);
            save_checkpoint(r.checkpoint, path);
            done(Stage::kFinetune, rel, ft_key, {path});
          });
          if (last == Stage::kFinetune) continue;

          const std::string erel = "eval/" + seed_dir + "/" + spk + "/" + init.spec.label() + "_" + budget_tag(b);
          const fs::path epath = out_ / (erel + ".json");
          const std::string ekey = unit_key({{"model", ft_key}, {"protocol", cfg_.eval}, {"seed", d.seed}});
          const SpeakerStats stats = in_stage(Stage::kEvaluate, [&] {
            if (reuse(erel, ekey)) return read_json(epath).get<SpeakerStats>();
            say("evaluate " + erel);
            const auto model = load_checkpoint(path).instantiate();
            const SpeakerStats st =
                evaluate_speaker(*model, test_clean(d, spk), d.noise_test, cfg_.eval, spk, d.seed);
            write_text(epath, json(st).dump(2) + "\n");
            done(Stage::kEvaluate, erel, ekey, {epath});
            return st;
          });
          const GridKey gk{arch, init.spec.scheme, init.spec.premix_snr_db, b};
          auto &cell = cells[gk];
          cell.key = gk;
          cell.protocol = cfg_.eval;
          cell.speakers.push_back(stats);
        }
      }
    }
  }

  const ExperimentConfig &cfg_;
  fs::path out_;
  StageStore store_;
  ProgressLog log_;
  CorpusManifest manifest_;
  std::string manifest_key_;
  std::vector<std::string> speakers_;
  int run_ = 0;
  int reused_ = 0;
};

}  // namespace

void to_json(json &j, const ExperimentConfig &c) {
  json corpus = {{"root", c.corpus.root.string()}};
  corpus["manifest"] = c.corpus.manifest ? json(c.corpus.manifest->string()) : json(nullptr);
  corpus["synthetic"] = c.corpus.synthetic ? json(*c.corpus.synthetic) : json(nullptr);
  json snrs = json::array();
  for (double s : c.premix_snr_db) snrs.push_back(snr_to_json(s));
  j = {{"name", c.name},
       {"output_dir", c.output_dir.string()},
       {"seeds", c.seeds},
       {"corpus", corpus},
       {"test_speakers", c.test_speakers},
       {"architectures", c.architectures},
       {"schemes", c.schemes},
       {"premix_snr_db", snrs},
       {"premix_jitter_db", c.premix_jitter_db},
       {"ft_budgets_sec", c.ft_budgets_sec},
       {"pretrain", c.pretrain},
       {"finetune", c.finetune},
       {"scheme_overrides", c.scheme_overrides},
       {"eval", c.eval}};
}

void from_json(const json &j, ExperimentConfig &c) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  static const std::set<std::string> known = {
      "name",    "output_dir", "seeds",          "corpus",         "test_speakers",   "architectures",
      "schemes", "premix_snr_db", "premix_jitter_db", "ft_budgets_sec", "pretrain", "finetune",
      "scheme_overrides", "eval"};
  for (const auto &[k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError("unknown experiment config key '" + k + "'");
  }
  c = ExperimentConfig{};
  try {
    c.name = j.value("name", c.name);
    c.output_dir = j.value("output_dir", c.output_dir.string());
    c.seeds = j.value("seeds", c.seeds);
    if (j.contains("corpus")) {
      const auto &cj = j.at("corpus");
      for (const auto &[k, v] : cj.items()) {
        if (k != "root" && k != "manifest" && k != "synthetic") {
          throw ConfigError("unknown corpus key '" + k + "'");
        }
      }
      c.corpus.root = cj.value("root", std::string());
      if (cj.contains("manifest") && !cj.at("manifest").is_null()) {
        c.corpus.manifest = cj.at("manifest").get<std::string>();
      }
      if (cj.contains("synthetic") && !cj.at("synthetic").is_null()) {
        c.corpus.synthetic = cj.at("synthetic").get<SyntheticCorpusConfig>();
      }
    }
    c.test_speakers = j.value("test_speakers", c.test_speakers);
    c.architectures = j.value("architectures", c.architectures);
    c.schemes = j.value("schemes", c.schemes);
    if (j.contains("premix_snr_db")) {
      const auto &s = j.at("premix_snr_db");
      c.premix_snr_db.clear();
      if (s.is_array()) {
        for (const auto &v : s) c.premix_snr_db.push_back(snr_from_json(v));
      } else {
        c.premix_snr_db.push_back(snr_from_json(s));
      }
    }
    c.premix_jitter_db = j.value("premix_jitter_db", c.premix_jitter_db);
    c.ft_budgets_sec = j.value("ft_budgets_sec", c.ft_budgets_sec);
    c.pretrain = j.value("pretrain", c.pretrain);
    c.finetune = j.value("finetune", c.finetune);
    if (j.contains("scheme_overrides")) {
      for (const auto &[k, v] : j.at("scheme_overrides").items()) c.scheme_overrides[k] = v;
    }
    if (j.contains("eval")) {
      const auto &e = j.at("eval");
      for (const auto &[k, v] : e.items()) {
        if (k != "n_mixtures" && k != "snr_lo_db" && k != "snr_hi_db" && k != "clip_sec") {
          throw ConfigError("unknown eval key '" + k + "'");
        }
      }
      c.eval = e.get<EvalProtocol>();
    }
  } catch (const json::exception &e) {
    throw ConfigError(std::string("invalid experiment config: ") + e.what());
  }
}

void apply_overrides(json &doc, const std::vector<std::string> &overrides) {
  for (const auto &o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override '" + o + "' is not of the form key=value");
    }
    const std::string path = o.substr(0, eq);
    const std::string text = o.substr(eq + 1);
    json value;
    try {
      value = json::parse(text);
    } catch (const json::exception &) {
      value = text;
    }
    json *node = &doc;
    std::size_t start = 0;
    while (true) {
      const auto dot = path.find('.', start);
      const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (part.empty()) throw ConfigError("override '" + o + "' has an empty key");
      if (!node->is_object()) *node = json::object();
      node = &(*node)[part];
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    *node = std::move(value);
  }
}

void resolve_paths(ExperimentConfig &c, const fs::path &base_dir) {
  auto absolute = [&](const fs::path &p) { return p.is_absolute() ? p : fs::absolute(base_dir / p); };
  if (!c.corpus.root.empty()) c.corpus.root = absolute(c.corpus.root).lexically_normal();
  if (c.corpus.manifest) c.corpus.manifest = absolute(*c.corpus.manifest).lexically_normal();
  if (!c.output_dir.is_absolute()) {
    const char *env = std::getenv("PSENH_OUTPUT_ROOT");
    const fs::path root = env && *env ? fs::path(env) : fs::current_path();
    c.output_dir = fs::absolute(root / c.output_dir);
  }
  c.output_dir = c.output_dir.lexically_normal();
}

ExperimentConfig load_experiment_config(const fs::path &path, const std::vector<std::string> &overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception &e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  apply_overrides(doc, overrides);
  ExperimentConfig c = doc.get<ExperimentConfig>();
  resolve_paths(c, fs::absolute(path).parent_path());
  validate_experiment_config(c);
  return c;
}

TrainConfig resolve_pretrain_config(const ExperimentConfig &c, const std::string &architecture,
                                    const std::string &scheme_name, std::uint64_t seed) {
  TrainConfig tc = default_train_config(ModelConfig::from_name(architecture));
  json overlay = c.pretrain;
  if (const auto it = c.scheme_overrides.find(scheme_name); it != c.scheme_overrides.end()) {
    overlay = merge_patch(overlay, it->second);
  }
  from_json(overlay, tc);
  tc.scheme = scheme_name;
  tc.seed = seed;
  validate_train_config(tc);
  return tc;
}

TrainConfig resolve_finetune_config(const ExperimentConfig &c, const std::string &architecture,
                                    double budget_sec, std::uint64_t seed) {
  TrainConfig tc = default_train_config(ModelConfig::from_name(architecture));
  from_json(c.finetune, tc);
  tc.scheme = scheme::kFinetune;
  tc.ft_budget_sec = budget_sec;
  tc.seed = seed;
  validate_train_config(tc);
  return tc;
}

void validate_experiment_config(const ExperimentConfig &c) {
  if (c.seeds.empty()) throw ConfigError("at least one seed is required");
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size()) {
    throw ConfigError("seeds must be distinct");
  }
  if (c.corpus.root.empty() && !c.corpus.manifest && !c.corpus.synthetic) {
    throw ConfigError("corpus needs a root, a manifest or a synthetic generator");
  }
  if (c.test_speakers.empty() && !c.corpus.synthetic) {
    throw ConfigError("test_speakers is required unless the corpus is synthetic");
  }
  if (c.architectures.empty()) throw ConfigError("at least one architecture is required");
  for (const auto &a : c.architectures) ModelConfig::from_name(a);
  if (c.schemes.empty()) throw ConfigError("at least one scheme is required");
  for (const auto &s : c.schemes) {
    if (!is_pretraining_scheme(s)) throw ConfigError("unknown pretraining scheme '" + s + "'");
  }
  if (std::set<std::string>(c.schemes.begin(), c.schemes.end()).size() != c.schemes.size()) {
    throw ConfigError("schemes must be distinct");
  }
  for (const auto &[k, v] : c.scheme_overrides) {
    if (!is_pretraining_scheme(k)) throw ConfigError("scheme_overrides names unknown scheme '" + k + "'");
  }
  if (std::any_of(c.schemes.begin(), c.schemes.end(), schemes_premix) && c.premix_snr_db.empty()) {
    throw ConfigError("premix_snr_db must list at least one SNR for pseudose or cm");
  }
  for (double s : c.premix_snr_db) {
    if (std::isnan(s) || s == -std::numeric_limits<double>::infinity()) {
      throw ConfigError("premixture SNR must be finite or +inf");
    }
  }
  if (!(c.premix_jitter_db >= 0.0)) throw ConfigError("premix_jitter_db must be non-negative");
  if (c.ft_budgets_sec.empty()) throw ConfigError("ft_budgets_sec must not be empty");
  for (double b : c.ft_budgets_sec) {
    if (!(b >= 0.0 && b <= kMaxFinetuneSec)) {
      throw ConfigError("finetune budget " + std::to_string(b) + " s is outside [0, " +
                        std::to_string(kMaxFinetuneSec) + "]");
    }
  }
  if (std::set<double>(c.ft_budgets_sec.begin(), c.ft_budgets_sec.end()).size() != c.ft_budgets_sec.size()) {
    throw ConfigError("ft_budgets_sec must be distinct");
  }
  if (c.eval.n_mixtures <= 0) throw ConfigError("eval.n_mixtures must be positive");
  if (!(c.eval.snr.lo_db <= c.eval.snr.hi_db)) throw ConfigError("eval SNR range is empty");
  if (!(c.eval.clip_sec > 0.0)) throw ConfigError("eval.clip_sec must be positive");
  for (const auto &a : c.architectures) {
    for (const auto &s : c.schemes) resolve_pretrain_config(c, a, s, c.seeds.front());
    resolve_finetune_config(c, a, c.ft_budgets_sec.front(), c.seeds.front());
  }
}

const char *stage_name(Stage s) {
  switch (s) {
    case Stage::kManifest: return "manifest";
    case Stage::kPartition: return "partition";
    case Stage::kPremix: return "premix";
    case Stage::kPretrain: return "pretrain";
    case Stage::kFinetune: return "finetune";
    case Stage::kEvaluate: return "evaluate";
    case Stage::kReport: return "report";
  }
  return "?";
}

Stage parse_stage(const std::string &name) {
  for (Stage s : {Stage::kManifest, Stage::kPartition, Stage::kPremix, Stage::kPretrain,
                  Stage::kFinetune, Stage::kEvaluate, Stage::kReport}) {
    if (name == stage_name(s)) return s;
  }
  throw ConfigError("unknown stage '" + name + "'");
}

RunSummary run_experiment(const ExperimentConfig &config, Stage last, const ProgressLog &log) {
  validate_experiment_config(config);
  return Pipeline(config, log).run(last);
}

std::vector<CellReport> load_run_reports(const fs::path &run_dir) {
  const fs::path path = run_dir / "eval" / "cells.json";
  if (!fs::exists(path)) throw DataError(run_dir.string() + " has no evaluation results");
  try {
    return read_json(path).get<std::vector<CellReport>>();
  } catch (const json::exception &e) {
    throw DataError("malformed evaluation results in " + path.string() + ": " + e.what());
  }
}

Grid merge_runs(const std::vector<fs::path> &run_dirs) {
  if (run_dirs.empty()) throw ConfigError("no run directories given");
  std::vector<CellReport> pooled;
  for (const auto &d : run_dirs) {
    auto r = load_run_reports(d);
    pooled.insert(pooled.end(), r.begin(), r.end());
  }
  return aggregate_grid(pooled);
}

}  // namespace psenh
