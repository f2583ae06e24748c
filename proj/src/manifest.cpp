// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "psenh/errors.hpp"

namespace psenh {

using nlohmann::json;

namespace {

bool known_tag(const std::string &t) {
  return t == corpus_tag::kSpeech || t == corpus_tag::kNoiseTrain ||
         t == corpus_tag::kNoiseTest || t == corpus_tag::kNoisePremix;
}

}  // namespace

std::filesystem::path CorpusManifest::resolve(const ManifestEntry &e) const {
  std::filesystem::path p(e.path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

void validate_manifest(const CorpusManifest &m) {
  std::vector<std::string> problems;
  std::set<std::string> seen;
  std::set<int> rates;
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const auto &e = m.entries[i];
    const std::string where = "entry " + std::to_string(i) + " (" + e.path + ")";
    if (e.path.empty()) problems.push_back(where + ": empty path");
    if (!(e.duration_sec > 0.0)) problems.push_back(where + ": duration must be positive");
    if (e.sample_rate <= 0) problems.push_back(where + ": sample_rate must be positive");
    if (!known_tag(e.corpus_tag)) {
      problems.push_back(where + ": unknown corpus_tag '" + e.corpus_tag + "'");
    }
    if (e.corpus_tag == corpus_tag::kSpeech && e.speaker_id.empty()) {
      problems.push_back(where + ": speech entry without speaker_id");
    }
    if (!seen.insert(e.path).second) problems.push_back(where + ": duplicate path");
    rates.insert(e.sample_rate);
  }
  if (rates.size() > 1) {
    std::string list;
    for (int r : rates) list += (list.empty() ? "" : ", ") + std::to_string(r);
    problems.push_back("mixed sample rates: " + list);
  }
  if (!problems.empty()) {
    std::string msg = "invalid manifest:";
    for (const auto &p : problems) msg += "\n  " + p;
    throw DataError(msg);
  }
}

CorpusManifest parse_manifest(std::istream &in, const std::string &origin) {
  CorpusManifest m;
  std::vector<std::string> problems;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      ManifestEntry e;
      e.path = j.at("path").get<std::string>();
      e.speaker_id = j.value("speaker_id", std::string{});
      e.duration_sec = j.at("duration_sec").get<double>();
      e.sample_rate = j.at("sample_rate").get<int>();
      e.corpus_tag = j.at("corpus_tag").get<std::string>();
      m.entries.push_back(std::move(e));
    } catch (const json::exception &ex) {
      problems.push_back(origin + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "manifest schema errors:";
    for (const auto &p : problems) msg += "\n  " + p;
    throw DataError(msg);
  }
  validate_manifest(m);
  return m;
}

CorpusManifest load_manifest(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw DataError("manifest not found: " + path.string());
  CorpusManifest m = parse_manifest(in, path.string());
  m.base_dir = path.parent_path();
  return m;
}

void write_manifest(std::ostream &out, const CorpusManifest &m) {
  for (const auto &e : m.entries) {
    json j = {{"path", e.path},
              {"speaker_id", e.speaker_id},
              {"duration_sec", e.duration_sec},
              {"sample_rate", e.sample_rate},
              {"corpus_tag", e.corpus_tag}};
    out << j.dump() << '\n';
  }
}

void save_manifest(const CorpusManifest &m, const std::filesystem::path &path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write manifest " + path.string());
  write_manifest(out, m);
}

ScanResult scan_corpus(const std::filesystem::path &root, const ScanOptions &opts) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw DataError("cannot read corpus directory " + root.string());
  }
  ScanResult out;
  out.manifest.base_dir = root;
  for (auto it = fs::recursive_directory_iterator(root, ec);
       it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) throw DataError("error scanning " + root.string() + ": " + ec.message());
    if (!it->is_regular_file() || it->path().extension() != ".wav") continue;
    const fs::path rel = fs::relative(it->path(), root);
    auto part = rel.begin();
    const std::string tag = part->string();
    if (!known_tag(tag)) {
      out.warnings.push_back("skipping " + rel.string() + ": unknown corpus tag '" + tag + "'");
      continue;
    }
    ++part;
    std::string speaker;
    if (std::next(part) != rel.end()) speaker = part->string();
    const WavInfo info = probe_wav(it->path());
    const double dur = static_cast<double>(info.num_samples) / info.sample_rate;
    if (dur < opts.min_duration_sec) {
      out.warnings.push_back("skipping " + rel.string() + ": " + std::to_string(dur) +
                             " s is shorter than the minimum clip length");
      continue;
    }
    out.manifest.entries.push_back({rel.generic_string(), speaker, dur, info.sample_rate, tag});
  }
  std::sort(out.manifest.entries.begin(), out.manifest.entries.end(),
            [](const auto &a, const auto &b) { return a.path < b.path; });
  if (out.manifest.entries.empty()) {
    out.warnings.push_back("no audio found under " + root.string());
  }
  validate_manifest(out.manifest);
  return out;
}

}  // namespace psenh
