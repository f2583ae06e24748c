// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/synthetic.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <nlohmann/json.hpp>

#include "psenh/errors.hpp"
#include "psenh/mixing.hpp"

namespace psenh {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMaxHarmonicHz = 5500.0;
constexpr int kBlock = 80;  // 5 ms parameter update interval

struct Vowel {
  std::array<double, 3> formant_hz;
  std::array<double, 3> bandwidth_hz;
};

constexpr std::array<Vowel, 6> kVowels = {{
    {{730, 1090, 2440}, {90, 110, 160}},
    {{270, 2290, 3010}, {60, 100, 150}},
    {{300, 870, 2240}, {60, 90, 140}},
    {{530, 1840, 2480}, {70, 100, 160}},
    {{570, 840, 2410}, {80, 90, 150}},
    {{660, 1720, 2410}, {80, 110, 160}},
}};

// Vowel subsets a talker draws from.
constexpr std::array<std::array<int, 4>, 3> kVowelSets = {{{0, 1, 2, 3}, {1, 3, 4, 5}, {0, 2, 4, 5}}};

double gaussian(Rng &rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

void normalize_rms(Signal &x, double target) {
  const double r = rms(x);
  if (r > 0.0) {
    for (double &v : x) v *= target / r;
  }
}

// Spectral envelope of the vocal tract for a (possibly interpolated) vowel.
double envelope(const std::array<double, 3> &f, const std::array<double, 3> &bw, double hz,
                double brightness) {
  double a = 0.02;
  const double gains[3] = {1.0, 0.6, 0.3};
  for (int j = 0; j < 3; ++j) {
    const double d = (hz - f[j]) / bw[j];
    a += gains[j] / (1.0 + d * d);
  }
  return a * std::pow(std::max(hz, 50.0) / 100.0, -0.5 * brightness);
}

// RBJ band-pass biquad, constant peak gain.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;

  static Biquad bandpass(double center_hz, double q) {
    const double w = kTwoPi * center_hz / kSampleRate;
    const double alpha = std::sin(w) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad f;
    f.b0 = alpha / a0;
    f.b1 = 0.0;
    f.b2 = -alpha / a0;
    f.a1 = -2.0 * std::cos(w) / a0;
    f.a2 = (1.0 - alpha) / a0;
    return f;
  }

  double operator()(double x) {
    const double y = b0 * x + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x;
    y2 = y1;
    y1 = y;
    return y;
  }
};

struct Syllable {
  std::size_t start = 0, length = 0;
  int vowel_a = 0, vowel_b = 0;
  double f0_a = 0, f0_b = 0;
  bool pause = false;
};

}  // namespace

Voice random_voice(Rng &rng) {
  Voice v;
  v.f0_hz = uniform(rng, 85.0, 260.0);
  v.f0_spread = uniform(rng, 0.05, 0.2);
  v.tract_scale = uniform(rng, 0.8, 1.25);
  v.syllable_rate = uniform(rng, 3.0, 6.0);
  v.brightness = uniform(rng, 0.6, 1.6);
  v.vowel_set = std::uniform_int_distribution<int>(0, 2)(rng);
  return v;
}

Signal synthesize_speech(const Voice &voice, double duration_sec, Rng &rng, double target_rms) {
  const std::size_t n = samples_for(duration_sec, kSampleRate);
  if (n == 0) throw ConfigError("speech duration must be positive");
  const auto &vowels = kVowelSets[static_cast<std::size_t>(voice.vowel_set) % kVowelSets.size()];
  auto pick_vowel = [&] { return vowels[std::uniform_int_distribution<int>(0, 3)(rng)]; };
  auto pick_f0 = [&] { return voice.f0_hz * (1.0 + voice.f0_spread * uniform(rng, -1.0, 1.0)); };

  std::vector<Syllable> plan;
  std::size_t t = 0;
  while (t < n) {
    Syllable s;
    s.start = t;
    if (!plan.empty() && !plan.back().pause && uniform(rng, 0.0, 1.0) < 0.15) {
      s.pause = true;
      s.length = samples_for(uniform(rng, 0.05, 0.2), kSampleRate);
    } else {
      s.length = samples_for(uniform(rng, 0.7, 1.3) / voice.syllable_rate, kSampleRate);
      s.vowel_a = pick_vowel();
      s.vowel_b = pick_vowel();
      s.f0_a = pick_f0();
      s.f0_b = pick_f0();
    }
    s.length = std::max<std::size_t>(s.length, kBlock);
    plan.push_back(s);
    t += s.length;
  }

  Signal out(n, 0.0);
  double phase = 0.0;
  std::vector<double> amp_prev, amp_next;
  for (const auto &s : plan) {
    const std::size_t end = std::min(n, s.start + s.length);
    if (s.pause) continue;
    const auto &va = kVowels[s.vowel_a];
    const auto &vb = kVowels[s.vowel_b];
    auto params_at = [&](double u, std::array<double, 3> &f, std::array<double, 3> &bw) {
      const double w = 0.5 - 0.5 * std::cos(std::numbers::pi * u);
      for (int j = 0; j < 3; ++j) {
        f[j] = voice.tract_scale * ((1.0 - w) * va.formant_hz[j] + w * vb.formant_hz[j]);
        bw[j] = (1.0 - w) * va.bandwidth_hz[j] + w * vb.bandwidth_hz[j];
      }
      return (1.0 - u) * s.f0_a + u * s.f0_b;
    };
    auto harmonic_amps = [&](double u, std::vector<double> &amps) {
      std::array<double, 3> f{}, bw{};
      const double f0 = params_at(u, f, bw);
      const int k_max = static_cast<int>(kMaxHarmonicHz / f0);
      amps.assign(static_cast<std::size_t>(k_max), 0.0);
      for (int k = 1; k <= k_max; ++k) amps[k - 1] = envelope(f, bw, k * f0, voice.brightness);
      return f0;
    };
    const double len = static_cast<double>(s.length);
    for (std::size_t b = s.start; b < end; b += kBlock) {
      const std::size_t be = std::min(end, b + kBlock);
      const double u0 = (b - s.start) / len, u1 = (be - s.start) / len;
      const double f0a = harmonic_amps(u0, amp_prev);
      const double f0b = harmonic_amps(u1, amp_next);
      const std::size_t k_max = std::min(amp_prev.size(), amp_next.size());
      for (std::size_t i = b; i < be; ++i) {
        const double frac = static_cast<double>(i - b) / (be - b);
        const double u = (i - s.start) / len;
        // Syllabic loudness: smooth rise and fall.
        const double env = std::pow(std::sin(std::numbers::pi * u), 0.7);
        const double f0 = (1.0 - frac) * f0a + frac * f0b;
        phase += kTwoPi * f0 / kSampleRate;
        if (phase > kTwoPi) phase -= kTwoPi;
        // sin(k phase) by the Chebyshev recurrence.
        const double c2 = 2.0 * std::cos(phase);
        double s_prev = 0.0, s_cur = std::sin(phase), acc = 0.0;
        for (std::size_t k = 0; k < k_max; ++k) {
          acc += ((1.0 - frac) * amp_prev[k] + frac * amp_next[k]) * s_cur;
          const double s_next = c2 * s_cur - s_prev;
          s_prev = s_cur;
          s_cur = s_next;
        }
        out[i] = env * (acc + 0.03 * gaussian(rng));
      }
    }
  }
  if (rms(out) == 0.0) out[0] = 1e-3;
  normalize_rms(out, target_rms);
  return out;
}

Signal synthesize_noise(NoiseKind kind, double duration_sec, Rng &rng, double target_rms) {
  const std::size_t n = samples_for(duration_sec, kSampleRate);
  if (n == 0) throw ConfigError("noise duration must be positive");
  Signal out(n, 0.0);
  switch (kind) {
    case NoiseKind::kColored: {
      const double pole = uniform(rng, 0.0, 0.98);
      const double white_mix = uniform(rng, 0.0, 0.5);
      const double mod_hz = uniform(rng, 0.2, 1.0), depth = uniform(rng, 0.0, 0.5);
      double state = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = gaussian(rng);
        state = pole * state + (1.0 - pole) * w;
        const double mod = 1.0 + depth * std::sin(kTwoPi * mod_hz * i / kSampleRate);
        out[i] = mod * (state / std::sqrt((1.0 - pole) / (1.0 + pole) + 1e-12) + white_mix * w);
      }
      break;
    }
    case NoiseKind::kBabble: {
      const int talkers = std::uniform_int_distribution<int>(3, 5)(rng);
      for (int k = 0; k < talkers; ++k) {
        const Voice v = random_voice(rng);
        const Signal s = synthesize_speech(v, duration_sec, rng, 1.0);
        for (std::size_t i = 0; i < n; ++i) out[i] += s[i];
      }
      break;
    }
    case NoiseKind::kHum: {
      const double base = uniform(rng, 50.0, 120.0);
      const double decay = uniform(rng, 0.5, 0.9);
      const int harmonics = std::uniform_int_distribution<int>(4, 12)(rng);
      std::vector<double> phases(harmonics);
      for (auto &p : phases) p = uniform(rng, 0.0, kTwoPi);
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0, a = 1.0;
        for (int k = 0; k < harmonics; ++k, a *= decay) {
          acc += a * std::sin(kTwoPi * base * (k + 1) * i / kSampleRate + phases[k]);
        }
        out[i] = acc + 0.05 * gaussian(rng);
      }
      break;
    }
    case NoiseKind::kBursts: {
      const double rate = uniform(rng, 2.0, 6.0);
      Biquad color = Biquad::bandpass(uniform(rng, 500.0, 3000.0), uniform(rng, 0.7, 2.0));
      std::exponential_distribution<double> gap(rate);
      double next = gap(rng) * kSampleRate;
      double level = 0.0, tau = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i >= next) {
          level = uniform(rng, 0.5, 2.0);
          tau = uniform(rng, 0.01, 0.08) * kSampleRate;
          next = i + gap(rng) * kSampleRate;
        }
        out[i] = color((level + 0.03) * gaussian(rng));
        level *= std::exp(-1.0 / tau);
      }
      break;
    }
    case NoiseKind::kNarrowband: {
      Biquad f = Biquad::bandpass(uniform(rng, 300.0, 4000.0), uniform(rng, 2.0, 8.0));
      for (std::size_t i = 0; i < n; ++i) out[i] = f(gaussian(rng));
      break;
    }
  }
  if (rms(out) == 0.0) out[0] = 1e-3;
  normalize_rms(out, target_rms);
  return out;
}

void to_json(nlohmann::json &j, const SyntheticCorpusConfig &c) {
  j = {{"test_speakers", c.test_speakers},
       {"test_speaker_sec", c.test_speaker_sec},
       {"general_speakers", c.general_speakers},
       {"general_speaker_sec", c.general_speaker_sec},
       {"utterance_min_sec", c.utterance_min_sec},
       {"utterance_max_sec", c.utterance_max_sec},
       {"noise_train_files", c.noise_train_files},
       {"noise_test_files", c.noise_test_files},
       {"noise_premix_files", c.noise_premix_files},
       {"noise_file_sec", c.noise_file_sec},
       {"premix_file_sec", c.premix_file_sec},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json &j, SyntheticCorpusConfig &c) {
  c = SyntheticCorpusConfig{};
  c.test_speakers = j.value("test_speakers", c.test_speakers);
  c.test_speaker_sec = j.value("test_speaker_sec", c.test_speaker_sec);
  c.general_speakers = j.value("general_speakers", c.general_speakers);
  c.general_speaker_sec = j.value("general_speaker_sec", c.general_speaker_sec);
  c.utterance_min_sec = j.value("utterance_min_sec", c.utterance_min_sec);
  c.utterance_max_sec = j.value("utterance_max_sec", c.utterance_max_sec);
  c.noise_train_files = j.value("noise_train_files", c.noise_train_files);
  c.noise_test_files = j.value("noise_test_files", c.noise_test_files);
  c.noise_premix_files = j.value("noise_premix_files", c.noise_premix_files);
  c.noise_file_sec = j.value("noise_file_sec", c.noise_file_sec);
  c.premix_file_sec = j.value("premix_file_sec", c.premix_file_sec);
  c.seed = j.value("seed", c.seed);
}

std::vector<std::string> synthetic_test_speakers(const SyntheticCorpusConfig &c) {
  std::vector<std::string> ids;
  char buf[16];
  for (int i = 0; i < c.test_speakers; ++i) {
    std::snprintf(buf, sizeof(buf), "test%02d", i);
    ids.emplace_back(buf);
  }
  return ids;
}

namespace {

void write_pcm(const std::filesystem::path &path, Signal x) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak > 0.99) {
    for (double &v : x) v *= 0.99 / peak;
  }
  std::filesystem::create_directories(path.parent_path());
  write_wav(path, AudioClip(std::move(x)), WavEncoding::kPcm16);
}

std::string numbered(const char *prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%03d.wav", prefix, i);
  return buf;
}

}  // namespace

std::size_t generate_synthetic_corpus(const std::filesystem::path &root,
                                      const SyntheticCorpusConfig &c) {
  if (c.test_speakers < 0 || c.general_speakers < 0 || c.noise_train_files < 0 ||
      c.noise_test_files < 0 || c.noise_premix_files < 0) {
    throw ConfigError("synthetic corpus counts must be non-negative");
  }
  if (!(c.utterance_min_sec > 0.0 && c.utterance_min_sec <= c.utterance_max_sec)) {
    throw ConfigError("synthetic utterance length range is invalid");
  }
  std::size_t files = 0;

  auto speaker = [&](const std::string &id, double total_sec) {
    Rng voice_rng(derive_seed(c.seed, {hash_name("voice"), hash_name(id)}));
    const Voice voice = random_voice(voice_rng);
    Rng rng(derive_seed(c.seed, {hash_name("speech"), hash_name(id)}));
    double produced = 0.0;
    int u = 0;
    while (total_sec - produced >= c.utterance_min_sec) {
      const double len =
          std::min(total_sec - produced, uniform(rng, c.utterance_min_sec, c.utterance_max_sec));
      const double sec = static_cast<double>(samples_for(len, kSampleRate)) / kSampleRate;
      write_pcm(root / "speech" / id / (id + "_" + numbered("u", u++)),
                synthesize_speech(voice, sec, rng));
      produced += sec;
      ++files;
    }
  };
  for (const auto &id : synthetic_test_speakers(c)) speaker(id, c.test_speaker_sec);
  char buf[16];
  for (int i = 0; i < c.general_speakers; ++i) {
    std::snprintf(buf, sizeof(buf), "gen%02d", i);
    speaker(buf, c.general_speaker_sec);
  }

  auto noise_set = [&](const char *tag, const char *prefix, int count, double sec) {
    for (int i = 0; i < count; ++i) {
      Rng rng(derive_seed(c.seed, {hash_name(tag), static_cast<std::uint64_t>(i)}));
      const auto kind = static_cast<NoiseKind>(i % kNumNoiseKinds);
      write_pcm(root / tag / numbered(prefix, i), synthesize_noise(kind, sec, rng));
      ++files;
    }
  };
  noise_set("noise-train", "ntr", c.noise_train_files, c.noise_file_sec);
  noise_set("noise-test", "nte", c.noise_test_files, c.noise_file_sec);
  noise_set("noise-premix", "npm", c.noise_premix_files, c.premix_file_sec);
  return files;
}

}  // namespace psenh
