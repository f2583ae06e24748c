// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "psenh/audio.hpp"
#include "psenh/rng.hpp"

namespace psenh {

// Parameters of one synthetic talker: a glottal pitch range and a vocal
// tract scaling that shifts every vowel's formants.
struct Voice {
  double f0_hz = 120.0;
  double f0_spread = 0.12;     // relative pitch excursion within a syllable
  double tract_scale = 1.0;    // formant frequency multiplier
  double syllable_rate = 4.0;  // syllables per second
  double brightness = 1.0;     // spectral tilt exponent of the source
  int vowel_set = 0;           // which subset of vowels the talker favours
};

Voice random_voice(Rng &rng);

// Voiced harmonic speech with syllabic amplitude and pitch contours and short
// pauses, normalized to the given RMS.
Signal synthesize_speech(const Voice &voice, double duration_sec, Rng &rng, double target_rms = 0.1);

enum class NoiseKind { kColored, kBabble, kHum, kBursts, kNarrowband };
inline constexpr int kNumNoiseKinds = 5;

Signal synthesize_noise(NoiseKind kind, double duration_sec, Rng &rng, double target_rms = 0.1);

struct SyntheticCorpusConfig {
  int test_speakers = 3;
  double test_speaker_sec = 60.0;     // clean speech per test speaker
  int general_speakers = 8;
  double general_speaker_sec = 30.0;
  double utterance_min_sec = 1.5;
  double utterance_max_sec = 4.0;
  int noise_train_files = 24;
  int noise_test_files = 12;
  int noise_premix_files = 4;
  double noise_file_sec = 4.0;
  double premix_file_sec = 12.0;
  std::uint64_t seed = 1;

  bool operator==(const SyntheticCorpusConfig &) const = default;
};

void to_json(nlohmann::json &j, const SyntheticCorpusConfig &c);
void from_json(const nlohmann::json &j, SyntheticCorpusConfig &c);

// Test speaker ids ("test00", ...) in generation order.
std::vector<std::string> synthetic_test_speakers(const SyntheticCorpusConfig &c);

// Writes <root>/speech/<speaker>/*.wav, <root>/noise-train/*.wav,
// <root>/noise-test/*.wav and <root>/noise-premix/*.wav as 16-bit PCM.
// Output depends only on the config, so regeneration is byte-identical.
// Returns the number of files written.
std::size_t generate_synthetic_corpus(const std::filesystem::path &root,
                                      const SyntheticCorpusConfig &c);

}  // namespace psenh
