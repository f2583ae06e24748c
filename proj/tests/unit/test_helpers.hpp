// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "psenh/audio.hpp"

namespace psenh::testing {

inline Signal gaussian_signal(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, scale);
  Signal s(n);
  for (auto &v : s) v = d(rng);
  return s;
}

inline Signal sine(std::size_t n, double hz, double amp = 1.0, double phase = 0.0) {
  Signal s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = amp * std::sin(2.0 * M_PI * hz * static_cast<double>(i) / kSampleRate + phase);
  }
  return s;
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string &name) {
  auto p = std::filesystem::temp_directory_path() / ("psenh_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace psenh::testing
