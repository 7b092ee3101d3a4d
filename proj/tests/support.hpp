#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sedsep/audio_io.hpp"
#include "sedsep/error.hpp"
#include "sedsep/rng.hpp"

namespace sedsep::test {

inline Waveform sine(double freq, std::size_t n, double amp = 0.5, int sr = 16000, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / sr + phase);
  }
  return Waveform(std::move(x), sr);
}

inline Waveform noise(Rng& rng, std::size_t n, double amp = 0.5, int sr = 16000) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(-amp, amp);
  return Waveform(std::move(x), sr);
}

inline Waveform scaled(const Waveform& w, double a) {
  std::vector<double> x(w.data());
  for (auto& v : x) v *= a;
  return Waveform(std::move(x), w.sample_rate());
}

inline Waveform added(const Waveform& a, const Waveform& b) {
  std::vector<double> x(a.data());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += b[i];
  return Waveform(std::move(x), a.sample_rate());
}

inline double max_abs_diff(const Waveform& a, const Waveform& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Error code raised by fn, or "" when it returns normally.
template <class Fn>
std::string code_of(Fn fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

// Fresh scratch directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("sedsep_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

}  // namespace sedsep::test
