#include <cstdint>
#include <fstream>

#include "doctest.h"
#include "sedsep/audio_io.hpp"
#include "sedsep/error.hpp"
#include "support.hpp"

using namespace sedsep;
using sedsep::test::TempDir;
using sedsep::test::code_of;

namespace {

void put16(std::ofstream& f, std::uint16_t v) { f.put(char(v & 0xff)).put(char(v >> 8)); }
void put32(std::ofstream& f, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) f.put(char((v >> (8 * i)) & 0xff));
}

// Hand-rolled PCM16 writer, independent of write_wav.
void write_pcm16(const std::filesystem::path& p, const std::vector<std::int16_t>& s, int channels = 1,
                 int sr = 16000) {
  std::ofstream f(p, std::ios::binary);
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(s.size() * 2);
  f.write("RIFF", 4);
  put32(f, 36 + data_bytes);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  put32(f, 16);
  put16(f, 1);
  put16(f, static_cast<std::uint16_t>(channels));
  put32(f, static_cast<std::uint32_t>(sr));
  put32(f, static_cast<std::uint32_t>(sr * channels * 2));
  put16(f, static_cast<std::uint16_t>(channels * 2));
  put16(f, 16);
  f.write("data", 4);
  put32(f, data_bytes);
  for (auto v : s) put16(f, static_cast<std::uint16_t>(v));
}

}  // namespace

TEST_CASE("pcm16 scaling") {
  TempDir dir("wav");
  write_pcm16(dir / "a.wav", {0, 32767, -32768});
  const auto w = read_wav(dir / "a.wav");
  REQUIRE(w.size() == 3);
  CHECK(w[0] == 0.0);
  CHECK(w[1] == doctest::Approx(32767.0 / 32768.0));
  CHECK(w[2] == -1.0);
  CHECK(w.sample_rate() == 16000);
}

TEST_CASE("ten second clip has 160000 samples") {
  TempDir dir("wav");
  write_pcm16(dir / "a.wav", std::vector<std::int16_t>(160000, 7));
  CHECK(read_wav(dir / "a.wav").size() == 160000);
  CHECK(read_wav(dir / "a.wav").duration() == doctest::Approx(10.0));
}

TEST_CASE("stereo is rejected") {
  TempDir dir("wav");
  write_pcm16(dir / "s.wav", {1, 2, 3, 4}, 2);
  CHECK(code_of([&] { read_wav(dir / "s.wav"); }) == errc::kUnsupportedFormat);
}

TEST_CASE("garbage header is malformed") {
  TempDir dir("wav");
  std::ofstream(dir / "bad.wav") << "not a wave file at all";
  CHECK(code_of([&] { read_wav(dir / "bad.wav"); }) == errc::kMalformedWav);
  CHECK(code_of([&] { read_wav(dir / "missing.wav"); }) != "");
}

TEST_CASE("pcm16 round trip within one quantization step") {
  TempDir dir("wav");
  const auto w = test::sine(1000.0, 16000, 0.9);
  const auto r = write_wav(w, dir / "s.wav");
  CHECK(r.clipped_samples == 0);
  const auto back = read_wav(dir / "s.wav");
  REQUIRE(back.size() == w.size());
  CHECK(test::max_abs_diff(w, back) <= 1.0 / 32768.0);
}

TEST_CASE("float32 round trip is exact for float-representable samples") {
  TempDir dir("wav");
  Rng rng(3);
  std::vector<double> x(4001);
  for (auto& v : x) v = static_cast<float>(rng.uniform(-2.0, 2.0));
  const Waveform w(x, 22050);
  write_wav(w, dir / "f.wav", SampleFormat::kFloat32);
  const auto back = read_wav(dir / "f.wav");
  CHECK(back == w);
}

TEST_CASE("random round trips stay within the bound") {
  TempDir dir("wav");
  Rng rng(11);
  for (int k = 0; k < 20; ++k) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 5000));
    const auto w = test::noise(rng, n, 0.99);
    const auto copy = w;
    write_wav(w, dir / "r.wav");
    CHECK(w == copy);
    CHECK(test::max_abs_diff(w, read_wav(dir / "r.wav")) <= 1.0 / 32768.0);
  }
}

TEST_CASE("pcm16 writing clips and counts") {
  TempDir dir("wav");
  const Waveform w({1.5, -2.0, 0.25}, 16000);
  CHECK(write_wav(w, dir / "c.wav").clipped_samples == 2);
  const auto back = read_wav(dir / "c.wav");
  CHECK(back[0] == doctest::Approx(32767.0 / 32768.0));
  CHECK(back[1] == -1.0);
}

TEST_CASE("unwritable path") {
  CHECK(code_of([] { write_wav(Waveform({0.0}, 16000), "/nonexistent_dir/x/y.wav"); }) ==
        errc::kIoFailure);
}

TEST_CASE("compatibility checks") {
  const auto a = Waveform::zeros(160000, 16000);
  CHECK_NOTHROW(assert_compatible(a, Waveform::zeros(160000, 16000)));
  CHECK(code_of([&] { assert_compatible(a, Waveform::zeros(160000, 44100)); }) == errc::kRateMismatch);
  CHECK(code_of([&] { assert_compatible(a, Waveform::zeros(159999, 16000)); }) == errc::kLengthMismatch);
}

TEST_CASE("waveform validation") {
  CHECK(code_of([] { Waveform({0.0}, 0); }) == errc::kBadConfig);
  CHECK(code_of([] { Waveform({std::nan("")}, 16000); }) == errc::kBadConfig);
  CHECK(energy(std::vector<double>{3.0, 4.0}) == 25.0);
}
