#include <complex>
#include <numeric>
#include <numbers>

#include "doctest.h"
#include "sedsep/dsp.hpp"
#include "sedsep/ss_metrics.hpp"
#include "support.hpp"

using namespace sedsep;
using test::code_of;

namespace {

// O(N^2) DFT of frame t of the centered, reflect-padded signal.
std::vector<std::complex<double>> direct_frame(const Waveform& x, std::size_t t, std::size_t win,
                                               std::size_t hop) {
  std::vector<double> w(win);
  for (std::size_t n = 0; n < win; ++n) {
    w[n] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * double(n) / double(win)));
  }
  std::vector<std::complex<double>> out(win / 2 + 1);
  for (std::size_t f = 0; f <= win / 2; ++f) {
    std::complex<double> acc = 0.0;
    for (std::size_t n = 0; n < win; ++n) {
      std::ptrdiff_t i = std::ptrdiff_t(t * hop + n) - std::ptrdiff_t(win / 2);
      if (i < 0) i = -i;
      const double v = w[n] * x[std::size_t(i)];
      acc += v * std::polar(1.0, -2.0 * std::numbers::pi * double(f * n) / double(win));
    }
    out[f] = acc;
  }
  return out;
}

double error_ratio(const Waveform& a, const Waveform& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den > 0.0 ? num / den : num;
}

}  // namespace

TEST_CASE("bin count and frame count") {
  const auto g = stft(Waveform::zeros(16000, 16000));
  CHECK(g.bins == 257);
  CHECK(g.frames == 1 + 16000 / 128);
}

TEST_CASE("zero input gives a zero grid and a zero waveform") {
  const auto g = stft(Waveform::zeros(16000, 16000));
  for (const auto& v : g.values) REQUIRE(v == std::complex<double>(0.0, 0.0));
  const auto w = istft(g, 16000);
  for (double v : w.samples()) REQUIRE(v == 0.0);
}

TEST_CASE("impulse frame matches a direct DFT") {
  std::vector<double> x(4096, 0.0);
  x[0] = 1.0;
  const Waveform w(x, 16000);
  const auto g = stft(w);
  const auto ref = direct_frame(w, 0, 512, 128);
  for (std::size_t f = 0; f < g.bins; ++f) {
    REQUIRE(std::abs(g.at(0, f) - ref[f]) < 1e-9);
  }
}

TEST_CASE("random frames match a direct DFT") {
  Rng rng(5);
  const auto w = test::noise(rng, 3000);
  const auto g = stft(w, {256, 64});
  for (std::size_t t : {0u, 1u, 7u, 20u}) {
    const auto ref = direct_frame(w, t, 256, 64);
    for (std::size_t f = 0; f < g.bins; ++f) REQUIRE(std::abs(g.at(t, f) - ref[f]) < 1e-9);
  }
}

TEST_CASE("round trip on random signals of many lengths") {
  Rng rng(9);
  for (std::size_t n : {1u, 2u, 3u, 100u, 255u, 256u, 257u, 511u, 512u, 513u, 16000u, 160000u}) {
    const auto w = test::noise(rng, n);
    const auto back = istft(stft(w), n);
    REQUIRE(back.size() == n);
    CHECK(error_ratio(back, w) <= 1e-5);
  }
}

TEST_CASE("istft truncates to the target length") {
  const auto w = test::sine(440.0, 2000);
  const auto back = istft(stft(w), 1500);
  CHECK(back.size() == 1500);
  CHECK(test::max_abs_diff(back, Waveform(std::vector<double>(w.data().begin(), w.data().begin() + 1500), 16000)) < 1e-9);
}

TEST_CASE("stft is linear") {
  Rng rng(2);
  const auto a = test::noise(rng, 5000);
  const auto b = test::noise(rng, 5000);
  const auto ga = stft(a);
  const auto gb = stft(b);
  const auto gc = stft(test::added(test::scaled(a, 2.0), test::scaled(b, -0.5)));
  double err = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < gc.values.size(); ++i) {
    const auto expect = 2.0 * ga.values[i] - 0.5 * gb.values[i];
    err = std::max(err, std::abs(gc.values[i] - expect));
    ref = std::max(ref, std::abs(expect));
  }
  CHECK(err <= 1e-6 * ref);
}

TEST_CASE("config validation") {
  CHECK(code_of([] { validate({512, 0}); }) == errc::kBadConfig);
  CHECK(code_of([] { validate({512, 1024}); }) == errc::kBadConfig);
  CHECK(code_of([] { validate({512, 100}); }) == errc::kBadConfig);
  CHECK(code_of([] { validate({512, 128}); }).empty());
}

TEST_CASE("identity and zero masks") {
  Rng rng(4);
  const auto w = test::noise(rng, 8000);
  const auto g = stft(w);
  MaskGrid masks(2, g.frames, g.bins);
  for (std::size_t t = 0; t < g.frames; ++t) {
    for (std::size_t f = 0; f < g.bins; ++f) masks.at(0, t, f) = 1.0;
  }
  const auto out = apply_masks(g, masks, w.size());
  CHECK(error_ratio(out[0], w) <= 1e-5);
  for (double v : out[1].samples()) REQUIRE(v == 0.0);
  MaskGrid wrong(2, g.frames + 1, g.bins);
  CHECK(code_of([&] { apply_masks(g, wrong, w.size()); }) == errc::kShapeMismatch);
}

TEST_CASE("complementary binary masks split band-disjoint sines") {
  const auto low = test::sine(300.0, 16000, 0.4);
  const auto high = test::sine(4000.0, 16000, 0.4);
  const auto mix = test::added(low, high);
  const auto g = stft(mix);
  MaskGrid masks(2, g.frames, g.bins);
  const std::size_t cut = 2000 * 512 / 16000;
  for (std::size_t t = 0; t < g.frames; ++t) {
    for (std::size_t f = 0; f < g.bins; ++f) masks.at(f < cut ? 0 : 1, t, f) = 1.0;
  }
  const auto out = apply_masks(g, masks, mix.size());
  CHECK(si_snr(out[0], low) > 20.0);
  CHECK(si_snr(out[1], high) > 20.0);
}

TEST_CASE("mixture consistency by hand") {
  const Waveform x({2.0, 2.0}, 16000);
  const std::vector<Waveform> s{Waveform({1.0, 0.0}, 16000), Waveform({0.0, 1.0}, 16000)};
  const auto out = mixture_consistency(s, x);
  CHECK(out[0].data() == std::vector<double>{1.5, 0.5});
  CHECK(out[1].data() == std::vector<double>{0.5, 1.5});

  const std::vector<double> weights{1.0, 0.0};
  const auto skewed = mixture_consistency(s, x, weights);
  CHECK(skewed[0].data() == std::vector<double>{2.0, 1.0});
  CHECK(skewed[1] == s[1]);

  const std::vector<Waveform> exact{Waveform({1.0, 1.5}, 16000), Waveform({1.0, 0.5}, 16000)};
  const auto same = mixture_consistency(exact, x);
  CHECK(same[0] == exact[0]);
  CHECK(same[1] == exact[1]);

  const std::vector<double> bad{0.5, 0.6};
  CHECK(code_of([&] { mixture_consistency(s, x, bad); }) == errc::kBadWeights);
  CHECK(code_of([&] { mixture_consistency(s, Waveform({1.0}, 16000)); }) == errc::kLengthMismatch);
}

TEST_CASE("projected sources always sum to the mixture") {
  Rng rng(8);
  for (int k = 0; k < 50; ++k) {
    const auto n = std::size_t(rng.uniform_int(1, 3000));
    const auto m = std::size_t(rng.uniform_int(1, 6));
    std::vector<Waveform> s;
    for (std::size_t i = 0; i < m; ++i) s.push_back(test::noise(rng, n));
    const auto x = test::noise(rng, n, 2.0);
    const auto out = mixture_consistency(s, x);
    double peak = 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (const auto& o : out) sum += o[i];
      worst = std::max(worst, std::abs(sum - x[i]));
      peak = std::max(peak, std::abs(x[i]));
    }
    REQUIRE(worst <= 1e-6 * peak);
  }
}

TEST_CASE("rfft and irfft invert each other for odd sizes") {
  Rng rng(1);
  std::vector<double> x(15);
  for (auto& v : x) v = rng.uniform(-1, 1);
  std::vector<std::complex<double>> spec(8);
  rfft(x, spec);
  CHECK(std::abs(spec[0].real() - std::accumulate(x.begin(), x.end(), 0.0)) < 1e-12);
  std::vector<double> back(15);
  irfft(spec, back);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
}
