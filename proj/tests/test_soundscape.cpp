#include <filesystem>

#include "doctest.h"
#include "sedsep/soundscape.hpp"
#include "sedsep/text_io.hpp"
#include "support.hpp"

using namespace sedsep;
using test::code_of;

namespace {

MixSpec short_spec(std::uint64_t seed = 1) {
  MixSpec s;
  s.seed = seed;
  s.duration = 2.0;
  s.event_duration = {0.3, 1.0};
  return s;
}

bool all_zero(const Waveform& w) {
  return std::all_of(w.samples().begin(), w.samples().end(), [](double v) { return v == 0.0; });
}

}  // namespace

TEST_CASE("fuss mode draws one to four sources with a full-length background") {
  const ProceduralBank bank;
  const auto scheme = schemes::fuss();
  auto spec = short_spec(3);
  for (std::size_t i = 0; i < 20; ++i) {
    const auto clip = generate_clip(spec, scheme, bank, i);
    const auto n = clip.refs.active_count();
    CHECK(n >= 1);
    CHECK(n <= 4);
    REQUIRE(clip.refs.active[0]);
    // the background covers the whole clip
    const auto bg = clip.refs.slots[0].samples();
    for (std::size_t b = 0; b + 800 <= bg.size(); b += 800) REQUIRE(energy(bg.subspan(b, 800)) > 0.0);
    CHECK(clip.truth.events.empty());
  }
}

TEST_CASE("same seed gives bit-identical clips") {
  const ProceduralBank bank;
  const auto scheme = schemes::bgfgfm();
  const auto a = generate_clip(short_spec(5), scheme, bank, 2);
  const auto b = generate_clip(short_spec(5), scheme, bank, 2);
  CHECK(a.mixture == b.mixture);
  for (std::size_t i = 0; i < a.refs.size(); ++i) CHECK(a.refs.slots[i] == b.refs.slots[i]);
  CHECK(a.truth.events == b.truth.events);
  CHECK(a.clip_id == "clip_5_2");
  const auto c = generate_clip(short_spec(6), scheme, bank, 2);
  CHECK_FALSE(a.mixture == c.mixture);
}

TEST_CASE("no foreground events leaves the background alone") {
  const ProceduralBank bank;
  auto spec = short_spec();
  spec.event_count = {0, 0};
  spec.fuss_probability = 0.0;
  const auto clip = generate_clip(spec, schemes::bgfgfm(), bank, 0);
  CHECK(clip.truth.events.empty());
  CHECK(clip.mixture == clip.refs.slots[0]);
  CHECK_FALSE(clip.refs.active[1]);
  CHECK_FALSE(clip.refs.active[2]);
}

TEST_CASE("scheme targets from the same roles") {
  const ProceduralBank bank;
  auto spec = short_spec(9);
  spec.event_count = {3, 3};
  spec.fuss_probability = 1.0;
  spec.class_inventory = {"Dog", "Cat"};
  const auto roles = draw_roles(spec, schemes::classwise(), bank, 0);
  REQUIRE(roles.desed_background);
  REQUIRE(!roles.foreground.empty());

  std::vector<double> fg(roles.length, 0.0);
  std::vector<double> dog(roles.length, 0.0);
  for (const auto& e : roles.foreground) {
    for (std::size_t k = 0; k < roles.length; ++k) {
      fg[k] += e.audio[k];
      if (e.event.label == "Dog") dog[k] += e.audio[k];
    }
  }

  const auto bgfgfm = build_task_targets(roles, schemes::bgfgfm());
  CHECK(bgfgfm.slots[0] == *roles.desed_background);
  CHECK(test::max_abs_diff(bgfgfm.slots[1], Waveform(fg, roles.sample_rate)) == 0.0);

  const auto dmfm = build_task_targets(roles, schemes::dmfm());
  CHECK(test::max_abs_diff(dmfm.slots[0], test::added(*roles.desed_background, Waveform(fg, roles.sample_rate))) < 1e-12);

  const auto cw = build_task_targets(roles, schemes::classwise());
  const auto& labels = desed_classes();
  const auto dog_slot = std::size_t(std::find(labels.begin(), labels.end(), "Dog") - labels.begin());
  CHECK(test::max_abs_diff(cw.slots[dog_slot], Waveform(dog, roles.sample_rate)) == 0.0);
}

TEST_CASE("too many events for individual slots") {
  ClipRoles roles;
  roles.length = 10;
  for (int i = 0; i < 6; ++i) {
    roles.foreground.push_back({Waveform(std::vector<double>(10, 0.1), 16000), {0.0, 0.001, "Dog"}});
  }
  CHECK(code_of([&] { build_task_targets(roles, schemes::pit()); }) == errc::kTooManyEvents);
  auto spec = short_spec();
  spec.event_count = {0, 6};
  CHECK(code_of([&] { spec.validate(schemes::pit()); }) == errc::kBadScheme);
}

TEST_CASE("mixture is the sum and events are silent outside their support") {
  const ProceduralBank bank;
  auto spec = short_spec(17);
  spec.event_count = {2, 5};
  for (std::size_t i = 0; i < 5; ++i) {
    const auto roles = draw_roles(spec, schemes::pit(), bank, i);
    const auto refs = build_task_targets(roles, schemes::pit());
    const auto clip = generate_clip(spec, schemes::pit(), bank, i);
    CHECK(clip.mixture == refs.sum());
    for (const auto& e : roles.foreground) {
      const auto lo = std::size_t(std::max(0.0, (e.event.onset - 0.001) * 16000));
      const auto hi = std::size_t((e.event.offset + 0.001) * 16000);
      for (std::size_t k = 0; k < e.audio.size(); ++k) {
        if (k < lo || k > hi) REQUIRE(e.audio[k] == 0.0);
      }
      CHECK(e.event.onset >= 0.0);
      CHECK(e.event.offset <= spec.duration);
    }
  }
}

TEST_CASE("export layout and manifest round trip") {
  test::TempDir dir("mix");
  const ProceduralBank bank;
  const auto scheme = schemes::bgfgfm();
  const auto spec = short_spec(4);
  std::vector<GeneratedClip> clips;
  for (std::size_t i = 0; i < 10; ++i) clips.push_back(generate_clip(spec, scheme, bank, i));
  const auto m = export_dataset(clips, scheme, spec, dir.path());
  std::size_t audio = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir / "audio")) audio += e.is_regular_file();
  CHECK(audio == 10);
  std::size_t active = 0;
  for (const auto& c : clips) active += c.refs.active_count();
  std::size_t sources = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir / "sources")) sources += e.is_regular_file();
  CHECK(sources == active);
  CHECK(std::filesystem::exists(dir / "ground_truth.tsv"));
  const auto text = read_text_file(dir / "manifest.json");
  const auto back = manifest_from_json(text);
  CHECK(manifest_to_json(back) == text);
  CHECK(back.clips.size() == 10);

  const auto tsv = read_text_file(dir / "ground_truth.tsv");
  export_dataset(clips, scheme, spec, dir.path());
  CHECK(read_text_file(dir / "ground_truth.tsv") == tsv);
  CHECK(code_of([] { manifest_from_json("[]"); }) == errc::kMalformedManifest);
}

TEST_CASE("export to an unwritable directory") {
  const ProceduralBank bank;
  const auto spec = short_spec();
  const std::vector<GeneratedClip> clips{generate_clip(spec, schemes::fuss(), bank, 0)};
  CHECK(code_of([&] { export_dataset(clips, schemes::fuss(), spec, "/proc/sedsep_no"); }) ==
        errc::kIoFailure);
}

TEST_CASE("wav directory bank") {
  test::TempDir dir("bank");
  for (const char* d : {"background", "fuss", "Dog"}) {
    std::filesystem::create_directories(dir / d);
    write_wav(test::sine(300.0, 8000), dir / d / "a.wav", SampleFormat::kFloat32);
  }
  const WavDirectoryBank bank(dir.path(), {"Dog"});
  auto spec = short_spec();
  spec.class_inventory = {"Dog"};
  const auto clip = generate_clip(spec, schemes::bgfgfm(), bank, 0);
  CHECK(clip.mixture.size() == 32000);
  CHECK(code_of([&] { WavDirectoryBank(dir.path(), {"Dog", "Cat"}); }) == errc::kBankExhausted);
}

TEST_CASE("truncated convolution") {
  const std::vector<double> x{1.0, 2.0, 3.0};
  const std::vector<double> ir{1.0, 0.5};
  const auto y = convolve_truncated(x, ir);
  REQUIRE(y.size() == 3);
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(y[1] == doctest::Approx(2.5));
  CHECK(y[2] == doctest::Approx(4.0));
}

TEST_CASE("mix parameter validation") {
  auto spec = short_spec();
  spec.duration = 0.0;
  CHECK(code_of([&] { spec.validate(schemes::bgfgfm()); }) == errc::kBadConfig);
  spec = short_spec();
  spec.fuss_sources = {0, 4};
  CHECK(code_of([&] { spec.validate(schemes::fuss()); }) == errc::kBadConfig);
  spec = short_spec();
  spec.fuss_probability = 1.5;
  CHECK(code_of([&] { spec.validate(schemes::bgfgfm()); }) == errc::kBadConfig);
}
