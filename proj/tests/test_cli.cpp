#include <cstdlib>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "sedsep/cli.hpp"
#include "sedsep/text_io.hpp"
#include "support.hpp"

using namespace sedsep;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result sedsep_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string p(const test::TempDir& d, const std::string& s) { return (d / s).string(); }

std::size_t count_lines(const std::string& s) { return std::size_t(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("usage and unknown commands") {
  CHECK(sedsep_run({}).code != 0);
  CHECK(sedsep_run({"--help"}).code == 0);
  const auto r = sedsep_run({"frobnicate"});
  CHECK(r.code != 0);
  CHECK(r.err.rfind("error[Usage]:", 0) == 0);
  CHECK(sedsep_run({"mix", "--help"}).out.find("--scheme") != std::string::npos);
  CHECK(sedsep_run({"mix", "--bogus"}).err.rfind("error[Usage]:", 0) == 0);
}

TEST_CASE("invalid scheme lists the valid ones") {
  test::TempDir d("cli");
  const auto r = sedsep_run({"mix", "--scheme", "Nope", "--out", p(d, "x")});
  CHECK(r.code != 0);
  CHECK(r.err.rfind("error[BadScheme]:", 0) == 0);
  for (const char* n : {"DmFm", "BgFgFm", "PIT", "Classwise", "GroupPIT", "FUSS"}) {
    CHECK(r.err.find(n) != std::string::npos);
  }
}

TEST_CASE("mix is deterministic") {
  test::TempDir d("cli");
  for (const char* out : {"a", "b"}) {
    REQUIRE(sedsep_run({"mix", "--scheme", "BgFgFm", "--clips", "20", "--seed", "7", "--duration", "2",
                        "--out", p(d, out), "--workers", "3"})
                .code == 0);
  }
  CHECK(read_text_file(d / "a/ground_truth.tsv") == read_text_file(d / "b/ground_truth.tsv"));
  const auto ma = nlohmann::json::parse(read_text_file(d / "a/manifest.json"));
  CHECK(ma["clips"].size() == 20);
  CHECK(read_wav(d / "a/audio/clip_7_19.wav") == read_wav(d / "b/audio/clip_7_19.wav"));
  CHECK(fs::exists(d / "a/config.json"));
}

TEST_CASE("fuss mixes have one to four sources") {
  test::TempDir d("cli");
  REQUIRE(sedsep_run({"mix", "--scheme", "FUSS", "--clips", "5", "--duration", "1", "--out", p(d, "f")}).code == 0);
  const auto m = nlohmann::json::parse(read_text_file(d / "f/manifest.json"));
  for (const auto& c : m["clips"]) {
    int active = 0;
    for (bool a : c["active"]) active += a;
    CHECK(active >= 1);
    CHECK(active <= 4);
    CHECK(c["active"][0] == true);
  }
}

TEST_CASE("config files feed flags and flags win") {
  test::TempDir d("cli");
  write_text_file(d / "cfg.json", R"({"scheme": "FUSS", "clips": 2, "duration": 1, "seed": 3})");
  REQUIRE(sedsep_run({"mix", "--config", p(d, "cfg.json"), "--clips", "3", "--out", p(d, "m")}).code == 0);
  const auto m = nlohmann::json::parse(read_text_file(d / "m/manifest.json"));
  CHECK(m["scheme"] == "FUSS");
  CHECK(m["clips"].size() == 3);
  const auto echoed = nlohmann::json::parse(read_text_file(d / "m/config.json"));
  CHECK(echoed["clips"] == "3");
  write_text_file(d / "bad.json", R"({"colour": "red"})");
  CHECK(sedsep_run({"mix", "--config", p(d, "bad.json")}).err.rfind("error[BadConfig]:", 0) == 0);
}

TEST_CASE("separate, evaluate and fuse") {
  test::TempDir d("cli");
  REQUIRE(sedsep_run({"mix", "--clips", "6", "--seed", "1", "--duration", "3", "--out", p(d, "ds")}).code == 0);

  SUBCASE("irm and ibm") {
    const auto irm = sedsep_run({"separate", "--dataset", p(d, "ds"), "--out", p(d, "irm")});
    REQUIRE(irm.code == 0);
    CHECK(irm.out.find("MSi") != std::string::npos);
    REQUIRE(sedsep_run({"separate", "--dataset", p(d, "ds"), "--oracle", "ibm", "--out", p(d, "ibm")}).code == 0);
    for (const char* f : {"manifest.json", "si_snr.tsv"}) {
      CHECK(fs::exists(d / "irm" / f));
      CHECK(fs::exists(d / "ibm" / f));
    }
    const auto s = sedsep_run({"eval-ss", "--estimates", p(d, "irm"), "--references", p(d, "ds"), "--out", p(d, "ss")});
    REQUIRE(s.code == 0);
    const auto rep = nlohmann::json::parse(read_text_file(d / "ss/ss_report.json"));
    REQUIRE(rep["msi"].is_number());
    CHECK(rep["msi"].get<double>() > 0.0);

    const auto ext = sedsep_run({"separate", "--dataset", p(d, "ds"), "--oracle", "external", "--estimates",
                                 p(d, "irm"), "--out", p(d, "ext")});
    REQUIRE(ext.code == 0);
    CHECK(read_text_file(d / "ext/si_snr.tsv") == read_text_file(d / "irm/si_snr.tsv"));
  }

  SUBCASE("references as estimates") {
    const auto r = sedsep_run({"eval-ss", "--estimates", p(d, "ds"), "--references", p(d, "ds")});
    REQUIRE(r.code == 0);
    const auto rep = nlohmann::json::parse(r.out);
    if (rep["one_s"].is_number()) CHECK(rep["one_s"].get<double>() == doctest::Approx(80.0));
    REQUIRE(rep["msi"].is_number());
    // MSi = cap - mean mixture SI-SNR over the same sources
    CHECK(rep["msi"].get<double>() > 50.0);
  }

  SUBCASE("missing manifest and disjoint corpora") {
    const auto r = sedsep_run({"separate", "--dataset", p(d, "nowhere"), "--out", p(d, "x")});
    CHECK(r.code != 0);
    CHECK(r.err.rfind("error[MissingFile]:", 0) == 0);
    REQUIRE(sedsep_run({"mix", "--clips", "2", "--seed", "99", "--duration", "3", "--out", p(d, "other")}).code == 0);
    const auto e = sedsep_run({"eval-ss", "--estimates", p(d, "other"), "--references", p(d, "ds")});
    CHECK(e.code != 0);
    CHECK(e.err.rfind("error[", 0) == 0);
  }

  SUBCASE("sed evaluation, fusion and sweep") {
    REQUIRE(sedsep_run({"oracle-posteriors", "--truth", p(d, "ds/ground_truth.tsv"), "--clip-duration", "3",
                        "--out", p(d, "post")})
                .code == 0);
    const auto e = sedsep_run({"eval-sed", "--truth", p(d, "ds/ground_truth.tsv"), "--posteriors", p(d, "post"),
                               "--clip-duration", "3", "--out", p(d, "sed")});
    REQUIRE(e.code == 0);
    const auto rep = nlohmann::json::parse(read_text_file(d / "sed/sed_report.json"));
    CHECK(rep["f1_macro"].get<double>() == 1.0);
    CHECK(rep["psds"].get<double>() == doctest::Approx(1.0));
    CHECK(fs::exists(d / "sed/psds.json"));

    const auto f = sedsep_run({"fuse", "--mixture", p(d, "post"), "--sources", p(d, "post") + "," + p(d, "post"),
                               "--p", "2", "--q", "2", "--clip-duration", "3", "--out", p(d, "fused")});
    REQUIRE(f.code == 0);
    CHECK(fs::exists(d / "fused/clip_1_0.tsv"));

    const auto s = sedsep_run({"sweep", "--mixture", p(d, "post"), "--sources", p(d, "post"), "--truth",
                               p(d, "ds/ground_truth.tsv"), "--clip-duration", "3", "--p", "0.5,1,2,4,max",
                               "--q", "0.5,1,2,4,max", "--out", p(d, "sweep.tsv")});
    REQUIRE(s.code == 0);
    CHECK(count_lines(read_text_file(d / "sweep.tsv")) == 26);

    const auto m = sedsep_run({"fuse", "--mixture", p(d, "post"), "--sources", p(d, "missing"), "--clip-duration",
                               "3", "--out", p(d, "f2")});
    CHECK(m.code != 0);
    CHECK(m.err.rfind("error[MissingFile]:", 0) == 0);
  }
}

TEST_CASE("assemble") {
  test::TempDir d("cli");
  write_wav(test::sine(300.0, 4000), d / "mix.wav");
  write_wav(test::sine(300.0, 4000, 0.1), d / "s0.wav");
  write_wav(test::sine(900.0, 4000, 0.1), d / "s1.wav");
  REQUIRE(sedsep_run({"assemble", "--mode", "early", "--mixture", p(d, "mix.wav"), "--sources",
                      p(d, "s0.wav") + "," + p(d, "s1.wav"), "--out", p(d, "early")})
              .code == 0);
  CHECK(fs::exists(d / "early/channel_2.tsv"));
  write_text_file(d / "e0.tsv", "1\t2\n3\t4\n");
  write_text_file(d / "e1.tsv", "5\t7\n6\t8\n");
  REQUIRE(sedsep_run({"assemble", "--mode", "middle", "--embeddings", p(d, "e0.tsv") + "," + p(d, "e1.tsv"),
                      "--out", p(d, "mid.tsv")})
              .code == 0);
  CHECK(read_text_file(d / "mid.tsv") == "1\t2\t5\t7\n3\t4\t6\t8\n");
}

TEST_CASE("worker pool") {
  std::vector<int> hits(100, 0);
  cli::parallel_for(100, 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(cli::parallel_for(10, 3, [](std::size_t i) { if (i == 4) throw std::runtime_error("x"); }),
                  std::runtime_error);
}
