#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sedsep/cli.hpp"
#include "sedsep/error.hpp"
#include "sedsep/fusion.hpp"
#include "sedsep/oracle_separation.hpp"
#include "sedsep/sed_eval.hpp"
#include "sedsep/soundscape.hpp"
#include "sedsep/ss_metrics.hpp"
#include "sedsep/text_io.hpp"

namespace fs = std::filesystem;

namespace sedsep::cli {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kSubcommands[] = {"mix",  "separate", "eval-ss",          "eval-sed",
                                        "fuse", "sweep",    "oracle-posteriors", "assemble"};

double round6(double v) { return std::stod(format_number(v)); }

Json optional_number(const std::optional<double>& v) {
  return v ? Json(round6(*v)) : Json(nullptr);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto& item : split(s, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) raise(errc::kIoFailure, "cannot create " + dir.string() + ": " + ec.message());
}

// Resolved options of the subcommand, written next to its outputs.
std::string resolved_config(const CLI::App& app) {
  Json j;
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help") continue;
    if (opt->get_expected_max() == 0) {
      j[name] = opt->as<bool>();
    } else if (opt->count() > 0) {
      const auto& results = opt->results();
      j[name] = results.empty() ? std::string("true") : results.back();
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j.dump(2) + "\n";
}

std::vector<std::string> long_names(const CLI::App& app) {
  std::vector<std::string> out;
  for (const CLI::Option* opt : app.get_options()) {
    for (const auto& n : opt->get_lnames()) out.push_back(n);
  }
  return out;
}

std::vector<fs::path> tsv_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) raise(errc::kMissingFile, "missing directory " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".tsv") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

DatasetManifest load_manifest(const fs::path& dir) {
  const auto path = dir / "manifest.json";
  if (!fs::exists(path)) raise(errc::kMissingFile, "missing manifest " + path.string());
  return manifest_from_json(read_text_file(path));
}

struct LoadedClip {
  Waveform mixture;
  SourceSet sources;
};

LoadedClip load_clip(const fs::path& dir, const DatasetManifest::Clip& c,
                     const std::optional<TaskScheme>& scheme) {
  auto ext = load_external_sources(dir, SourceManifest{c.clip_id, c.mixture, c.slots});
  LoadedClip out{std::move(ext.mixture), std::move(ext.sources)};
  for (std::size_t i = 0; i < out.sources.size(); ++i) {
    out.sources.active[i] = out.sources.active[i] && c.active[i];
    if (!out.sources.active[i]) out.sources.slots[i] = Waveform::zeros(out.mixture.size(), out.mixture.sample_rate());
    out.sources.labels[i] = c.labels[i];
  }
  if (scheme && scheme->size() == out.sources.size()) out.sources.groups = scheme->slot_groups();
  return out;
}

DatasetManifest::Clip write_sources(const fs::path& out_dir, const std::string& clip_id,
                                    const std::string& mixture_path, const SourceSet& s) {
  DatasetManifest::Clip c;
  c.clip_id = clip_id;
  c.mixture = mixture_path;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!s.active[k]) {
      c.slots.push_back("zero");
      continue;
    }
    c.slots.push_back("sources/" + clip_id + "_s" + std::to_string(k) + ".wav");
    write_wav(s.slots[k], out_dir / c.slots.back(), SampleFormat::kFloat32);
  }
  c.active = s.active;
  c.labels = s.labels;
  return c;
}

std::string format_clip_scores(const std::vector<ClipScore>& clips) {
  std::string out = "clip_id\tslot\tactive\tsi_snr\tsi_snri\n";
  for (const auto& clip : clips) {
    for (const auto& s : clip.slots) {
      out += clip.clip_id + "\t" + std::to_string(s.slot) + "\t" + (s.active ? "1" : "0") + "\t" +
             (s.active ? format_number(s.si_snr) : "nan") + "\t" +
             (s.active ? format_number(s.si_snri) : "nan") + "\n";
    }
  }
  return out;
}

std::string separation_json(const SeparationScore& s, std::size_t clips) {
  Json j;
  j["msi"] = optional_number(s.msi);
  j["one_s"] = optional_number(s.one_s);
  j["multi_source_clips"] = s.multi_source_clips;
  j["single_source_clips"] = s.single_source_clips;
  j["clips"] = clips;
  return j.dump(2) + "\n";
}

std::string describe(const std::optional<double>& v) { return v ? format_number(*v) + " dB" : "undefined"; }

// ---------------------------------------------------------------- mix

struct MixOptions {
  std::string scheme = "BgFgFm";
  std::size_t clips = 10;
  std::uint64_t seed = 0;
  std::string out = "dataset";
  MixSpec spec;
  std::string bank;
  std::string rir;
  std::size_t workers = default_workers();
};

void add_mix(CLI::App& app, MixOptions& o) {
  std::string valid;
  for (const char* n : {"DmFm", "BgFgFm", "PIT", "Classwise", "GroupPIT", "FUSS"}) {
    valid += valid.empty() ? n : std::string(", ") + n;
  }
  app.add_option("--scheme", o.scheme, "Task scheme: " + valid);
  app.add_option("--clips", o.clips, "Number of clips");
  app.add_option("--seed", o.seed, "Base seed; clip i uses seed + i");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--duration", o.spec.duration, "Clip duration in seconds");
  app.add_option("--min-events", o.spec.event_count.min, "Minimum foreground events");
  app.add_option("--max-events", o.spec.event_count.max, "Maximum foreground events");
  app.add_option("--min-fuss", o.spec.fuss_sources.min, "Minimum FUSS sources");
  app.add_option("--max-fuss", o.spec.fuss_sources.max, "Maximum FUSS sources");
  app.add_option("--snr-min", o.spec.snr_db.min, "Minimum event SNR (dB)");
  app.add_option("--snr-max", o.spec.snr_db.max, "Maximum event SNR (dB)");
  app.add_option("--fuss-probability", o.spec.fuss_probability,
                 "Probability of a FUSS component in DESED+FUSS clips");
  app.add_option("--bank", o.bank, "Source bank directory (default: procedural bank)");
  app.add_option("--rir", o.rir, "Directory of impulse-response WAVs");
  app.add_option("--workers", o.workers, "Worker threads");
}

int run_mix(const CLI::App& app, MixOptions& o, std::ostream& out) {
  const TaskScheme scheme = scheme_by_name(o.scheme);
  o.spec.seed = o.seed;
  if (!o.rir.empty()) {
    if (!fs::is_directory(o.rir)) raise(errc::kMissingFile, "missing directory " + o.rir);
    std::vector<fs::path> irs;
    for (const auto& e : fs::directory_iterator(o.rir)) {
      if (e.path().extension() == ".wav") irs.push_back(e.path());
    }
    std::sort(irs.begin(), irs.end());
    for (const auto& p : irs) o.spec.impulse_responses.push_back(read_wav(p));
  }
  o.spec.validate(scheme);
  std::unique_ptr<SourceBank> bank;
  if (o.bank.empty()) {
    bank = std::make_unique<ProceduralBank>();
  } else {
    bank = std::make_unique<WavDirectoryBank>(o.bank, o.spec.class_inventory);
  }

  std::vector<GeneratedClip> clips(o.clips);
  parallel_for(o.clips, o.workers, [&](std::size_t i) { clips[i] = generate_clip(o.spec, scheme, *bank, i); });
  ensure_dir(o.out);
  export_dataset(clips, scheme, o.spec, o.out);
  write_text_file(fs::path(o.out) / "config.json", resolved_config(app));
  out << "generated " << clips.size() << " clips (scheme " << scheme.name << ", seed " << o.seed
      << ") in " << o.out << "\n";
  return 0;
}

// ---------------------------------------------------------------- separate

struct SeparateOptions {
  std::string dataset;
  std::string oracle = "irm";
  std::string estimates;
  std::string out = "separated";
  std::size_t window = 512;
  std::size_t hop = 128;
  std::size_t workers = default_workers();
};

void add_separate(CLI::App& app, SeparateOptions& o) {
  app.add_option("--dataset", o.dataset, "Dataset directory with manifest.json")->required();
  app.add_option("--oracle", o.oracle, "irm, ibm or external");
  app.add_option("--estimates", o.estimates,
                 "External mode: directory with a manifest.json of separated sources");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--window", o.window, "STFT window length (samples)");
  app.add_option("--hop", o.hop, "STFT hop (samples)");
  app.add_option("--workers", o.workers, "Worker threads");
}

int run_separate(const CLI::App& app, const SeparateOptions& o, std::ostream& out) {
  if (o.oracle != "irm" && o.oracle != "ibm" && o.oracle != "external") {
    raise(errc::kBadConfig, "--oracle must be irm, ibm or external");
  }
  if (o.oracle == "external" && o.estimates.empty()) {
    raise(errc::kBadConfig, "--oracle external needs --estimates");
  }
  const fs::path dataset(o.dataset);
  const DatasetManifest refs = load_manifest(dataset);
  std::optional<TaskScheme> scheme;
  try {
    scheme = scheme_by_name(refs.scheme);
  } catch (const Error&) {
  }
  std::map<std::string, DatasetManifest::Clip> external;
  if (o.oracle == "external") {
    for (auto& c : load_manifest(o.estimates).clips) external.emplace(c.clip_id, c);
  }
  const StftConfig stft_cfg{o.window, o.hop};
  validate(stft_cfg);
  const fs::path out_dir(o.out);
  ensure_dir(out_dir / "sources");

  const std::size_t n = refs.clips.size();
  std::vector<DatasetManifest::Clip> written(n);
  std::vector<ClipScore> scores(n);
  parallel_for(n, o.workers, [&](std::size_t i) {
    const auto& c = refs.clips[i];
    const LoadedClip ref = load_clip(dataset, c, scheme);
    SourceSet est;
    if (o.oracle == "irm") {
      est = oracle_irm(ref.sources, ref.mixture, stft_cfg);
    } else if (o.oracle == "ibm") {
      est = oracle_ibm(ref.sources, ref.mixture, stft_cfg);
    } else {
      const auto it = external.find(c.clip_id);
      if (it == external.end()) raise(errc::kMissingFile, "no external estimate for " + c.clip_id);
      LoadedClip e = load_clip(o.estimates, it->second, scheme);
      assert_compatible(e.mixture, ref.mixture);
      if (e.sources.size() != ref.sources.size()) {
        raise(errc::kShapeMismatch, c.clip_id + ": estimate has " + std::to_string(e.sources.size()) +
                                        " slots, references have " + std::to_string(ref.sources.size()));
      }
      est = std::move(e.sources);
    }
    scores[i] = score_clip(c.clip_id, est, ref.sources, ref.mixture);
    const auto mixture_path = fs::relative(fs::absolute(dataset / c.mixture), fs::absolute(out_dir));
    written[i] = write_sources(out_dir, c.clip_id, mixture_path.generic_string(), est);
  });

  DatasetManifest m = refs;
  m.clips = std::move(written);
  write_text_file(out_dir / "manifest.json", manifest_to_json(m));
  write_text_file(out_dir / "si_snr.tsv", format_clip_scores(scores));
  write_text_file(out_dir / "config.json", resolved_config(app));
  const auto summary = aggregate_scores(scores);
  out << "separated " << n << " clips (" << o.oracle << "): MSi " << describe(summary.msi)
      << ", 1S " << describe(summary.one_s) << "\n";
  return 0;
}

// ---------------------------------------------------------------- eval-ss

struct EvalSsOptions {
  std::string estimates;
  std::string references;
  std::string out;
  bool pit = true;
  bool remap = false;
  std::size_t workers = default_workers();
};

void add_eval_ss(CLI::App& app, EvalSsOptions& o) {
  app.add_option("--estimates", o.estimates, "Directory with the estimates manifest.json")->required();
  app.add_option("--references", o.references, "Dataset directory with manifest.json")->required();
  app.add_option("--out", o.out, "Output directory for ss_report.json and ss_per_clip.tsv");
  app.add_flag("--pit,!--no-pit", o.pit, "Align estimates with the scheme's permutation groups");
  app.add_flag("--remap", o.remap, "Sum slots per scheme group before scoring");
  app.add_option("--workers", o.workers, "Worker threads");
}

int run_eval_ss(const CLI::App& app, const EvalSsOptions& o, std::ostream& out) {
  const DatasetManifest refs = load_manifest(o.references);
  const DatasetManifest ests = load_manifest(o.estimates);
  const TaskScheme scheme = scheme_by_name(refs.scheme);

  std::map<std::string, const DatasetManifest::Clip*> est_by_id;
  for (const auto& c : ests.clips) est_by_id.emplace(c.clip_id, &c);
  for (const auto& c : refs.clips) {
    if (!est_by_id.count(c.clip_id)) {
      raise(errc::kMalformedManifest, "reference clip " + c.clip_id + " has no estimate in " + o.estimates);
    }
  }
  if (est_by_id.size() != refs.clips.size()) {
    raise(errc::kMalformedManifest, "estimate and reference clip sets differ");
  }

  std::vector<ClipScore> scores(refs.clips.size());
  parallel_for(refs.clips.size(), o.workers, [&](std::size_t i) {
    const auto& rc = refs.clips[i];
    const LoadedClip ref = load_clip(o.references, rc, scheme);
    LoadedClip est = load_clip(o.estimates, *est_by_id.at(rc.clip_id), scheme);
    assert_compatible(est.mixture, ref.mixture);
    SourceSet e = est.sources;
    SourceSet r = ref.sources;
    if (o.pit) {
      const auto assignment = pit_assign(e, r, ref.mixture, scheme);
      SourceSet aligned = e;
      for (std::size_t k = 0; k < r.size(); ++k) {
        aligned.slots[k] = e.slots[assignment.assignment[k]];
        aligned.active[k] = e.active[assignment.assignment[k]];
      }
      e = std::move(aligned);
    }
    if (o.remap) {
      e = remap_slots(e, scheme);
      r = remap_slots(r, scheme);
    }
    scores[i] = score_clip(rc.clip_id, e, r, ref.mixture);
  });

  const auto summary = aggregate_scores(scores);
  const std::string json = separation_json(summary, scores.size());
  if (!o.out.empty()) {
    ensure_dir(o.out);
    write_text_file(fs::path(o.out) / "ss_report.json", json);
    write_text_file(fs::path(o.out) / "ss_per_clip.tsv", format_clip_scores(scores));
    write_text_file(fs::path(o.out) / "config.json", resolved_config(app));
    out << "MSi " << describe(summary.msi) << " over " << summary.multi_source_clips
        << " multi-source clips; 1S " << describe(summary.one_s) << " over "
        << summary.single_source_clips << " single-source clips\n";
  } else {
    out << json;
  }
  return 0;
}

// ---------------------------------------------------------------- eval-sed

struct EvalSedOptions {
  std::string truth;
  std::string posteriors;
  std::string detections;
  std::string out;
  std::string classes;
  double threshold = 0.5;
  double median_window = kDefaultMedianWindow;
  double clip_duration = 10.0;
  double frame_period = kDefaultFramePeriod;
  std::size_t workers = default_workers();
};

void add_eval_sed(CLI::App& app, EvalSedOptions& o) {
  app.add_option("--truth", o.truth, "Ground-truth TSV")->required();
  app.add_option("--posteriors", o.posteriors, "Directory of per-clip posterior TSVs");
  app.add_option("--detections", o.detections, "Detection TSV (single operating point)");
  app.add_option("--out", o.out, "Output directory for sed_report.json and psds.json");
  app.add_option("--classes", o.classes, "Comma-separated class inventory");
  app.add_option("--threshold", o.threshold, "Decision threshold for F1");
  app.add_option("--median-window", o.median_window, "Median filter window (s)");
  app.add_option("--clip-duration", o.clip_duration, "Clip duration (s)");
  app.add_option("--frame-period", o.frame_period, "Frame period for single-row posteriors (s)");
  app.add_option("--workers", o.workers, "Worker threads");
}

std::vector<PosteriorGrid> read_posterior_dir(const fs::path& dir, double clip_duration,
                                              double frame_period, std::size_t workers) {
  const auto files = tsv_files(dir);
  std::vector<PosteriorGrid> grids(files.size());
  parallel_for(files.size(), workers, [&](std::size_t i) {
    grids[i] = read_posterior_tsv(files[i], clip_duration, frame_period);
  });
  return grids;
}

int run_eval_sed(const CLI::App& app, const EvalSedOptions& o, std::ostream& out) {
  if (o.posteriors.empty() == o.detections.empty()) {
    raise(errc::kUsage, "give exactly one of --posteriors or --detections");
  }
  const EventSet truth = read_events_tsv(o.truth, o.clip_duration);
  std::vector<std::string> classes = split_list(o.classes);

  EventSet at_threshold;
  std::vector<DetectionsAtThreshold> ops;
  std::set<std::string> clip_ids;
  for (const auto& [id, _] : truth) clip_ids.insert(id);

  if (!o.posteriors.empty()) {
    const auto grids = read_posterior_dir(o.posteriors, o.clip_duration, o.frame_period, o.workers);
    if (classes.empty() && !grids.empty()) classes = grids.front().class_names;
    for (const auto& g : grids) {
      if (g.class_names != classes) {
        raise(errc::kShapeMismatch, g.clip_id + ": posterior classes differ from the inventory");
      }
      clip_ids.insert(g.clip_id);
      at_threshold[g.clip_id] = decode_events(g, o.threshold, o.median_window);
    }
    const PsdsParams params;
    ops.resize(params.thresholds.size());
    parallel_for(ops.size(), o.workers, [&](std::size_t k) {
      ops[k].threshold = params.thresholds[k];
      for (const auto& g : grids) {
        ops[k].detections[g.clip_id] = decode_events(g, params.thresholds[k], o.median_window);
      }
    });
  } else {
    at_threshold = read_events_tsv(o.detections, o.clip_duration);
    for (const auto& [id, _] : at_threshold) clip_ids.insert(id);
    ops.push_back({o.threshold, at_threshold});
  }
  if (classes.empty()) classes = desed_classes();

  const F1Report f1 = collar_f1(at_threshold, truth, classes);
  const double dataset_duration = static_cast<double>(clip_ids.size()) * o.clip_duration;
  const PsdsReport ps = psds(ops, truth, classes, PsdsParams{}, dataset_duration);

  Json j;
  j["f1_macro"] = round6(f1.macro_f1);
  j["threshold"] = round6(o.threshold);
  j["per_class"] = Json::object();
  for (const auto& [cls, c] : f1.per_class) {
    j["per_class"][cls] = {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"f1", round6(c.f1())}};
  }
  j["psds"] = round6(ps.psds);
  j["operating_points"] = ps.per_op.size();
  const std::string report = j.dump(2) + "\n";

  if (o.out.empty()) {
    out << report;
    return 0;
  }
  ensure_dir(o.out);
  write_text_file(fs::path(o.out) / "sed_report.json", report);
  write_text_file(fs::path(o.out) / "psds.json", psds_report_json(ps));
  write_text_file(fs::path(o.out) / "config.json", resolved_config(app));
  out << "class                          tp     fp     fn     f1\n";
  for (const auto& [cls, c] : f1.per_class) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-28s %6zu %6zu %6zu  %s\n", cls.c_str(), c.tp, c.fp, c.fn,
                  format_number(c.f1()).c_str());
    out << line;
  }
  out << "macro F1 " << format_number(f1.macro_f1) << "  PSDS " << format_number(ps.psds) << "\n";
  return 0;
}

// ---------------------------------------------------------------- fuse / sweep

struct FuseOptions {
  std::string mixture;
  std::string sources;
  std::string out;
  std::string p = "2";
  std::string q = "2";
  std::string truth;
  std::string gnuplot;
  bool with_psds = false;
  double threshold = 0.5;
  double median_window = kDefaultMedianWindow;
  double clip_duration = 10.0;
  double frame_period = kDefaultFramePeriod;
  std::size_t workers = default_workers();
};

void add_fusion_inputs(CLI::App& app, FuseOptions& o) {
  app.add_option("--mixture", o.mixture, "Directory of mixture posterior TSVs")->required();
  app.add_option("--sources", o.sources, "Comma-separated per-source posterior directories")->required();
  app.add_option("--clip-duration", o.clip_duration, "Clip duration (s)");
  app.add_option("--frame-period", o.frame_period, "Frame period for single-row posteriors (s)");
  app.add_option("--workers", o.workers, "Worker threads");
}

std::vector<ClipPosteriors> load_fusion_inputs(const FuseOptions& o) {
  const auto mixture = read_posterior_dir(o.mixture, o.clip_duration, o.frame_period, o.workers);
  const auto dirs = split_list(o.sources);
  if (dirs.empty()) raise(errc::kUsage, "--sources needs at least one directory");
  std::vector<ClipPosteriors> clips(mixture.size());
  parallel_for(mixture.size(), o.workers, [&](std::size_t i) {
    clips[i].mixture = mixture[i];
    for (const auto& d : dirs) {
      const fs::path p = fs::path(d) / (mixture[i].clip_id + ".tsv");
      if (!fs::exists(p)) raise(errc::kMissingFile, "missing source posteriors " + p.string());
      clips[i].sources.push_back(read_posterior_tsv(p, o.clip_duration, o.frame_period));
    }
  });
  return clips;
}

std::vector<PowerWeight> parse_weights(const std::string& s) {
  std::vector<PowerWeight> out;
  for (const auto& item : split_list(s)) out.push_back(PowerWeight::parse(item));
  if (out.empty()) raise(errc::kBadConfig, "empty weight list");
  return out;
}

int run_fuse(const CLI::App& app, const FuseOptions& o, std::ostream& out) {
  const auto p = PowerWeight::parse(o.p);
  const auto q = PowerWeight::parse(o.q);
  const auto clips = load_fusion_inputs(o);
  ensure_dir(o.out);
  parallel_for(clips.size(), o.workers, [&](std::size_t i) {
    const auto fused = late_integration(clips[i].mixture, clips[i].sources, p, q);
    write_posterior_tsv(fused, fs::path(o.out) / (fused.clip_id + ".tsv"));
  });
  write_text_file(fs::path(o.out) / "config.json", resolved_config(app));
  out << "fused " << clips.size() << " clips with p=" << p.to_string() << " q=" << q.to_string()
      << " into " << o.out << "\n";
  return 0;
}

int run_sweep(const CLI::App& app, const FuseOptions& o, std::ostream& out) {
  const auto ps = parse_weights(o.p);
  const auto qs = parse_weights(o.q);
  const auto clips = load_fusion_inputs(o);
  const EventSet truth = read_events_tsv(o.truth, o.clip_duration);
  SweepConfig cfg;
  cfg.threshold = o.threshold;
  cfg.median_window = o.median_window;
  cfg.with_psds = o.with_psds;
  const SweepTable table = sweep_pq(clips, truth, ps, qs, cfg);
  write_text_file(o.out, format_sweep_tsv(table));
  if (!o.gnuplot.empty()) write_text_file(o.gnuplot, format_sweep_gnuplot(table));
  write_text_file(fs::path(o.out).replace_extension(".config.json"), resolved_config(app));
  const auto& best = table.rows[table.best];
  out << table.rows.size() << " cells; best p=" << best.p.to_string() << " q=" << best.q.to_string()
      << " F1 " << format_number(best.f1_macro);
  if (best.psds) out << " PSDS " << format_number(*best.psds);
  out << "\n";
  return 0;
}

// ---------------------------------------------------------------- oracle-posteriors

struct OraclePosteriorOptions {
  std::string truth;
  std::string out;
  std::string classes;
  double score = 0.9;
  double noise = 0.0;
  std::uint64_t seed = 0;
  double clip_duration = 10.0;
  double frame_period = kDefaultFramePeriod;
};

void add_oracle_posteriors(CLI::App& app, OraclePosteriorOptions& o) {
  app.add_option("--truth", o.truth, "Ground-truth TSV")->required();
  app.add_option("--out", o.out, "Output directory")->required();
  app.add_option("--classes", o.classes, "Comma-separated class inventory");
  app.add_option("--score", o.score, "Score of frames inside events");
  app.add_option("--noise", o.noise, "Uniform noise amplitude");
  app.add_option("--seed", o.seed, "Noise seed; clip i uses seed + i");
  app.add_option("--clip-duration", o.clip_duration, "Clip duration (s)");
  app.add_option("--frame-period", o.frame_period, "Frame period (s)");
}

int run_oracle_posteriors(const CLI::App& app, const OraclePosteriorOptions& o, std::ostream& out) {
  const EventSet truth = read_events_tsv(o.truth, o.clip_duration);
  auto classes = split_list(o.classes);
  if (classes.empty()) classes = desed_classes();
  ensure_dir(o.out);
  std::size_t i = 0;
  for (const auto& [id, events] : truth) {
    const auto grid = oracle_posteriors(events, classes, {o.score, o.noise, o.seed + i++}, o.frame_period);
    write_posterior_tsv(grid, fs::path(o.out) / (id + ".tsv"));
  }
  write_text_file(fs::path(o.out) / "config.json", resolved_config(app));
  out << "wrote posteriors for " << truth.size() << " clips to " << o.out << "\n";
  return 0;
}

// ---------------------------------------------------------------- assemble

struct AssembleOptions {
  std::string mode = "early";
  std::string mixture;
  std::string sources;
  std::string embeddings;
  std::string out;
  std::size_t n_mels = 64;
  std::size_t window = 512;
  std::size_t hop = 128;
};

void add_assemble(CLI::App& app, AssembleOptions& o) {
  app.add_option("--mode", o.mode, "early (log-mel channel stack) or middle (embedding concat)");
  app.add_option("--mixture", o.mixture, "Early: mixture WAV");
  app.add_option("--sources", o.sources, "Early: comma-separated separated-source WAVs");
  app.add_option("--embeddings", o.embeddings,
                 "Middle: comma-separated embedding TSVs, mixture first");
  app.add_option("--out", o.out, "Early: output directory; middle: output TSV")->required();
  app.add_option("--n-mels", o.n_mels, "Mel bands");
  app.add_option("--window", o.window, "STFT window length (samples)");
  app.add_option("--hop", o.hop, "STFT hop (samples)");
}

int run_assemble(const CLI::App&, const AssembleOptions& o, std::ostream& out) {
  if (o.mode == "early") {
    if (o.mixture.empty()) raise(errc::kUsage, "early mode needs --mixture");
    const StftConfig cfg{o.window, o.hop};
    const Matrix mix = logmel_features(read_wav(o.mixture), o.n_mels, cfg);
    std::vector<Matrix> sources;
    std::vector<std::string> names;
    for (const auto& p : split_list(o.sources)) {
      sources.push_back(logmel_features(read_wav(p), o.n_mels, cfg));
      names.push_back(fs::path(p).stem().string());
    }
    const FeatureStack stack = assemble_early(mix, sources, names);
    ensure_dir(o.out);
    Json j;
    j["channels"] = Json::array();
    for (std::size_t c = 0; c < stack.channels.size(); ++c) {
      const std::string file = "channel_" + std::to_string(c) + ".tsv";
      write_text_file(fs::path(o.out) / file, format_matrix_tsv(stack.channels[c]));
      j["channels"].push_back({{"file", file}, {"source", stack.provenance[c]}});
    }
    j["frames"] = mix.rows;
    j["n_mels"] = mix.cols;
    write_text_file(fs::path(o.out) / "stack.json", j.dump(2) + "\n");
    out << "stacked " << stack.channels.size() << " channels of " << mix.rows << "x" << mix.cols
        << " into " << o.out << "\n";
    return 0;
  }
  if (o.mode == "middle") {
    std::vector<Matrix> blocks;
    for (const auto& p : split_list(o.embeddings)) blocks.push_back(parse_matrix_tsv(read_text_file(p), p));
    const Matrix joined = assemble_middle(blocks);
    write_text_file(o.out, format_matrix_tsv(joined));
    out << "concatenated " << blocks.size() << " embeddings into " << joined.rows << "x" << joined.cols
        << "\n";
    return 0;
  }
  raise(errc::kBadConfig, "--mode must be early or middle");
}

std::string top_usage() {
  std::string s = "usage: sedsep <command> [--config file.json] [options]\n\ncommands:\n";
  for (const char* c : kSubcommands) s += std::string("  ") + c + "\n";
  s += "\nRun `sedsep <command> --help` for the options of a command.\n";
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    (args.empty() ? err : out) << top_usage();
    return args.empty() ? 2 : 0;
  }
  const std::string command = args[0];
  CLI::App app("sedsep " + command, "sedsep " + command);
  app.option_defaults()->take_last()->always_capture_default();

  MixOptions mix;
  SeparateOptions separate;
  EvalSsOptions eval_ss;
  EvalSedOptions eval_sed;
  FuseOptions fuse;
  OraclePosteriorOptions oracle;
  AssembleOptions assemble;
  std::function<int()> action;

  if (command == "mix") {
    add_mix(app, mix);
    action = [&] { return run_mix(app, mix, out); };
  } else if (command == "separate") {
    add_separate(app, separate);
    action = [&] { return run_separate(app, separate, out); };
  } else if (command == "eval-ss") {
    add_eval_ss(app, eval_ss);
    action = [&] { return run_eval_ss(app, eval_ss, out); };
  } else if (command == "eval-sed") {
    add_eval_sed(app, eval_sed);
    action = [&] { return run_eval_sed(app, eval_sed, out); };
  } else if (command == "fuse") {
    add_fusion_inputs(app, fuse);
    app.add_option("--p", fuse.p, "Source combination weight (number or max)");
    app.add_option("--q", fuse.q, "Source/mixture combination weight (number or max)");
    app.add_option("--out", fuse.out, "Output directory")->required();
    action = [&] { return run_fuse(app, fuse, out); };
  } else if (command == "sweep") {
    add_fusion_inputs(app, fuse);
    fuse.p = "0.5,1,2,4,max";
    fuse.q = "0.5,1,2,4,max";
    fuse.out = "sweep.tsv";
    app.add_option("--p", fuse.p, "Comma-separated p values");
    app.add_option("--q", fuse.q, "Comma-separated q values");
    app.add_option("--truth", fuse.truth, "Ground-truth TSV")->required();
    app.add_option("--out", fuse.out, "Output table TSV");
    app.add_option("--gnuplot", fuse.gnuplot, "Optional gnuplot grid file");
    app.add_flag("--psds", fuse.with_psds, "Also compute PSDS per cell");
    app.add_option("--threshold", fuse.threshold, "Decision threshold for F1");
    app.add_option("--median-window", fuse.median_window, "Median filter window (s)");
    action = [&] { return run_sweep(app, fuse, out); };
  } else if (command == "oracle-posteriors") {
    add_oracle_posteriors(app, oracle);
    action = [&] { return run_oracle_posteriors(app, oracle, out); };
  } else if (command == "assemble") {
    add_assemble(app, assemble);
    action = [&] { return run_assemble(app, assemble, out); };
  } else {
    err << "error[" << errc::kUsage << "]: unknown command '" << command << "'\n" << top_usage();
    return 2;
  }

  try {
    std::vector<std::string> rest(args.begin() + 1, args.end());
    auto expanded = expand_config(rest, long_names(app));
    std::reverse(expanded.begin(), expanded.end());
    app.parse(expanded);
    return action();
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error[" << errc::kUsage << "]: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error[" << e.code() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error[Internal]: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace sedsep::cli
