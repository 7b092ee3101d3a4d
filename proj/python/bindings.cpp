#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sedsep/cli.hpp"
#include "sedsep/dsp.hpp"
#include "sedsep/error.hpp"
#include "sedsep/fusion.hpp"
#include "sedsep/oracle_separation.hpp"
#include "sedsep/sed_eval.hpp"
#include "sedsep/soundscape.hpp"
#include "sedsep/ss_metrics.hpp"

namespace py = pybind11;
using namespace sedsep;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Waveform to_waveform(const Array& a, int sr) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-D signal");
  return Waveform(std::vector<double>(a.data(), a.data() + a.size()), sr);
}

Array to_array(const Waveform& w) {
  Array out(static_cast<py::ssize_t>(w.size()));
  std::copy(w.data().begin(), w.data().end(), out.mutable_data());
  return out;
}

// Rows of a 2-D array as slots; all-zero rows are inactive.
SourceSet to_sources(const Array& a, int sr) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D (slots, samples) array");
  const auto m = static_cast<std::size_t>(a.shape(0));
  const auto n = static_cast<std::size_t>(a.shape(1));
  SourceSet s = SourceSet::zeros(m, n, sr);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> x(a.data() + i * n, a.data() + (i + 1) * n);
    s.active[i] = std::any_of(x.begin(), x.end(), [](double v) { return v != 0.0; });
    s.slots[i] = Waveform(std::move(x), sr);
  }
  return s;
}

Array to_array(const SourceSet& s) {
  Array out({static_cast<py::ssize_t>(s.size()), static_cast<py::ssize_t>(s.length())});
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::copy(s.slots[i].data().begin(), s.slots[i].data().end(), out.mutable_data() + i * s.length());
  }
  return out;
}

PosteriorGrid to_grid(const Array& a, double frame_period, std::vector<std::string> classes) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D (frames, classes) array");
  PosteriorGrid p;
  p.scores = Matrix(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), p.scores.values.begin());
  p.frame_period = frame_period;
  if (classes.empty()) {
    for (std::size_t c = 0; c < p.scores.cols; ++c) classes.push_back("class_" + std::to_string(c));
  }
  p.class_names = std::move(classes);
  p.clip_duration = frame_period * static_cast<double>(p.scores.rows);
  return p;
}

Array to_array(const Matrix& m) {
  Array out({static_cast<py::ssize_t>(m.rows), static_cast<py::ssize_t>(m.cols)});
  std::copy(m.values.begin(), m.values.end(), out.mutable_data());
  return out;
}

PowerWeight weight(const py::object& o) {
  if (py::isinstance<py::str>(o)) return PowerWeight::parse(o.cast<std::string>());
  return PowerWeight{o.cast<double>()};
}

using EventTuple = std::tuple<double, double, std::string>;
using EventDict = std::map<std::string, std::vector<EventTuple>>;

EventSet to_events(const EventDict& d, double clip_duration) {
  EventSet s;
  for (const auto& [clip, events] : d) {
    EventList l{clip, clip_duration, {}};
    for (const auto& [on, off, label] : events) l.events.push_back({on, off, label});
    s[clip] = std::move(l);
  }
  return s;
}

std::vector<EventTuple> to_tuples(const EventList& l) {
  std::vector<EventTuple> out;
  for (const auto& e : l.events) out.emplace_back(e.onset, e.offset, e.label);
  return out;
}

}  // namespace

PYBIND11_MODULE(_sedsep, m) {
  m.doc() = "Sound separation and sound event detection toolkit";

  static py::exception<Error> sedsep_error(m, "SedsepError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(sedsep_error, (std::string("[") + e.code() + "] " + e.what()).c_str());
    }
  });

  m.def(
      "stft",
      [](const Array& x, std::size_t window, std::size_t hop, int sr) {
        const auto g = stft(to_waveform(x, sr), {window, hop});
        py::array_t<std::complex<double>> out({static_cast<py::ssize_t>(g.frames), static_cast<py::ssize_t>(g.bins)});
        std::copy(g.values.begin(), g.values.end(), out.mutable_data());
        return out;
      },
      py::arg("x"), py::arg("window") = 512, py::arg("hop") = 128, py::arg("sample_rate") = 16000);

  m.def(
      "istft",
      [](const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& spec,
         std::size_t length, std::size_t window, std::size_t hop, int sr) {
        if (spec.ndim() != 2) throw py::value_error("expected a 2-D (frames, bins) array");
        StftGrid g;
        g.frames = static_cast<std::size_t>(spec.shape(0));
        g.bins = static_cast<std::size_t>(spec.shape(1));
        g.window_length = window;
        g.hop = hop;
        g.sample_rate = sr;
        g.values.assign(spec.data(), spec.data() + spec.size());
        return to_array(istft(g, length));
      },
      py::arg("spec"), py::arg("length"), py::arg("window") = 512, py::arg("hop") = 128,
      py::arg("sample_rate") = 16000);

  m.def(
      "oracle_separate",
      [](const Array& refs, const Array& mixture, const std::string& mask, std::size_t window, std::size_t hop,
         int sr) {
        const auto r = to_sources(refs, sr);
        const auto x = to_waveform(mixture, sr);
        if (mask == "irm") return to_array(oracle_irm(r, x, {window, hop}));
        if (mask == "ibm") return to_array(oracle_ibm(r, x, {window, hop}));
        throw py::value_error("mask must be 'irm' or 'ibm'");
      },
      py::arg("references"), py::arg("mixture"), py::arg("mask") = "irm", py::arg("window") = 512,
      py::arg("hop") = 128, py::arg("sample_rate") = 16000,
      "Oracle mask separation; references is (slots, samples), all-zero rows are inactive.");

  m.def(
      "mixture_consistency",
      [](const Array& est, const Array& mixture) {
        const auto s = to_sources(est, kCanonicalSampleRate);
        const auto out = mixture_consistency(s.slots, to_waveform(mixture, kCanonicalSampleRate));
        SourceSet r = s;
        r.slots = out;
        return to_array(r);
      },
      py::arg("estimates"), py::arg("mixture"));

  m.def(
      "si_snr", [](const Array& est, const Array& ref) { return si_snr(to_waveform(est, 16000), to_waveform(ref, 16000)); },
      py::arg("estimate"), py::arg("reference"));
  m.def(
      "si_snr_improvement",
      [](const Array& est, const Array& ref, const Array& mix) {
        return si_snr_improvement(to_waveform(est, 16000), to_waveform(ref, 16000), to_waveform(mix, 16000));
      },
      py::arg("estimate"), py::arg("reference"), py::arg("mixture"));
  m.def(
      "loss_active",
      [](const Array& est, const Array& ref) {
        return stabilized_snr_loss_active(to_waveform(est, 16000), to_waveform(ref, 16000));
      },
      py::arg("estimate"), py::arg("reference"));
  m.def(
      "loss_inactive",
      [](const Array& est, const Array& mix) {
        return stabilized_snr_loss_inactive(to_waveform(est, 16000), to_waveform(mix, 16000));
      },
      py::arg("estimate"), py::arg("mixture"));

  m.def(
      "pit_assign",
      [](const std::vector<std::vector<double>>& loss, const std::vector<std::vector<std::size_t>>& groups) {
        const auto r = pit_assign(loss, groups);
        return py::make_tuple(r.assignment, r.total_loss);
      },
      py::arg("loss"), py::arg("groups"),
      "Returns (assignment, total_loss) with assignment[r] the estimate matched to reference r.");

  m.def(
      "combine_sources",
      [](const std::vector<Array>& sources, const py::object& p) {
        std::vector<PosteriorGrid> grids;
        for (const auto& s : sources) grids.push_back(to_grid(s, kDefaultFramePeriod, {}));
        return to_array(combine_sources(grids, weight(p)).scores);
      },
      py::arg("sources"), py::arg("p"));
  m.def(
      "combine_with_mixture",
      [](const Array& mixture, const Array& sources, const py::object& q) {
        return to_array(combine_with_mixture(to_grid(mixture, kDefaultFramePeriod, {}),
                                             to_grid(sources, kDefaultFramePeriod, {}), weight(q))
                            .scores);
      },
      py::arg("mixture"), py::arg("sources"), py::arg("q"));
  m.def(
      "late_integration",
      [](const Array& mixture, const std::vector<Array>& sources, const py::object& p, const py::object& q) {
        std::vector<PosteriorGrid> grids;
        for (const auto& s : sources) grids.push_back(to_grid(s, kDefaultFramePeriod, {}));
        return to_array(late_integration(to_grid(mixture, kDefaultFramePeriod, {}), grids, weight(p), weight(q)).scores);
      },
      py::arg("mixture"), py::arg("sources"), py::arg("p") = 2.0, py::arg("q") = 2.0);

  m.def(
      "decode_events",
      [](const Array& scores, const std::vector<std::string>& classes, double threshold, double median_window,
         double frame_period) {
        return to_tuples(decode_events(to_grid(scores, frame_period, classes), threshold, median_window));
      },
      py::arg("scores"), py::arg("classes"), py::arg("threshold") = 0.5,
      py::arg("median_window") = kDefaultMedianWindow, py::arg("frame_period") = kDefaultFramePeriod);

  m.def(
      "collar_f1",
      [](const EventDict& det, const EventDict& truth, const std::vector<std::string>& classes) {
        const auto r = collar_f1(to_events(det, 10.0), to_events(truth, 10.0), classes);
        py::dict per_class;
        for (const auto& [c, k] : r.per_class) {
          per_class[py::str(c)] = py::dict(py::arg("tp") = k.tp, py::arg("fp") = k.fp, py::arg("fn") = k.fn,
                                           py::arg("f1") = k.f1());
        }
        return py::make_tuple(r.macro_f1, per_class);
      },
      py::arg("detections"), py::arg("truth"), py::arg("classes"),
      "Returns (macro_f1, per_class). Events are {clip: [(onset, offset, label), ...]}.");

  m.def(
      "psds",
      [](const std::vector<std::pair<double, EventDict>>& ops, const EventDict& truth,
         const std::vector<std::string>& classes, double dataset_duration) {
        std::vector<DetectionsAtThreshold> d;
        for (const auto& [t, ev] : ops) d.push_back({t, to_events(ev, 10.0)});
        return psds(d, to_events(truth, 10.0), classes, PsdsParams{}, dataset_duration).psds;
      },
      py::arg("operating_points"), py::arg("truth"), py::arg("classes"), py::arg("dataset_duration"));

  m.def(
      "oracle_posteriors",
      [](const std::vector<EventTuple>& truth, const std::vector<std::string>& classes, double clip_duration,
         double score, double noise, std::uint64_t seed, double frame_period) {
        EventList l{"clip", clip_duration, {}};
        for (const auto& [on, off, label] : truth) l.events.push_back({on, off, label});
        return to_array(oracle_posteriors(l, classes, {score, noise, seed}, frame_period).scores);
      },
      py::arg("truth"), py::arg("classes"), py::arg("clip_duration") = 10.0, py::arg("score") = 0.9,
      py::arg("noise") = 0.0, py::arg("seed") = 0, py::arg("frame_period") = kDefaultFramePeriod);

  m.def(
      "generate_clip",
      [](const std::string& scheme_name, std::uint64_t seed, std::size_t index, double duration) {
        MixSpec spec;
        spec.seed = seed;
        spec.duration = duration;
        const auto scheme = scheme_by_name(scheme_name);
        const auto clip = generate_clip(spec, scheme, ProceduralBank{}, index);
        py::dict d;
        d["clip_id"] = clip.clip_id;
        d["mixture"] = to_array(clip.mixture);
        d["references"] = to_array(clip.refs);
        d["labels"] = clip.refs.labels;
        d["active"] = clip.refs.active;
        d["events"] = to_tuples(clip.truth);
        return d;
      },
      py::arg("scheme"), py::arg("seed") = 0, py::arg("index") = 0, py::arg("duration") = 10.0);

  m.def("scheme_names", [] {
    std::vector<std::string> out;
    for (auto n : scheme_names()) out.emplace_back(n);
    return out;
  });
  m.def("desed_classes", [] { return desed_classes(); });

  m.def(
      "read_wav",
      [](const std::string& path) {
        const auto w = read_wav(path);
        return py::make_tuple(to_array(w), w.sample_rate());
      },
      py::arg("path"));
  m.def(
      "write_wav",
      [](const std::string& path, const Array& x, int sr, bool float32) {
        return write_wav(to_waveform(x, sr), path, float32 ? SampleFormat::kFloat32 : SampleFormat::kPcm16)
            .clipped_samples;
      },
      py::arg("path"), py::arg("x"), py::arg("sample_rate") = 16000, py::arg("float32") = false);

  m.def(
      "logmel",
      [](const Array& x, std::size_t n_mels, int sr) { return to_array(logmel_features(to_waveform(x, sr), n_mels)); },
      py::arg("x"), py::arg("n_mels") = 64, py::arg("sample_rate") = 16000);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a sedsep subcommand; returns (exit_code, stdout, stderr).");
}
