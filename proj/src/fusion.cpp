#include "sedsep/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sedsep/error.hpp"
#include "sedsep/text_io.hpp"

namespace sedsep {

namespace {

void check_same_shape(const PosteriorGrid& a, const PosteriorGrid& b) {
  if (!a.scores.same_shape(b.scores) || a.class_names != b.class_names ||
      std::abs(a.frame_period - b.frame_period) > 1e-9) {
    raise(errc::kShapeMismatch, "posterior grids differ in shape, classes or frame period (" +
                                    a.clip_id + " vs " + b.clip_id + ")");
  }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

PowerWeight PowerWeight::parse(const std::string& text) {
  if (text == "max" || text == "inf") return max();
  const auto v = parse_double(text);
  if (!v || !std::isfinite(*v) || *v <= 0.0) {
    raise(errc::kBadConfig, "power weight '" + text + "' must be a positive number or 'max'");
  }
  return {*v};
}

std::string PowerWeight::to_string() const { return is_max() ? "max" : format_number(value); }

PosteriorGrid combine_sources(const std::vector<PosteriorGrid>& sources, PowerWeight p) {
  if (!(p.value > 0.0) || std::isnan(p.value)) {
    raise(errc::kBadP, "p must be positive, got " + format_number(p.value));
  }
  if (sources.empty()) raise(errc::kShapeMismatch, "no per-source posteriors to combine");
  for (const auto& s : sources) check_same_shape(sources.front(), s);

  PosteriorGrid out = sources.front();
  const double n = static_cast<double>(sources.size());
  for (std::size_t i = 0; i < out.scores.values.size(); ++i) {
    if (p.is_max()) {
      double m = 0.0;
      for (const auto& s : sources) m = std::max(m, s.scores.values[i]);
      out.scores.values[i] = m;
    } else if (p.value == 1.0) {
      double sum = 0.0;
      for (const auto& s : sources) sum += s.scores.values[i];
      out.scores.values[i] = sum / n;
    } else {
      double sum = 0.0;
      for (const auto& s : sources) sum += std::pow(s.scores.values[i], p.value);
      out.scores.values[i] = std::pow(sum / n, 1.0 / p.value);
    }
  }
  return out;
}

PosteriorGrid combine_with_mixture(const PosteriorGrid& mixture, const PosteriorGrid& sources,
                                   PowerWeight q) {
  if (!(q.value > 0.0) || std::isnan(q.value)) {
    raise(errc::kBadQ, "q must be positive, got " + format_number(q.value));
  }
  check_same_shape(mixture, sources);
  PosteriorGrid out = mixture;
  for (std::size_t i = 0; i < out.scores.values.size(); ++i) {
    const double a = mixture.scores.values[i];
    const double b = sources.scores.values[i];
    if (q.is_max()) {
      out.scores.values[i] = std::max(a, b);
    } else if (q.value == 1.0) {
      out.scores.values[i] = (a + b) / 2.0;
    } else {
      out.scores.values[i] =
          std::pow((std::pow(a, q.value) + std::pow(b, q.value)) / 2.0, 1.0 / q.value);
    }
  }
  return out;
}

PosteriorGrid late_integration(const PosteriorGrid& mixture,
                               const std::vector<PosteriorGrid>& sources, PowerWeight p,
                               PowerWeight q) {
  return combine_with_mixture(mixture, combine_sources(sources, p), q);
}

SweepTable sweep_pq(const std::vector<ClipPosteriors>& clips, const EventSet& truth,
                    const std::vector<PowerWeight>& ps, const std::vector<PowerWeight>& qs,
                    const SweepConfig& cfg) {
  if (clips.empty()) raise(errc::kEmptyInput, "sweep needs at least one clip");
  const auto& classes = clips.front().mixture.class_names;
  double dataset_duration = 0.0;
  for (const auto& c : clips) dataset_duration += c.mixture.clip_duration;

  SweepTable table;
  for (const auto& p : ps) {
    for (const auto& q : qs) {
      std::vector<PosteriorGrid> fused;
      fused.reserve(clips.size());
      for (const auto& c : clips) fused.push_back(late_integration(c.mixture, c.sources, p, q));

      EventSet detections;
      for (const auto& g : fused) detections[g.clip_id] = decode_events(g, cfg.threshold, cfg.median_window);
      SweepRow row{p, q, collar_f1(detections, truth, classes, cfg.collars).macro_f1, std::nullopt};

      if (cfg.with_psds) {
        std::vector<DetectionsAtThreshold> ops;
        for (double t : cfg.psds.thresholds) {
          DetectionsAtThreshold op{t, {}};
          for (const auto& g : fused) op.detections[g.clip_id] = decode_events(g, t, cfg.median_window);
          ops.push_back(std::move(op));
        }
        row.psds = psds(ops, truth, classes, cfg.psds, dataset_duration).psds;
      }
      table.rows.push_back(row);
    }
  }
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const auto& b = table.rows[table.best];
    if (r.f1_macro > b.f1_macro ||
        (r.f1_macro == b.f1_macro && r.psds.value_or(0.0) > b.psds.value_or(0.0))) {
      table.best = i;
    }
  }
  return table;
}

std::string format_sweep_tsv(const SweepTable& table) {
  std::string out = "p\tq\tf1_macro\tpsds\n";
  for (const auto& r : table.rows) {
    out += r.p.to_string() + "\t" + r.q.to_string() + "\t" + format_number(r.f1_macro) + "\t" +
           (r.psds ? format_number(*r.psds) : std::string("nan")) + "\n";
  }
  return out;
}

std::string format_sweep_gnuplot(const SweepTable& table) {
  double largest_q = 1.0;
  for (const auto& r : table.rows) {
    if (!r.q.is_max()) largest_q = std::max(largest_q, r.q.value);
  }
  std::string out = "# q f1_macro psds (q=max plotted at " + format_number(2.0 * largest_q) + ")\n";
  std::string current_p;
  for (const auto& r : table.rows) {
    const std::string p = r.p.to_string();
    if (p != current_p) {
      if (!current_p.empty()) out += "\n\n";
      out += "# p=" + p + "\n";
      current_p = p;
    }
    const double q = r.q.is_max() ? 2.0 * largest_q : r.q.value;
    out += format_number(q) + " " + format_number(r.f1_macro) + " " +
           (r.psds ? format_number(*r.psds) : std::string("nan")) + "\n";
  }
  return out;
}

FeatureStack assemble_early(const Matrix& mixture_features, const std::vector<Matrix>& sources,
                            const std::vector<std::string>& source_names) {
  if (!source_names.empty() && source_names.size() != sources.size()) {
    raise(errc::kShapeMismatch, "one provenance label per source required");
  }
  FeatureStack stack;
  stack.channels.push_back(mixture_features);
  stack.provenance.push_back("mixture");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (!sources[i].same_shape(mixture_features)) {
      raise(errc::kShapeMismatch, "source " + std::to_string(i) + " features are " +
                                      std::to_string(sources[i].rows) + "x" +
                                      std::to_string(sources[i].cols) + ", mixture is " +
                                      std::to_string(mixture_features.rows) + "x" +
                                      std::to_string(mixture_features.cols));
    }
    stack.channels.push_back(sources[i]);
    stack.provenance.push_back(source_names.empty() ? "source_" + std::to_string(i)
                                                    : source_names[i]);
  }
  return stack;
}

Matrix assemble_middle(const std::vector<Matrix>& embeddings) {
  if (embeddings.empty()) raise(errc::kShapeMismatch, "no embeddings to concatenate");
  const auto& first = embeddings.front();
  for (const auto& e : embeddings) {
    if (!e.same_shape(first)) raise(errc::kShapeMismatch, "embeddings differ in shape");
  }
  Matrix out(first.rows, first.cols * embeddings.size());
  for (std::size_t t = 0; t < first.rows; ++t) {
    for (std::size_t b = 0; b < embeddings.size(); ++b) {
      const auto row = embeddings[b].row(t);
      std::copy(row.begin(), row.end(), out.row(t).begin() + static_cast<std::ptrdiff_t>(b * first.cols));
    }
  }
  return out;
}

Matrix mel_filterbank(std::size_t n_mels, std::size_t fft_size, int sample_rate) {
  const std::size_t bins = fft_size / 2 + 1;
  Matrix fb(n_mels, bins);
  const double mel_max = hz_to_mel(0.5 * sample_rate);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / static_cast<double>(n_mels + 1));
  }
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double hz = static_cast<double>(k) * sample_rate / static_cast<double>(fft_size);
      double w = 0.0;
      if (hz > lo && hz <= mid) w = (hz - lo) / (mid - lo);
      else if (hz > mid && hz < hi) w = (hi - hz) / (hi - mid);
      fb(m, k) = w;
    }
  }
  return fb;
}

Matrix logmel_features(const Waveform& w, std::size_t n_mels, const StftConfig& stft_cfg) {
  if (n_mels == 0) raise(errc::kBadConfig, "n_mels must be positive");
  if (n_mels > stft_cfg.window_length / 2) {
    raise(errc::kBadConfig, "too many mel bands for window length " +
                                std::to_string(stft_cfg.window_length));
  }
  const StftGrid spec = stft(w, stft_cfg);
  const Matrix fb = mel_filterbank(n_mels, stft_cfg.window_length, w.sample_rate());
  Matrix out(spec.frames, n_mels);
  std::vector<double> power(spec.bins);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t k = 0; k < spec.bins; ++k) power[k] = std::norm(spec.at(t, k));
    for (std::size_t m = 0; m < n_mels; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < spec.bins; ++k) e += fb(m, k) * power[k];
      out(t, m) = std::log(e + kLogMelFloor);
    }
  }
  return out;
}

std::string format_matrix_tsv(const Matrix& m) {
  std::string out;
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (c) out += "\t";
      out += format_number(m(r, c));
    }
    out += "\n";
  }
  return out;
}

Matrix parse_matrix_tsv(const std::string& text, const std::string& source_name) {
  Matrix m;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (m.rows == 0) m.cols = fields.size();
    if (fields.size() != m.cols) {
      raise(errc::kParseError, source_name + ":" + std::to_string(line_no) + ": expected " +
                                   std::to_string(m.cols) + " columns");
    }
    for (const auto& f : fields) {
      const auto v = parse_double(f);
      if (!v) raise(errc::kParseError, source_name + ":" + std::to_string(line_no) + ": bad number '" + f + "'");
      m.values.push_back(*v);
    }
    ++m.rows;
  }
  return m;
}

}  // namespace sedsep
