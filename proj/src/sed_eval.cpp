#include "sedsep/sed_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include "json.hpp"

#include "sedsep/error.hpp"
#include "sedsep/rng.hpp"
#include "sedsep/text_io.hpp"

namespace sedsep {

namespace {

// Absorbs representation error of millisecond-resolution times.
constexpr double kTimeTolerance = 1e-9;

double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

std::size_t class_index(const std::vector<std::string>& classes, const std::string& label,
                        const std::string& context) {
  const auto it = std::find(classes.begin(), classes.end(), label);
  if (it == classes.end()) {
    raise(errc::kUnknownClass, context + ": class '" + label + "' is not in the class inventory");
  }
  return static_cast<std::size_t>(it - classes.begin());
}

std::set<std::string> clip_union(const EventSet& a, const EventSet& b) {
  std::set<std::string> ids;
  for (const auto& [id, _] : a) ids.insert(id);
  for (const auto& [id, _] : b) ids.insert(id);
  return ids;
}

const std::vector<Event>& events_of(const EventSet& s, const std::string& id) {
  static const std::vector<Event> kEmpty;
  const auto it = s.find(id);
  return it == s.end() ? kEmpty : it->second.events;
}

double round6(double v) { return std::stod(format_number(v)); }

}  // namespace

void PosteriorGrid::validate() const {
  if (scores.cols != class_names.size()) {
    raise(errc::kShapeMismatch, clip_id + ": " + std::to_string(scores.cols) + " score columns but " +
                                    std::to_string(class_names.size()) + " class names");
  }
  if (scores.values.size() != scores.rows * scores.cols) {
    raise(errc::kShapeMismatch, clip_id + ": score matrix storage does not match its shape");
  }
  if (!(frame_period > 0.0)) raise(errc::kBadConfig, clip_id + ": frame period must be positive");
  if (!(clip_duration > 0.0)) raise(errc::kBadConfig, clip_id + ": clip duration must be positive");
  for (double v : scores.values) {
    if (!(v >= 0.0 && v <= 1.0)) raise(errc::kBadConfig, clip_id + ": scores must lie in [0, 1]");
  }
  if (static_cast<double>(scores.rows) * frame_period < clip_duration - frame_period - kTimeTolerance) {
    raise(errc::kShapeMismatch, clip_id + ": " + std::to_string(scores.rows) +
                                    " frames do not cover the clip duration " +
                                    format_number(clip_duration) + " s");
  }
}

std::vector<double> PsdsParams::default_thresholds() {
  std::vector<double> t(50);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.01 + 0.98 * static_cast<double>(i) / 49.0;
  return t;
}

void PsdsParams::validate() const {
  for (double rho : {rho_dtc, rho_gtc, rho_cttc}) {
    if (!(rho >= 0.0 && rho <= 1.0)) raise(errc::kBadConfig, "PSDS rho parameters must lie in [0, 1]");
  }
  if (!(e_max > 0.0)) raise(errc::kBadConfig, "e_max must be positive");
  if (!(alpha_ct >= 0.0) || !(alpha_st >= 0.0)) raise(errc::kBadConfig, "PSDS weights must be >= 0");
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1])) {
      raise(errc::kBadConfig, "PSDS thresholds must be strictly increasing");
    }
  }
}

std::size_t median_filter_length(double median_window, double frame_period) {
  if (!(median_window > 0.0)) return 1;
  auto k = static_cast<std::size_t>(std::llround(median_window / frame_period));
  if (k < 1) k = 1;
  if (k % 2 == 0) ++k;
  return k;
}

EventList decode_events(const PosteriorGrid& p, double threshold, double median_window) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    raise(errc::kBadThreshold, "threshold " + format_number(threshold) + " outside [0, 1]");
  }
  p.validate();
  EventList out;
  out.clip_id = p.clip_id;
  out.clip_duration = p.clip_duration;
  const std::size_t frames = p.frames();
  const std::size_t k = median_filter_length(median_window, p.frame_period);
  const auto half = static_cast<std::ptrdiff_t>(k / 2);
  const auto n = static_cast<std::ptrdiff_t>(frames);

  std::vector<int> binary(frames), filtered(frames);
  for (std::size_t c = 0; c < p.classes(); ++c) {
    for (std::size_t t = 0; t < frames; ++t) binary[t] = p.scores(t, c) >= threshold ? 1 : 0;
    if (k > 1 && frames > 0) {
      for (std::ptrdiff_t t = 0; t < n; ++t) {
        int ones = 0;
        for (std::ptrdiff_t j = t - half; j <= t + half; ++j) {
          // Half-sample symmetric reflection: d c b a | a b c d | d c b a.
          std::ptrdiff_t m = j % (2 * n);
          if (m < 0) m += 2 * n;
          if (m >= n) m = 2 * n - 1 - m;
          ones += binary[static_cast<std::size_t>(m)];
        }
        filtered[static_cast<std::size_t>(t)] = 2 * ones > static_cast<int>(k) ? 1 : 0;
      }
    } else {
      filtered = binary;
    }
    std::size_t t = 0;
    while (t < frames) {
      if (!filtered[t]) {
        ++t;
        continue;
      }
      const std::size_t start = t;
      while (t < frames && filtered[t]) ++t;
      const double onset = static_cast<double>(start) * p.frame_period;
      const double offset = std::min(static_cast<double>(t) * p.frame_period, p.clip_duration);
      if (onset < offset) out.events.push_back({onset, offset, p.class_names[c]});
    }
  }
  std::stable_sort(out.events.begin(), out.events.end(), [](const Event& a, const Event& b) {
    return a.onset < b.onset || (a.onset == b.onset && a.label < b.label);
  });
  return out;
}

double ClassCounts::f1() const {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

double ClassCounts::precision() const {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double ClassCounts::recall() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

F1Report collar_f1(const EventSet& detections, const EventSet& truth,
                   const std::vector<std::string>& classes, const CollarParams& collars) {
  F1Report report;
  for (const auto& c : classes) report.per_class[c];

  for (const auto& id : clip_union(detections, truth)) {
    const auto& dets = events_of(detections, id);
    const auto& gts = events_of(truth, id);
    for (const auto& d : dets) class_index(classes, d.label, "detections of " + id);
    for (const auto& g : gts) class_index(classes, g.label, "ground truth of " + id);

    for (const auto& cls : classes) {
      std::vector<const Event*> cls_gt, cls_det;
      for (const auto& g : gts) {
        if (g.label == cls) cls_gt.push_back(&g);
      }
      for (const auto& d : dets) {
        if (d.label == cls) cls_det.push_back(&d);
      }
      const auto by_onset = [](const Event* a, const Event* b) {
        return a->onset < b->onset || (a->onset == b->onset && a->offset < b->offset);
      };
      std::stable_sort(cls_gt.begin(), cls_gt.end(), by_onset);
      std::stable_sort(cls_det.begin(), cls_det.end(), by_onset);

      std::vector<bool> used(cls_det.size(), false);
      std::size_t tp = 0;
      for (const Event* g : cls_gt) {
        const double offset_collar =
            std::max(collars.offset_collar_min, collars.offset_collar_frac * (g->offset - g->onset));
        for (std::size_t j = 0; j < cls_det.size(); ++j) {
          if (used[j]) continue;
          const Event* d = cls_det[j];
          if (std::abs(d->onset - g->onset) <= collars.onset_collar + kTimeTolerance &&
              std::abs(d->offset - g->offset) <= offset_collar + kTimeTolerance) {
            used[j] = true;
            ++tp;
            break;
          }
        }
      }
      auto& counts = report.per_class[cls];
      counts.tp += tp;
      counts.fp += cls_det.size() - tp;
      counts.fn += cls_gt.size() - tp;
    }
  }

  double sum = 0.0;
  for (const auto& [cls, counts] : report.per_class) {
    if (counts.tp + counts.fp + counts.fn == 0) continue;
    sum += counts.f1();
    ++report.scored_classes;
  }
  report.macro_f1 = report.scored_classes == 0 ? 0.0 : sum / static_cast<double>(report.scored_classes);
  return report;
}

OperatingPointCounts psds_counts(const EventSet& detections, const EventSet& truth,
                                 const std::vector<std::string>& classes,
                                 const PsdsParams& params) {
  const std::size_t nc = classes.size();
  OperatingPointCounts counts;
  counts.tp.assign(nc, 0);
  counts.n_truth.assign(nc, 0);
  counts.fp.assign(nc, 0);
  counts.ct.assign(nc, std::vector<std::size_t>(nc, 0));
  counts.truth_duration.assign(nc, 0.0);

  for (const auto& id : clip_union(detections, truth)) {
    const auto& dets = events_of(detections, id);
    const auto& gts = events_of(truth, id);
    std::vector<std::size_t> det_class(dets.size()), gt_class(gts.size());
    for (std::size_t i = 0; i < dets.size(); ++i) {
      det_class[i] = class_index(classes, dets[i].label, "detections of " + id);
    }
    for (std::size_t i = 0; i < gts.size(); ++i) {
      gt_class[i] = class_index(classes, gts[i].label, "ground truth of " + id);
      ++counts.n_truth[gt_class[i]];
      counts.truth_duration[gt_class[i]] += gts[i].offset - gts[i].onset;
    }

    std::vector<bool> dtc(dets.size(), false);
    for (std::size_t i = 0; i < dets.size(); ++i) {
      const auto& d = dets[i];
      const double duration = d.offset - d.onset;
      // Intersection with truth of each class, as a fraction of the detection.
      std::vector<double> cover(nc, 0.0);
      for (std::size_t j = 0; j < gts.size(); ++j) {
        cover[gt_class[j]] += overlap(d.onset, d.offset, gts[j].onset, gts[j].offset);
      }
      if (duration > 0.0 && cover[det_class[i]] / duration >= params.rho_dtc) {
        dtc[i] = true;
        continue;
      }
      ++counts.fp[det_class[i]];
      for (std::size_t k = 0; k < nc; ++k) {
        if (k == det_class[i] || duration <= 0.0) continue;
        if (cover[k] > 0.0 && cover[k] / duration >= params.rho_cttc) ++counts.ct[det_class[i]][k];
      }
    }

    for (std::size_t j = 0; j < gts.size(); ++j) {
      const auto& g = gts[j];
      double covered = 0.0;
      for (std::size_t i = 0; i < dets.size(); ++i) {
        if (dtc[i] && det_class[i] == gt_class[j]) {
          covered += overlap(dets[i].onset, dets[i].offset, g.onset, g.offset);
        }
      }
      if (covered / (g.offset - g.onset) >= params.rho_gtc) ++counts.tp[gt_class[j]];
    }
  }
  return counts;
}

OperatingPoint psds_point(const OperatingPointCounts& counts, double dataset_duration,
                          const PsdsParams& params) {
  const std::size_t nc = counts.tp.size();
  const double hours = dataset_duration / 3600.0;

  std::vector<double> tpr;
  for (std::size_t c = 0; c < nc; ++c) {
    if (counts.n_truth[c] > 0) {
      tpr.push_back(static_cast<double>(counts.tp[c]) / static_cast<double>(counts.n_truth[c]));
    }
  }
  if (tpr.empty()) raise(errc::kBadConfig, "PSDS needs at least one ground-truth event");
  const double mean = std::accumulate(tpr.begin(), tpr.end(), 0.0) / static_cast<double>(tpr.size());
  double var = 0.0;
  for (double v : tpr) var += (v - mean) * (v - mean);
  var /= static_cast<double>(tpr.size());

  double efpr = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    double ct_rate = 0.0;
    std::size_t pairs = 0;
    for (std::size_t k = 0; k < nc; ++k) {
      if (k == c || counts.truth_duration[k] <= 0.0) continue;
      ct_rate += static_cast<double>(counts.ct[c][k]) / (counts.truth_duration[k] / 3600.0);
      ++pairs;
    }
    if (pairs > 0) ct_rate /= static_cast<double>(pairs);
    efpr += static_cast<double>(counts.fp[c]) / hours + params.alpha_ct * ct_rate;
  }
  efpr /= static_cast<double>(nc);

  OperatingPoint op;
  op.efpr = efpr;
  op.etpr = mean - params.alpha_st * std::sqrt(var);
  return op;
}

double psds_area(const std::vector<OperatingPoint>& points, double e_max) {
  if (points.empty()) raise(errc::kBadCurve, "PSDS curve has no operating points");
  if (!(e_max > 0.0)) raise(errc::kBadConfig, "e_max must be positive");
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : points) {
    if (p.efpr <= e_max) pts.emplace_back(std::max(0.0, p.efpr), std::clamp(p.etpr, 0.0, 1.0));
  }
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  double level = 0.0;
  double x_prev = 0.0;
  for (const auto& [x, y] : pts) {
    area += level * (x - x_prev);
    level = std::max(level, y);
    x_prev = x;
  }
  area += level * (e_max - x_prev);
  return area / e_max;
}

PsdsReport psds(const std::vector<DetectionsAtThreshold>& detections, const EventSet& truth,
                const std::vector<std::string>& classes, const PsdsParams& params,
                double dataset_duration) {
  params.validate();
  if (detections.empty()) raise(errc::kBadCurve, "PSDS needs at least one operating point");
  if (!(dataset_duration > 0.0)) raise(errc::kBadConfig, "dataset duration must be positive");
  if (classes.empty()) raise(errc::kBadConfig, "class inventory is empty");
  PsdsReport report;
  for (const auto& op : detections) {
    auto point = psds_point(psds_counts(op.detections, truth, classes, params), dataset_duration,
                            params);
    point.threshold = op.threshold;
    report.per_op.push_back(point);
  }
  report.psds = psds_area(report.per_op, params.e_max);
  return report;
}

PosteriorGrid oracle_posteriors(const EventList& truth, const std::vector<std::string>& classes,
                                const PosteriorCorruption& corruption, double frame_period) {
  if (!(frame_period > 0.0)) raise(errc::kBadConfig, "frame period must be positive");
  PosteriorGrid p;
  p.clip_id = truth.clip_id;
  p.clip_duration = truth.clip_duration;
  p.frame_period = frame_period;
  p.class_names = classes;
  const auto frames =
      static_cast<std::size_t>(std::ceil(truth.clip_duration / frame_period - kTimeTolerance));
  p.scores = Matrix(frames, classes.size());

  std::vector<std::vector<const Event*>> by_class(classes.size());
  for (const auto& e : truth.events) {
    by_class[class_index(classes, e.label, "truth of " + truth.clip_id)].push_back(&e);
  }
  Rng rng(corruption.seed);
  for (std::size_t t = 0; t < frames; ++t) {
    const double f0 = static_cast<double>(t) * frame_period;
    const double f1 = f0 + frame_period;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const bool active = std::any_of(by_class[c].begin(), by_class[c].end(), [&](const Event* e) {
        return overlap(f0, f1, e->onset, e->offset) > 0.0;
      });
      const double u = rng.uniform();
      const double v = active ? corruption.active_score + corruption.noise * (2.0 * u - 1.0)
                              : corruption.noise * u;
      p.scores(t, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return p;
}

std::string format_posterior_tsv(const PosteriorGrid& p) {
  std::string out = "time";
  for (const auto& c : p.class_names) out += "\t" + c;
  out += "\n";
  for (std::size_t t = 0; t < p.frames(); ++t) {
    out += format_number(static_cast<double>(t) * p.frame_period);
    for (std::size_t c = 0; c < p.classes(); ++c) out += "\t" + format_number(p.scores(t, c));
    out += "\n";
  }
  return out;
}

void write_posterior_tsv(const PosteriorGrid& p, const std::filesystem::path& path) {
  write_text_file(path, format_posterior_tsv(p));
}

PosteriorGrid parse_posterior_tsv(const std::string& text, const std::string& source_name,
                                  double clip_duration, double frame_period) {
  PosteriorGrid p;
  p.clip_id = clip_id_from_filename(source_name);
  p.clip_duration = clip_duration;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> times;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    const auto fail = [&](const std::string& what) {
      raise(errc::kParseError, source_name + ":" + std::to_string(line_no) + ": " + what);
    };
    if (p.class_names.empty()) {
      if (fields.size() < 2 || fields[0] != "time") fail("expected header 'time<TAB><class>...'");
      p.class_names.assign(fields.begin() + 1, fields.end());
      continue;
    }
    if (fields.size() != p.class_names.size() + 1) {
      fail("expected " + std::to_string(p.class_names.size() + 1) + " fields, got " +
           std::to_string(fields.size()));
    }
    const auto t = parse_double(fields[0]);
    if (!t) fail("bad time value '" + fields[0] + "'");
    times.push_back(*t);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      const auto v = parse_double(fields[c]);
      if (!v || !(*v >= 0.0 && *v <= 1.0)) fail("score '" + fields[c] + "' is not in [0, 1]");
      values.push_back(*v);
    }
  }
  if (p.class_names.empty()) raise(errc::kParseError, source_name + ": empty file");
  p.frame_period = times.size() >= 2
                       ? (times.back() - times.front()) / static_cast<double>(times.size() - 1)
                       : frame_period;
  p.scores.rows = times.size();
  p.scores.cols = p.class_names.size();
  p.scores.values = std::move(values);
  p.validate();
  return p;
}

PosteriorGrid read_posterior_tsv(const std::filesystem::path& path, double clip_duration,
                                 double frame_period) {
  return parse_posterior_tsv(read_text_file(path), path.string(), clip_duration, frame_period);
}

std::string psds_report_json(const PsdsReport& r) {
  nlohmann::ordered_json j;
  j["psds"] = round6(r.psds);
  j["per_op"] = nlohmann::ordered_json::array();
  for (const auto& op : r.per_op) {
    nlohmann::ordered_json o;
    o["threshold"] = round6(op.threshold);
    o["efpr"] = round6(op.efpr);
    o["etpr"] = round6(op.etpr);
    j["per_op"].push_back(std::move(o));
  }
  return j.dump(2) + "\n";
}

}  // namespace sedsep
