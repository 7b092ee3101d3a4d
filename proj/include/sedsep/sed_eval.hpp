#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sedsep/events.hpp"
#include "sedsep/matrix.hpp"

namespace sedsep {

inline constexpr double kDefaultFramePeriod = 0.064;
inline constexpr double kDefaultMedianWindow = 0.45;

// Frame-level class scores, T x C, all in [0, 1]. Frame t covers
// [t * frame_period, (t + 1) * frame_period).
struct PosteriorGrid {
  Matrix scores;
  double frame_period = kDefaultFramePeriod;
  std::vector<std::string> class_names;
  std::string clip_id;
  double clip_duration = 10.0;

  std::size_t frames() const noexcept { return scores.rows; }
  std::size_t classes() const noexcept { return scores.cols; }
  // Throws ShapeMismatch / BadConfig.
  void validate() const;
};

struct CollarParams {
  double onset_collar = 0.2;
  double offset_collar_min = 0.2;
  double offset_collar_frac = 0.2;
};

struct PsdsParams {
  double rho_dtc = 0.5;
  double rho_gtc = 0.5;
  double rho_cttc = 0.3;
  double e_max = 100.0;  // false positives per hour
  double alpha_ct = 1.0;
  double alpha_st = 1.0;
  std::vector<double> thresholds = default_thresholds();

  // 50 operating points, linear in [0.01, 0.99].
  static std::vector<double> default_thresholds();
  void validate() const;
};

// Binarize at `threshold`, median-filter each class track with an odd window
// of round(median_window / frame_period) frames (reflect padding), and turn
// runs of ones into events. Throws BadThreshold.
EventList decode_events(const PosteriorGrid& p, double threshold,
                        double median_window = kDefaultMedianWindow);

// Odd median filter length in frames; 1 disables filtering.
std::size_t median_filter_length(double median_window, double frame_period);

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double f1() const;
  double precision() const;
  double recall() const;
};

struct F1Report {
  std::map<std::string, ClassCounts> per_class;
  // Unweighted mean over classes present in truth or detections.
  double macro_f1 = 0.0;
  std::size_t scored_classes = 0;
};

// Event-based F1 with onset/offset collars and greedy one-to-one matching.
// Clips missing from either side count as empty. Throws UnknownClass.
F1Report collar_f1(const EventSet& detections, const EventSet& truth,
                   const std::vector<std::string>& classes, const CollarParams& collars = {});

struct OperatingPoint {
  double threshold = 0.0;
  double efpr = 0.0;  // per hour
  double etpr = 0.0;
};

struct PsdsReport {
  double psds = 0.0;
  std::vector<OperatingPoint> per_op;
};

struct DetectionsAtThreshold {
  double threshold = 0.0;
  EventSet detections;
};

// Per-operating-point intersection statistics (exposed for testing).
struct OperatingPointCounts {
  std::vector<std::size_t> tp;       // detected ground-truth events, per class
  std::vector<std::size_t> n_truth;  // per class
  std::vector<std::size_t> fp;       // non-DTC detections, per class
  // ct[c][k]: non-DTC detections of class c cross-triggered on truth of class k.
  std::vector<std::vector<std::size_t>> ct;
  std::vector<double> truth_duration;  // seconds, per class
};

OperatingPointCounts psds_counts(const EventSet& detections, const EventSet& truth,
                                 const std::vector<std::string>& classes, const PsdsParams& params);

// eFPR and eTPR of one operating point.
OperatingPoint psds_point(const OperatingPointCounts& counts, double dataset_duration,
                          const PsdsParams& params);

// Normalized area under the upper-envelope staircase of (eFPR, eTPR) on
// [0, e_max]. Throws BadCurve when `points` is empty.
double psds_area(const std::vector<OperatingPoint>& points, double e_max);

// Throws BadCurve, UnknownClass, BadConfig.
PsdsReport psds(const std::vector<DetectionsAtThreshold>& detections, const EventSet& truth,
                const std::vector<std::string>& classes, const PsdsParams& params,
                double dataset_duration);

struct PosteriorCorruption {
  double active_score = 0.9;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

// Synthetic classifier output from ground truth: frames overlapping an event
// of class c score active_score + U(-noise, noise), other frames U(0, noise),
// clipped to [0, 1].
PosteriorGrid oracle_posteriors(const EventList& truth, const std::vector<std::string>& classes,
                                const PosteriorCorruption& corruption = {},
                                double frame_period = kDefaultFramePeriod);

// TSV with header `time<TAB><class1>...<classC>` and one row per frame.
std::string format_posterior_tsv(const PosteriorGrid& p);
void write_posterior_tsv(const PosteriorGrid& p, const std::filesystem::path& path);
// Frame period is taken from the time column when it has >= 2 rows,
// otherwise from `frame_period`. Throws ParseError naming file and line.
PosteriorGrid parse_posterior_tsv(const std::string& text, const std::string& source_name,
                                  double clip_duration = 10.0,
                                  double frame_period = kDefaultFramePeriod);
PosteriorGrid read_posterior_tsv(const std::filesystem::path& path, double clip_duration = 10.0,
                                 double frame_period = kDefaultFramePeriod);

std::string psds_report_json(const PsdsReport& r);

}  // namespace sedsep
