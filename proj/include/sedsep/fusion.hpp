#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sedsep/audio_io.hpp"
#include "sedsep/dsp.hpp"
#include "sedsep/matrix.hpp"
#include "sedsep/sed_eval.hpp"

namespace sedsep {

// Power-mean exponent. Infinity is the symbolic "max" mode.
struct PowerWeight {
  double value = 1.0;

  static PowerWeight max() { return {std::numeric_limits<double>::infinity()}; }
  bool is_max() const { return value == std::numeric_limits<double>::infinity(); }
  // "max", "inf" or a positive number. Throws BadConfig.
  static PowerWeight parse(const std::string& text);
  std::string to_string() const;
};

// Elementwise power mean across per-source grids:
// y_ss = ((1/N) sum_s y_s^p)^(1/p). Throws ShapeMismatch, BadP.
PosteriorGrid combine_sources(const std::vector<PosteriorGrid>& sources, PowerWeight p);

// Elementwise y = ((y_m^q + y_ss^q) / 2)^(1/q). Throws ShapeMismatch, BadQ.
PosteriorGrid combine_with_mixture(const PosteriorGrid& mixture, const PosteriorGrid& sources,
                                   PowerWeight q);

// combine_with_mixture(mixture, combine_sources(sources, p), q).
PosteriorGrid late_integration(const PosteriorGrid& mixture,
                               const std::vector<PosteriorGrid>& sources, PowerWeight p,
                               PowerWeight q);

// Posteriors of one clip: the mixture grid and one grid per separated source.
struct ClipPosteriors {
  PosteriorGrid mixture;
  std::vector<PosteriorGrid> sources;
};

struct SweepConfig {
  double threshold = 0.5;
  double median_window = kDefaultMedianWindow;
  CollarParams collars;
  bool with_psds = false;
  PsdsParams psds;
};

struct SweepRow {
  PowerWeight p;
  PowerWeight q;
  double f1_macro = 0.0;
  std::optional<double> psds;
};

struct SweepTable {
  // p-major, then q, in the order given.
  std::vector<SweepRow> rows;
  // Highest macro F1 (then PSDS); earliest row on ties.
  std::size_t best = 0;
};

SweepTable sweep_pq(const std::vector<ClipPosteriors>& clips, const EventSet& truth,
                    const std::vector<PowerWeight>& ps, const std::vector<PowerWeight>& qs,
                    const SweepConfig& cfg = {});

// TSV with header `p<TAB>q<TAB>f1_macro<TAB>psds`.
std::string format_sweep_tsv(const SweepTable& table);
// One block per p (blank line separated), rows `q f1 psds`; q=max is written as
// the largest finite q times 2 so the grid stays plottable.
std::string format_sweep_gnuplot(const SweepTable& table);

// Channel 0 is always the mixture; sources follow in the given order.
struct FeatureStack {
  std::vector<Matrix> channels;
  std::vector<std::string> provenance;
};

// Throws ShapeMismatch.
FeatureStack assemble_early(const Matrix& mixture_features, const std::vector<Matrix>& sources,
                            const std::vector<std::string>& source_names = {});

// Concatenates (1 + M) time x D embeddings along the feature axis, mixture
// block first. Throws ShapeMismatch.
Matrix assemble_middle(const std::vector<Matrix>& embeddings);

inline constexpr double kLogMelFloor = 1e-10;

// log(mel(|STFT|^2) + floor) with HTK-style triangular filters spanning 0 Hz
// to Nyquist. Returns frames x n_mels. Throws BadConfig.
Matrix logmel_features(const Waveform& w, std::size_t n_mels = 64, const StftConfig& stft_cfg = {});

// n_mels x (window/2 + 1) triangular filter weights.
Matrix mel_filterbank(std::size_t n_mels, std::size_t fft_size, int sample_rate);

// TSV matrix dump (no header, tab-separated rows, 6 significant digits).
std::string format_matrix_tsv(const Matrix& m);
Matrix parse_matrix_tsv(const std::string& text, const std::string& source_name);

}  // namespace sedsep
