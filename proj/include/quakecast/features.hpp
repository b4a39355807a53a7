#pragma once

#include <span>
#include <string>
#include <vector>

#include "quakecast/catalog.hpp"
#include "quakecast/gridding.hpp"

namespace quakecast {

/// Feature configuration for supervised windows. Multiplicity windows are
/// trailing spans in weeks (whole periods, so even numbers); EMA spans are
/// trailing sample counts. Both lists ascending.
struct FeatureSpec {
  bool use_multiplicity = false;
  double multiplicity_threshold = 3.29;
  std::vector<int> multiplicity_windows_weeks = {2, 12, 52, 130, 260};
  bool use_ema = false;
  std::vector<int> ema_spans = {5, 10, 25, 75, 150};

  void validate() const;
  int feature_count() const;
  std::vector<std::string> column_names() const;
};

/// Per-(series row, period) counts of events above a magnitude threshold,
/// with prefix sums for O(1) trailing-window queries.
class ThresholdCounts {
public:
  ThresholdCounts(const std::vector<CatalogEvent>& events, const BinSeriesSet& set,
                  double threshold);

  /// Events above threshold in periods [p_begin, p_end) for a series row,
  /// clipped to the data range (zero-padded before the start).
  long long window_count(int series_row, int p_begin, int p_end) const;
  int n_rows() const { return static_cast<int>(prefix_.size()); }

private:
  std::vector<std::vector<long long>> prefix_;  // [row][p+1] cumulative
  int n_periods_;
};

/// Count of above-threshold events in the trailing window of `window_weeks`
/// ending at the period before t. Throws if the window is under 2 weeks or
/// not a whole number of periods.
long long multiplicity(const ThresholdCounts& counts, int series_row, int t, int window_weeks);

/// Exponential moving average with alpha = 2/(span+1); e[0] = x[0].
std::vector<double> ema(std::span<const double> series, int span);

/// One supervised sample: L feature rows for the periods immediately before
/// the target period, plus the target value.
struct SampleWindow {
  int bin = 0;
  int t_target = 0;
  int lookback_len = 0;
  int n_features = 0;
  std::vector<double> lookback;  // row-major [L x F]
  double target = 0.0;

  double at(int row, int feature) const { return lookback[row * n_features + feature]; }
};

struct SampleSet {
  std::vector<SampleWindow> samples;
  std::vector<std::string> columns;
  int lookback_len = 0;
  int split_boundary = 0;
  FeatureSpec spec;
  std::vector<double> multiplicity_scales;  // per multiplicity window
};

struct WindowBuild {
  SampleSet train;
  SampleSet test;
};

/// Builds train/test windows over every active bin and every target period
/// t >= L; train iff t < split_boundary. Feature columns per lookback row:
/// series value, then scaled multiplicity counts, then EMAs, per the spec.
/// `events` is required when multiplicity is enabled (counts come from raw
/// magnitudes, not the energy series).
WindowBuild make_windows(const BinSeriesSet& set, const std::vector<CatalogEvent>& events,
                         const FeatureSpec& spec, int lookback_len, int split_boundary);

/// samples_meta.json + one row per sample: bin, target period, target value,
/// then the row-major lookback at 17 significant digits.
void save_samples(const SampleSet& set, const std::string& meta_path, const std::string& data_path);
SampleSet load_samples(const std::string& meta_path, const std::string& data_path);

}  // namespace quakecast
