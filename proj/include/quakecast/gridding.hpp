#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quakecast/catalog.hpp"

namespace quakecast {

/// Regular lat/lon grid of square cells, row-major indexing
/// (row = latitude cell, col = longitude cell).
struct SpatialGrid {
  double lat_min = 0.0;
  double lon_min = 0.0;
  double cell_size = 0.1;  // degrees
  int n_rows = 0;
  int n_cols = 0;

  int total_bins() const { return n_rows * n_cols; }
  double lat_max() const { return lat_min + cell_size * n_rows; }
  double lon_max() const { return lon_min + cell_size * n_cols; }
  /// Cell-center coordinates of a bin.
  std::pair<double, double> bin_center(int bin) const;
  int bin_row(int bin) const { return bin / n_cols; }
  int bin_col(int bin) const { return bin % n_cols; }
};

/// Builds the grid covering the region extent; the extent must be an integral
/// number of cells in both directions (within rounding).
SpatialGrid make_grid(const RegionFilter& region, double cell_size);

/// Row-major bin index for an event inside the grid extent; throws naming the
/// offending coordinate otherwise.
int assign_bin(const CatalogEvent& event, const SpatialGrid& grid);
int assign_bin(double latitude, double longitude, const SpatialGrid& grid);

/// Combined released-energy measure of a set of event magnitudes:
/// (1/1.5) * log10(sum of 10^(1.5*m)). Empty input yields 0 (quiescent
/// period). Evaluated with max-exponent factoring so large magnitudes never
/// overflow. Throws on non-finite magnitudes.
double log_energy(std::span<const double> magnitudes);

/// Per-bin biweekly series with grid metadata.
struct BinSeriesSet {
  SpatialGrid grid;
  std::vector<int> active_bins;          // bin ids, one per series row
  std::int64_t anchor_time = 0;          // period 0 starts here (UTC seconds)
  std::int64_t period_seconds = 14 * 86400;
  int n_periods = 0;
  std::vector<std::vector<double>> values;       // [series row][period]
  std::vector<std::vector<int>> event_counts;    // [series row][period]
  double norm_constant = 1.0;  // max-abs divisor applied so far (1 = raw)

  std::int64_t period_start(int p) const { return anchor_time + period_seconds * p; }
  std::vector<std::int64_t> times() const;
  /// Series row holding a bin id, or -1.
  int row_of_bin(int bin) const;
};

/// Buckets events into (bin, period) cells and evaluates the energy measure
/// per cell. Covers every grid bin; events past the last whole period are
/// ignored. Throws if the span is shorter than one period.
BinSeriesSet build_series(const std::vector<CatalogEvent>& events, const SpatialGrid& grid,
                          std::int64_t period_seconds, std::int64_t t_start, std::int64_t t_end);

/// The k bins with the highest total event count, ordered by count descending,
/// ties by ascending bin id.
std::vector<int> select_active_bins(const BinSeriesSet& set, int k);

/// Restricts the series to the given bins, in the given order.
BinSeriesSet restrict_bins(const BinSeriesSet& set, const std::vector<int>& bins);

/// Divides all values by the global max-abs, folding the factor into
/// norm_constant. Throws on an all-zero series.
BinSeriesSet normalize(BinSeriesSet set);

/// Time split of a series: train = [0, boundary), test = [boundary, end).
struct SplitSpec {
  double train_fraction = 0.8;
  int boundary_index = 0;
};

/// boundary = floor(train_fraction * n_periods); throws if the boundary lands
/// at 0 or at the end.
SplitSpec make_split_spec(double train_fraction, int n_periods);

/// Non-owning period-range view of a series set.
struct SeriesView {
  const BinSeriesSet* set = nullptr;
  int period_begin = 0;
  int period_end = 0;

  int n_periods() const { return period_end - period_begin; }
  double value(int series_row, int p) const { return set->values[series_row][period_begin + p]; }
};

std::pair<SeriesView, SeriesView> split(const BinSeriesSet& set, const SplitSpec& spec);

/// Directory persistence: meta.json + values.tsv + counts.tsv, rows aligned
/// with the active bin list, numbers at 17 significant digits.
void save_series(const BinSeriesSet& set, const std::string& dir);
BinSeriesSet load_series(const std::string& dir);

}  // namespace quakecast
