#pragma once

#include <span>
#include <string>
#include <vector>

#include "quakecast/gridding.hpp"
#include "quakecast/models.hpp"

namespace quakecast {

/// Nash-Sutcliffe efficiency, 1 - residual SS / variance SS. Throws on a
/// constant observed series (degenerate denominator) and on length < 2.
double nse(std::span<const double> observed, std::span<const double> predicted);

/// 1 / (2 - NSE), mapping (-inf, 1] onto (0, 1].
double nnse_from_nse(double nse_value);

double mse(std::span<const double> observed, std::span<const double> predicted);
double mae(std::span<const double> observed, std::span<const double> predicted);

struct BinMetrics {
  int bin = 0;
  int n = 0;
  double mse = 0.0;
  double mae = 0.0;
  double nse = 0.0;
  double nnse = 0.0;
  bool degenerate = false;  // constant observed series; nse/nnse excluded
};

struct ModelMetrics {
  std::string model;
  double pooled_mse = 0.0;
  double pooled_mae = 0.0;
  double pooled_nse = 0.0;
  double pooled_nnse = 0.0;
  double bin_averaged_nnse = 0.0;  // mean of per-bin NNSE over non-degenerate bins
  int degenerate_bins = 0;
  std::vector<BinMetrics> per_bin;
};

struct MetricReport {
  std::string split;                 // "train" or "test"
  std::vector<ModelMetrics> models;  // sorted by pooled MSE descending
};

struct ReportOptions {
  int period_begin = 0;  // evaluation window [begin, end) in period indices
  int period_end = 0;
  std::string split_name = "test";
};

/// Scores every stream against the truth series over the window. Pooled
/// metrics concatenate all (bin, period) pairs; degenerate bins are excluded
/// from per-bin NSE/NNSE but still pooled. Coverage gaps are a hard error.
MetricReport build_report(const std::vector<ForecastStream>& streams, const BinSeriesSet& truth,
                          const ReportOptions& options);

/// report.csv (model, mse, mae, nnse; MSE descending) and a JSON detail file
/// with per-bin rows.
void save_report(const MetricReport& report, const std::string& csv_path,
                 const std::string& json_path);

}  // namespace quakecast
