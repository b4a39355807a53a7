#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "quakecast/catalog.hpp"

namespace quakecast {

/// Two-parameter nowcast filter: EMA span over monthly rates plus the weight
/// of the multiplicative rate correction.
struct NowcastFilterParams {
  int ema_span = 36;            // monthly samples
  double correction_weight = 0.0;  // lambda in [0, 1]
};

struct MonthlySeries {
  int start_year = 0;
  int start_month = 0;  // 1-12
  std::vector<double> counts;
};

/// Counts events above the magnitude threshold per calendar month across the
/// filter's time span (months intersecting [t_start, t_end)).
MonthlySeries monthly_small_rate(const std::vector<CatalogEvent>& events,
                                 const RegionFilter& region, double mag_threshold);

/// label[t] = 1 iff an event with magnitude >= large_mag falls in months
/// (t, t + horizon] of the series span.
std::vector<int> label_months_before_event(const std::vector<CatalogEvent>& events,
                                           const RegionFilter& region, double large_mag,
                                           int horizon_months, const MonthlySeries& months);

/// n[t] = EMA(rate, span)[t] * c(t)^lambda with c(t) the ratio of the series
/// mean to the trailing mean of the last `span` samples ending at t, clamped
/// to [0.1, 10] (upper clamp when the trailing mean is zero).
std::vector<double> nowcast_curve(const std::vector<double>& rate_series,
                                  const NowcastFilterParams& params);

struct RocCurve {
  std::vector<double> thresholds;  // descending; starts at +inf (no alarm)
  std::vector<double> true_positive_rates;
  std::vector<double> false_positive_rates;
  double skill = 0.0;  // trapezoidal area under (FPR, TPR)
};

/// Threshold sweep over the unique nowcast values (alarm iff value >=
/// threshold). Throws when labels are all-positive or all-negative.
RocCurve roc_skill(const std::vector<double>& nowcast, const std::vector<int>& labels);

struct SkillPoint {
  NowcastFilterParams params;
  double skill = 0.0;
};

struct FilterOptimum {
  NowcastFilterParams best;
  double best_skill = 0.0;
  std::vector<SkillPoint> surface;
};

/// Exhaustive grid search maximizing ROC skill; ties prefer the smaller EMA
/// span, then the smaller correction weight.
FilterOptimum optimize_filter(const std::vector<double>& rate_series,
                              const std::vector<int>& labels, const std::vector<int>& ema_spans,
                              const std::vector<double>& lambdas);

}  // namespace quakecast
