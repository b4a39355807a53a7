#include "quakecast/nowcast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

#include "quakecast/util.hpp"

namespace quakecast {

MonthlySeries monthly_small_rate(const std::vector<CatalogEvent>& events,
                                 const RegionFilter& region, double mag_threshold) {
  region.validate();
  MonthlySeries series;
  year_month_of(region.t_start, series.start_year, series.start_month);
  std::int64_t n_months = month_index(region.t_end - 1, series.start_year, series.start_month) + 1;
  series.counts.assign(static_cast<std::size_t>(n_months), 0.0);
  for (const CatalogEvent& ev : events) {
    if (ev.time < region.t_start || ev.time >= region.t_end) continue;
    if (ev.latitude < region.lat_min || ev.latitude >= region.lat_max) continue;
    if (ev.longitude < region.lon_min || ev.longitude >= region.lon_max) continue;
    if (ev.magnitude <= mag_threshold) continue;
    std::int64_t m = month_index(ev.time, series.start_year, series.start_month);
    series.counts[static_cast<std::size_t>(m)] += 1.0;
  }
  return series;
}

std::vector<int> label_months_before_event(const std::vector<CatalogEvent>& events,
                                           const RegionFilter& region, double large_mag,
                                           int horizon_months, const MonthlySeries& months) {
  if (horizon_months < 1) throw std::invalid_argument("labels: horizon must be >= 1 month");
  std::vector<int> has_event(months.counts.size(), 0);
  for (const CatalogEvent& ev : events) {
    if (ev.time < region.t_start || ev.time >= region.t_end) continue;
    if (ev.latitude < region.lat_min || ev.latitude >= region.lat_max) continue;
    if (ev.longitude < region.lon_min || ev.longitude >= region.lon_max) continue;
    if (ev.magnitude < large_mag) continue;
    std::int64_t m = month_index(ev.time, months.start_year, months.start_month);
    if (m >= 0 && m < static_cast<std::int64_t>(has_event.size())) has_event[m] = 1;
  }
  std::vector<int> labels(months.counts.size(), 0);
  for (std::size_t t = 0; t < labels.size(); ++t) {
    std::size_t hi = std::min(labels.size(), t + 1 + static_cast<std::size_t>(horizon_months));
    for (std::size_t m = t + 1; m < hi; ++m) {
      if (has_event[m]) {
        labels[t] = 1;
        break;
      }
    }
  }
  return labels;
}

std::vector<double> nowcast_curve(const std::vector<double>& rate_series,
                                  const NowcastFilterParams& params) {
  if (params.ema_span < 1) throw std::invalid_argument("nowcast: ema_span must be >= 1");
  if (params.correction_weight < 0.0 || params.correction_weight > 1.0)
    throw std::invalid_argument("nowcast: correction weight must be in [0, 1]");
  if (static_cast<int>(rate_series.size()) <= params.ema_span)
    throw std::invalid_argument("nowcast: series not longer than the EMA span");

  double alpha = 2.0 / (params.ema_span + 1.0);
  double global_sum = 0.0;
  for (double v : rate_series) global_sum += v;
  double global_mean = global_sum / static_cast<double>(rate_series.size());

  std::vector<double> out(rate_series.size());
  double ema_v = rate_series[0];
  double trailing_sum = 0.0;
  for (std::size_t t = 0; t < rate_series.size(); ++t) {
    ema_v = t == 0 ? rate_series[0] : alpha * rate_series[t] + (1.0 - alpha) * ema_v;
    // trailing mean over the last min(span, t+1) samples ending at t; the
    // window includes t so a constant series gives c = 1 everywhere
    trailing_sum += rate_series[t];
    if (t >= static_cast<std::size_t>(params.ema_span))
      trailing_sum -= rate_series[t - params.ema_span];
    std::size_t window = std::min<std::size_t>(t + 1, params.ema_span);
    double trailing_mean = trailing_sum / static_cast<double>(window);
    double c;
    if (trailing_mean <= 0.0)
      c = 10.0;
    else
      c = std::clamp(global_mean / trailing_mean, 0.1, 10.0);
    out[t] = params.correction_weight == 0.0 ? ema_v : ema_v * std::pow(c, params.correction_weight);
  }
  return out;
}

RocCurve roc_skill(const std::vector<double>& nowcast, const std::vector<int>& labels) {
  if (nowcast.size() != labels.size() || nowcast.empty())
    throw std::invalid_argument("roc: series and labels must have equal non-zero length");
  long long positives = 0;
  for (int l : labels) positives += l != 0;
  long long negatives = static_cast<long long>(labels.size()) - positives;
  if (positives == 0 || negatives == 0)
    throw std::runtime_error("roc: skill undefined, labels are all one class");

  // sort by nowcast value descending, tally per unique value
  std::vector<std::size_t> order(nowcast.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (nowcast[a] != nowcast[b]) return nowcast[a] > nowcast[b];
    return a < b;
  });

  RocCurve curve;
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  curve.true_positive_rates.push_back(0.0);
  curve.false_positive_rates.push_back(0.0);

  long long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    double v = nowcast[order[i]];
    while (i < order.size() && nowcast[order[i]] == v) {
      if (labels[order[i]] != 0)
        ++tp;
      else
        ++fp;
      ++i;
    }
    curve.thresholds.push_back(v);
    curve.true_positive_rates.push_back(static_cast<double>(tp) / static_cast<double>(positives));
    curve.false_positive_rates.push_back(static_cast<double>(fp) / static_cast<double>(negatives));
  }

  double area = 0.0;
  for (std::size_t k = 1; k < curve.thresholds.size(); ++k) {
    double dx = curve.false_positive_rates[k] - curve.false_positive_rates[k - 1];
    area += dx * 0.5 * (curve.true_positive_rates[k] + curve.true_positive_rates[k - 1]);
  }
  curve.skill = area;
  return curve;
}

FilterOptimum optimize_filter(const std::vector<double>& rate_series,
                              const std::vector<int>& labels, const std::vector<int>& ema_spans,
                              const std::vector<double>& lambdas) {
  if (ema_spans.empty() || lambdas.empty())
    throw std::invalid_argument("optimize_filter: empty parameter grid");

  std::vector<NowcastFilterParams> grid;
  for (int span : ema_spans)
    for (double lam : lambdas) grid.push_back({span, lam});

  FilterOptimum result;
  result.surface.resize(grid.size());
  std::exception_ptr error;
  std::mutex error_mutex;
  parallel_for(grid.size(), [&](std::size_t i) {
    try {
      std::vector<double> curve = nowcast_curve(rate_series, grid[i]);
      result.surface[i] = {grid[i], roc_skill(curve, labels).skill};
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  });
  if (error) std::rethrow_exception(error);

  // grid is ordered (span asc, lambda asc); strict improvement keeps the
  // first point of a tie, which is the required preference
  std::size_t best = 0;
  for (std::size_t i = 1; i < result.surface.size(); ++i)
    if (result.surface[i].skill > result.surface[best].skill) best = i;
  result.best = result.surface[best].params;
  result.best_skill = result.surface[best].skill;
  return result;
}

}  // namespace quakecast
