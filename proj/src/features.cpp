#include "quakecast/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "quakecast/util.hpp"

namespace quakecast {

using nlohmann::json;

void FeatureSpec::validate() const {
  if (use_multiplicity) {
    if (multiplicity_windows_weeks.empty())
      throw std::invalid_argument("features: multiplicity enabled with no windows");
    if (!std::is_sorted(multiplicity_windows_weeks.begin(), multiplicity_windows_weeks.end()))
      throw std::invalid_argument("features: multiplicity windows must be ascending");
    for (int w : multiplicity_windows_weeks)
      if (w < 2 || w % 2 != 0)
        throw std::invalid_argument("features: multiplicity window must be an even week count >= 2");
  }
  if (use_ema) {
    if (ema_spans.empty()) throw std::invalid_argument("features: EMA enabled with no spans");
    if (!std::is_sorted(ema_spans.begin(), ema_spans.end()))
      throw std::invalid_argument("features: EMA spans must be ascending");
    for (int s : ema_spans)
      if (s < 1) throw std::invalid_argument("features: EMA span must be >= 1");
  }
}

int FeatureSpec::feature_count() const {
  int f = 1;
  if (use_multiplicity) f += static_cast<int>(multiplicity_windows_weeks.size());
  if (use_ema) f += static_cast<int>(ema_spans.size());
  return f;
}

std::vector<std::string> FeatureSpec::column_names() const {
  std::vector<std::string> names = {"log_energy"};
  if (use_multiplicity)
    for (int w : multiplicity_windows_weeks) names.push_back("multiplicity_" + std::to_string(w) + "w");
  if (use_ema)
    for (int s : ema_spans) names.push_back("ema_" + std::to_string(s));
  return names;
}

ThresholdCounts::ThresholdCounts(const std::vector<CatalogEvent>& events, const BinSeriesSet& set,
                                 double threshold)
    : n_periods_(set.n_periods) {
  int n_rows = static_cast<int>(set.active_bins.size());
  std::vector<std::vector<long long>> counts(n_rows, std::vector<long long>(n_periods_, 0));
  std::vector<int> bin_to_row(set.grid.total_bins(), -1);
  for (int r = 0; r < n_rows; ++r) bin_to_row[set.active_bins[r]] = r;

  for (const CatalogEvent& ev : events) {
    if (ev.magnitude <= threshold) continue;
    if (ev.time < set.anchor_time) continue;
    std::int64_t p = (ev.time - set.anchor_time) / set.period_seconds;
    if (p >= n_periods_) continue;
    int bin;
    try {
      bin = assign_bin(ev, set.grid);
    } catch (const std::out_of_range&) {
      continue;  // outside the grid, not part of any series
    }
    int r = bin_to_row[bin];
    if (r >= 0) counts[r][p]++;
  }

  prefix_.assign(n_rows, std::vector<long long>(n_periods_ + 1, 0));
  for (int r = 0; r < n_rows; ++r)
    for (int p = 0; p < n_periods_; ++p) prefix_[r][p + 1] = prefix_[r][p] + counts[r][p];
}

long long ThresholdCounts::window_count(int series_row, int p_begin, int p_end) const {
  p_begin = std::max(p_begin, 0);
  p_end = std::min(p_end, n_periods_);
  if (p_begin >= p_end) return 0;
  return prefix_[series_row][p_end] - prefix_[series_row][p_begin];
}

long long multiplicity(const ThresholdCounts& counts, int series_row, int t, int window_weeks) {
  if (window_weeks < 2) throw std::invalid_argument("multiplicity: window must be >= 2 weeks");
  if (window_weeks % 2 != 0)
    throw std::invalid_argument("multiplicity: window must be a whole number of 2-week periods");
  int wp = window_weeks / 2;
  return counts.window_count(series_row, t - wp, t);
}

std::vector<double> ema(std::span<const double> series, int span) {
  if (span < 1) throw std::invalid_argument("ema: span must be >= 1");
  std::vector<double> out(series.size());
  if (series.empty()) return out;
  double alpha = 2.0 / (span + 1.0);
  out[0] = series[0];
  for (std::size_t t = 1; t < series.size(); ++t)
    out[t] = alpha * series[t] + (1.0 - alpha) * out[t - 1];
  return out;
}

WindowBuild make_windows(const BinSeriesSet& set, const std::vector<CatalogEvent>& events,
                         const FeatureSpec& spec, int lookback_len, int split_boundary) {
  spec.validate();
  if (lookback_len < 1) throw std::invalid_argument("windows: lookback must be >= 1");
  if (lookback_len >= set.n_periods)
    throw std::invalid_argument("windows: lookback covers the whole series");
  if (split_boundary <= 0 || split_boundary >= set.n_periods)
    throw std::invalid_argument("windows: split boundary falls at the series edge");

  const int n_rows = static_cast<int>(set.active_bins.size());
  const int n_mult = spec.use_multiplicity ? static_cast<int>(spec.multiplicity_windows_weeks.size()) : 0;
  const int n_ema = spec.use_ema ? static_cast<int>(spec.ema_spans.size()) : 0;
  const int n_feat = spec.feature_count();

  ThresholdCounts counts = spec.use_multiplicity
                               ? ThresholdCounts(events, set, spec.multiplicity_threshold)
                               : ThresholdCounts({}, set, 0.0);

  // train-span maxima per multiplicity window, for scaling into [0,1]
  std::vector<double> scales(n_mult, 1.0);
  for (int m = 0; m < n_mult; ++m) {
    long long peak = 0;
    for (int r = 0; r < n_rows; ++r)
      for (int p = 0; p < split_boundary; ++p)
        peak = std::max(peak, multiplicity(counts, r, p, spec.multiplicity_windows_weeks[m]));
    scales[m] = peak > 0 ? static_cast<double>(peak) : 1.0;
  }

  // per-row feature matrix [period][feature], computed once then sliced
  std::vector<std::vector<double>> feat(n_rows, std::vector<double>(set.n_periods * n_feat));
  parallel_for(static_cast<std::size_t>(n_rows), [&](std::size_t r) {
    const std::vector<double>& series = set.values[r];
    std::vector<std::vector<double>> emas(n_ema);
    for (int e = 0; e < n_ema; ++e) emas[e] = ema(series, spec.ema_spans[e]);
    for (int p = 0; p < set.n_periods; ++p) {
      double* row = &feat[r][p * n_feat];
      row[0] = series[p];
      for (int m = 0; m < n_mult; ++m) {
        double v = static_cast<double>(multiplicity(counts, static_cast<int>(r), p,
                                                    spec.multiplicity_windows_weeks[m])) /
                   scales[m];
        row[1 + m] = std::min(v, 1.0);
      }
      for (int e = 0; e < n_ema; ++e) row[1 + n_mult + e] = emas[e][p];
    }
  });

  WindowBuild build;
  for (SampleSet* s : {&build.train, &build.test}) {
    s->columns = spec.column_names();
    s->lookback_len = lookback_len;
    s->split_boundary = split_boundary;
    s->spec = spec;
    s->multiplicity_scales = scales;
  }

  for (int r = 0; r < n_rows; ++r) {
    for (int t = lookback_len; t < set.n_periods; ++t) {
      SampleWindow w;
      w.bin = set.active_bins[r];
      w.t_target = t;
      w.lookback_len = lookback_len;
      w.n_features = n_feat;
      w.lookback.resize(static_cast<std::size_t>(lookback_len) * n_feat);
      std::copy(feat[r].begin() + static_cast<std::size_t>(t - lookback_len) * n_feat,
                feat[r].begin() + static_cast<std::size_t>(t) * n_feat, w.lookback.begin());
      w.target = set.values[r][t];
      (t < split_boundary ? build.train : build.test).samples.push_back(std::move(w));
    }
  }
  return build;
}

void save_samples(const SampleSet& set, const std::string& meta_path, const std::string& data_path) {
  json meta;
  meta["columns"] = set.columns;
  meta["lookback"] = set.lookback_len;
  meta["split_boundary"] = set.split_boundary;
  meta["multiplicity_scales"] = set.multiplicity_scales;
  meta["spec"] = {{"use_multiplicity", set.spec.use_multiplicity},
                  {"multiplicity_threshold", set.spec.multiplicity_threshold},
                  {"multiplicity_windows_weeks", set.spec.multiplicity_windows_weeks},
                  {"use_ema", set.spec.use_ema},
                  {"ema_spans", set.spec.ema_spans}};
  std::ofstream mf(meta_path);
  if (!mf) throw std::runtime_error("cannot write " + meta_path);
  mf << meta.dump(2) << '\n';

  std::ofstream out(data_path);
  if (!out) throw std::runtime_error("cannot write " + data_path);
  for (const SampleWindow& w : set.samples) {
    out << w.bin << '\t' << w.t_target << '\t' << fmt_g17(w.target);
    for (double v : w.lookback) out << '\t' << fmt_g17(v);
    out << '\n';
  }
}

SampleSet load_samples(const std::string& meta_path, const std::string& data_path) {
  std::ifstream mf(meta_path);
  if (!mf) throw std::runtime_error("cannot read " + meta_path);
  json meta = json::parse(mf);
  SampleSet set;
  set.columns = meta.at("columns").get<std::vector<std::string>>();
  set.lookback_len = meta.at("lookback").get<int>();
  set.split_boundary = meta.at("split_boundary").get<int>();
  set.multiplicity_scales = meta.at("multiplicity_scales").get<std::vector<double>>();
  const json& spec = meta.at("spec");
  set.spec.use_multiplicity = spec.at("use_multiplicity").get<bool>();
  set.spec.multiplicity_threshold = spec.at("multiplicity_threshold").get<double>();
  set.spec.multiplicity_windows_weeks = spec.at("multiplicity_windows_weeks").get<std::vector<int>>();
  set.spec.use_ema = spec.at("use_ema").get<bool>();
  set.spec.ema_spans = spec.at("ema_spans").get<std::vector<int>>();

  int n_feat = static_cast<int>(set.columns.size());
  std::ifstream in(data_path);
  if (!in) throw std::runtime_error("cannot read " + data_path);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<std::string> toks;
    while (std::getline(ss, tok, '\t')) toks.push_back(tok);
    if (static_cast<int>(toks.size()) != 3 + set.lookback_len * n_feat)
      throw std::runtime_error("sample row length mismatch");
    SampleWindow w;
    w.bin = static_cast<int>(parse_int(toks[0]));
    w.t_target = static_cast<int>(parse_int(toks[1]));
    w.target = parse_double(toks[2]);
    w.lookback_len = set.lookback_len;
    w.n_features = n_feat;
    w.lookback.reserve(toks.size() - 3);
    for (std::size_t i = 3; i < toks.size(); ++i) w.lookback.push_back(parse_double(toks[i]));
    set.samples.push_back(std::move(w));
  }
  return set;
}

}  // namespace quakecast
