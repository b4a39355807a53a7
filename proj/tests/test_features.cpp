#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "quakecast/features.hpp"
#include "quakecast/util.hpp"
#include "testutil.hpp"

using namespace quakecast;

namespace {

struct MiniData {
  SpatialGrid grid;
  std::vector<CatalogEvent> events;
  BinSeriesSet series;  // 20 active bins, normalized
};

MiniData mini_data() {
  MiniData d;
  RegionFilter region = testutil::mini_region();
  d.grid = make_grid(region, 0.1);
  d.events = filter_region(testutil::mini_catalog_events(), region);
  BinSeriesSet full = build_series(d.events, d.grid, 14 * 86400, region.t_start, region.t_end);
  d.series = normalize(restrict_bins(full, select_active_bins(full, 20)));
  return d;
}

// direct event-scan count, no prefix sums
long long mult_oracle(const MiniData& d, int series_row, int t, int window_weeks,
                      double threshold) {
  int bin = d.series.active_bins[series_row];
  int wp = window_weeks / 2;
  std::int64_t lo = d.series.anchor_time + static_cast<std::int64_t>(std::max(0, t - wp)) *
                                               d.series.period_seconds;
  std::int64_t hi = d.series.anchor_time + static_cast<std::int64_t>(t) * d.series.period_seconds;
  long long count = 0;
  for (const CatalogEvent& e : d.events) {
    if (e.magnitude <= threshold) continue;
    if (e.time < lo || e.time >= hi) continue;
    if (assign_bin(e, d.grid) == bin) ++count;
  }
  return count;
}

}  // namespace

TEST_SUITE_BEGIN("features");

TEST_CASE("multiplicity is zero when nothing exceeds the threshold") {
  MiniData d = mini_data();
  ThresholdCounts counts(d.events, d.series, 99.0);
  for (int r = 0; r < 20; ++r)
    for (int t : {0, 10, 30, 59}) CHECK(multiplicity(counts, r, t, 8) == 0);
}

TEST_CASE("multiplicity matches the exhaustive scan oracle") {
  MiniData d = mini_data();
  const double threshold = 3.29;
  ThresholdCounts counts(d.events, d.series, threshold);
  for (int r = 0; r < 20; ++r)
    for (int t = 0; t < d.series.n_periods; t += 7)
      for (int w : {2, 4, 8, 26})
        CHECK(multiplicity(counts, r, t, w) == mult_oracle(d, r, t, w, threshold));
}

TEST_CASE("multiplicity window is zero-padded before the data start") {
  MiniData d = mini_data();
  ThresholdCounts counts(d.events, d.series, 3.29);
  // t = 1 with a 260-week window reaches far before period 0
  for (int r = 0; r < 20; ++r)
    CHECK(multiplicity(counts, r, 1, 260) == mult_oracle(d, r, 1, 260, 3.29));
}

TEST_CASE("multiplicity rejects sub-period windows") {
  MiniData d = mini_data();
  ThresholdCounts counts(d.events, d.series, 3.29);
  CHECK_THROWS_AS(multiplicity(counts, 0, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(multiplicity(counts, 0, 10, 3), std::invalid_argument);
}

TEST_CASE("multiplicity is monotone in the window length") {
  MiniData d = mini_data();
  ThresholdCounts counts(d.events, d.series, 3.29);
  for (int r = 0; r < 20; ++r) {
    for (int t : {5, 20, 45}) {
      long long prev = 0;
      for (int w : {2, 4, 8, 16, 32}) {
        long long c = multiplicity(counts, r, t, w);
        CHECK(c >= prev);
        prev = c;
      }
    }
  }
}

TEST_CASE("ema of a constant series is that constant") {
  std::vector<double> series(40, 0.7);
  for (double v : ema(series, 10)) CHECK(v == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("ema with span 1 is the identity") {
  Rng rng(2);
  std::vector<double> series(30);
  for (double& v : series) v = rng.uniform(-1.0, 1.0);
  CHECK(ema(series, 1) == series);
}

TEST_CASE("ema matches the recursive-definition oracle") {
  Rng rng(9);
  std::vector<double> series(200);
  for (double& v : series) v = rng.uniform(-1.0, 1.0);
  std::vector<double> got = ema(series, 5);
  double alpha = 2.0 / 6.0;
  double e = series[0];
  CHECK(got[0] == e);
  for (std::size_t t = 1; t < series.size(); ++t) {
    e = alpha * series[t] + (1.0 - alpha) * e;
    CHECK(std::abs(got[t] - e) <= 1e-12);
  }
}

TEST_CASE("ema is shift-equivariant under front padding") {
  Rng rng(21);
  std::vector<double> series(50);
  for (double& v : series) v = rng.uniform(-1.0, 1.0);
  std::vector<double> padded = series;
  padded.insert(padded.begin(), 3, series[0]);
  std::vector<double> a = ema(series, 7);
  std::vector<double> b = ema(padded, 7);
  for (std::size_t t = 0; t < a.size(); ++t) CHECK(std::abs(b[t + 3] - a[t]) <= 1e-12);
}

TEST_CASE("window counts: 1000 periods and lookback 52 give 948 samples per bin") {
  // enumeration oracle on a small panel with the same arithmetic
  testutil::Ar1Panel panel = testutil::make_ar1_panel(2, 100, 0.5, 0.0, 3);
  FeatureSpec spec;
  WindowBuild build = make_windows(panel.series, {}, spec, 52, 80);
  std::size_t per_bin = 0;
  for (const SampleWindow& w : build.train.samples)
    if (w.bin == 0) ++per_bin;
  for (const SampleWindow& w : build.test.samples)
    if (w.bin == 0) ++per_bin;
  CHECK(per_bin == 100 - 52);
  int enumerated = 0;
  for (int t = 52; t < 100; ++t) ++enumerated;
  CHECK(per_bin == static_cast<std::size_t>(enumerated));
  // the paper-scale arithmetic is the same formula
  CHECK(1000 - 52 == 948);
}

TEST_CASE("flags-off spec yields a single feature column") {
  FeatureSpec spec;
  CHECK(spec.feature_count() == 1);
  CHECK(spec.column_names() == std::vector<std::string>{"log_energy"});
  testutil::Ar1Panel panel = testutil::make_ar1_panel(2, 60, 0.5, 0.0, 3);
  WindowBuild build = make_windows(panel.series, {}, spec, 8, 48);
  CHECK(build.train.samples[0].n_features == 1);
}

TEST_CASE("every lookback row equals the raw series slice") {
  MiniData d = mini_data();
  FeatureSpec spec;  // single feature, lookback mirrors the series directly
  WindowBuild build = make_windows(d.series, d.events, spec, 8, 48);
  for (const SampleSet* set : {&build.train, &build.test}) {
    for (const SampleWindow& w : set->samples) {
      int row = d.series.row_of_bin(w.bin);
      for (int i = 0; i < w.lookback_len; ++i)
        CHECK(w.at(i, 0) == d.series.values[row][w.t_target - w.lookback_len + i]);
      CHECK(w.target == d.series.values[row][w.t_target]);
    }
  }
}

TEST_CASE("targets partition exactly at the split boundary") {
  MiniData d = mini_data();
  FeatureSpec spec;
  WindowBuild build = make_windows(d.series, d.events, spec, 8, 48);
  for (const SampleWindow& w : build.train.samples) CHECK(w.t_target < 48);
  for (const SampleWindow& w : build.test.samples) CHECK(w.t_target >= 48);
  CHECK(build.train.samples.size() == 20u * (48 - 8));
  CHECK(build.test.samples.size() == 20u * (60 - 48));
}

TEST_CASE("full feature layout stays within [-1, 1] and matches the column plan") {
  MiniData d = mini_data();
  FeatureSpec spec;
  spec.use_multiplicity = true;
  spec.multiplicity_windows_weeks = {2, 4, 8};
  spec.use_ema = true;
  spec.ema_spans = {3, 5};
  WindowBuild build = make_windows(d.series, d.events, spec, 8, 48);
  CHECK(build.train.columns ==
        std::vector<std::string>{"log_energy", "multiplicity_2w", "multiplicity_4w",
                                 "multiplicity_8w", "ema_3", "ema_5"});
  for (const SampleSet* set : {&build.train, &build.test}) {
    for (const SampleWindow& w : set->samples) {
      CHECK(w.target >= -1.0);
      CHECK(w.target <= 1.0);
      for (double v : w.lookback) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
      }
    }
  }
  // multiplicity columns reproduce the scaled oracle counts
  const auto& scales = build.train.multiplicity_scales;
  REQUIRE(scales.size() == 3);
  for (const SampleWindow& w : build.train.samples) {
    int row = d.series.row_of_bin(w.bin);
    for (int i = 0; i < w.lookback_len; ++i) {
      int p = w.t_target - w.lookback_len + i;
      for (int m = 0; m < 3; ++m) {
        double expect = std::min(
            1.0, static_cast<double>(mult_oracle(d, row, p, spec.multiplicity_windows_weeks[m],
                                                 spec.multiplicity_threshold)) /
                     scales[m]);
        CHECK(w.at(i, 1 + m) == doctest::Approx(expect).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("features are causal: perturbing future periods leaves a sample unchanged") {
  MiniData d = mini_data();
  FeatureSpec spec;
  spec.use_multiplicity = true;
  spec.multiplicity_windows_weeks = {2, 8};
  spec.use_ema = true;
  spec.ema_spans = {3};
  WindowBuild before = make_windows(d.series, d.events, spec, 8, 48);

  // corrupt every series value and event from period 30 onward
  BinSeriesSet tampered = d.series;
  std::int64_t cutoff = d.series.anchor_time + 30ll * d.series.period_seconds;
  for (auto& row : tampered.values)
    for (int p = 30; p < tampered.n_periods; ++p) row[p] = 0.123 + 0.001 * p;
  std::vector<CatalogEvent> tampered_events;
  for (const CatalogEvent& e : d.events)
    if (e.time < cutoff) tampered_events.push_back(e);
  WindowBuild after = make_windows(tampered, tampered_events, spec, 8, 48);

  // lookbacks with t_target <= 30 depend only on periods < 30, so they match
  REQUIRE(before.train.samples.size() == after.train.samples.size());
  for (std::size_t i = 0; i < before.train.samples.size(); ++i) {
    const SampleWindow& a = before.train.samples[i];
    const SampleWindow& b = after.train.samples[i];
    if (a.t_target > 30) continue;
    REQUIRE(a.bin == b.bin);
    for (std::size_t k = 0; k < a.lookback.size(); ++k) CHECK(a.lookback[k] == b.lookback[k]);
  }
}

TEST_CASE("lookback covering the whole series is rejected") {
  testutil::Ar1Panel panel = testutil::make_ar1_panel(2, 30, 0.5, 0.0, 3);
  FeatureSpec spec;
  CHECK_THROWS_AS(make_windows(panel.series, {}, spec, 30, 20), std::invalid_argument);
}

TEST_CASE("sample sets round-trip through the text format") {
  MiniData d = mini_data();
  FeatureSpec spec;
  spec.use_ema = true;
  spec.ema_spans = {3, 5};
  WindowBuild build = make_windows(d.series, d.events, spec, 8, 48);
  auto dir = std::filesystem::temp_directory_path() / "qc_samples_rt";
  std::filesystem::create_directories(dir);
  std::string meta = (dir / "meta.json").string();
  std::string data = (dir / "train.tsv").string();
  save_samples(build.train, meta, data);
  SampleSet back = load_samples(meta, data);
  REQUIRE(back.samples.size() == build.train.samples.size());
  CHECK(back.columns == build.train.columns);
  CHECK(back.split_boundary == build.train.split_boundary);
  for (std::size_t i = 0; i < back.samples.size(); ++i) {
    CHECK(back.samples[i].bin == build.train.samples[i].bin);
    CHECK(back.samples[i].t_target == build.train.samples[i].t_target);
    CHECK(back.samples[i].target == build.train.samples[i].target);
    CHECK(back.samples[i].lookback == build.train.samples[i].lookback);
  }
  std::filesystem::remove_all(dir);
}

TEST_SUITE_END();
