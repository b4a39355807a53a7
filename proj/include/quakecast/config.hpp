#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "quakecast/catalog.hpp"
#include "quakecast/features.hpp"
#include "quakecast/models.hpp"

namespace quakecast {

/// One model to train, as declared in the run configuration.
struct ModelConfig {
  std::string name;
  ModelKind kind = ModelKind::lstm;
  int hidden = 32;
  int gat_layers = 1;
  int epochs = 200;
  int batch_size = 64;
  double learning_rate = 1e-3;
  PatternKind pattern = PatternKind::lstm;
  std::vector<std::string> stream_files;  // multifoundation inputs
  std::optional<std::uint64_t> seed;      // overrides the run seed
};

struct NowcastConfig {
  double mag_threshold = 3.29;
  double large_mag = 6.0;
  int horizon_months = 36;
  std::vector<int> ema_spans = {6, 12, 24, 36, 48, 60};
  std::vector<double> lambdas = {0.0, 0.25, 0.5, 0.75, 1.0};
};

/// Declarative pipeline configuration. Defaults reproduce the study region:
/// 32-36N / -120..-114E at 0.1 degrees, 14-day periods anchored 1986-01-01,
/// 500 active bins, epsilon 0.15, lookback 52, 80/20 split.
struct RunConfig {
  std::string catalog_path;
  std::string out_dir = "out";

  RegionFilter region{32.0, 36.0, -120.0, -114.0, 0, 0};  // times set in defaults
  double cell_size = 0.1;
  int period_days = 14;
  std::int64_t period_anchor = 0;
  int active_bin_count = 500;
  double epsilon = 0.15;
  int lookback = 52;
  double split_fraction = 0.8;
  FeatureSpec features;
  std::uint64_t seed = 42;
  std::vector<ModelConfig> models;
  NowcastConfig nowcast;
  bool eval_per_bin_average = false;
  std::vector<int> eval_series_bins;  // per-bin truth-vs-prediction exports

  /// Aggregated validation; throws listing every problem at once.
  void validate(bool require_catalog) const;
  const ModelConfig& model(const std::string& name) const;
};

RunConfig default_config();

/// Loads JSON, overlaying the defaults; unknown keys are an error.
RunConfig load_config(const std::string& path);

/// Canonical JSON form (sorted keys) used for hashing and manifests.
std::string config_canonical_json(const RunConfig& config);
std::string config_hash(const RunConfig& config);

}  // namespace quakecast
