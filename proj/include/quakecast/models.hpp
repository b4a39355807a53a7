#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "quakecast/features.hpp"
#include "quakecast/graph.hpp"
#include "quakecast/nn/layers.hpp"

namespace quakecast {

enum class ModelKind { gnncoder, lstm, persistence, mean, multifoundation };
enum class PatternKind { lstm, gat };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

/// Architecture descriptor; fully determines parameter shapes.
struct ModelDesc {
  std::string name = "model";
  ModelKind kind = ModelKind::lstm;
  int hidden = 32;
  int gat_layers = 1;  // 1..3
  int lookback = 52;
  int n_features = 1;
  int n_streams = 0;                        // auxiliary forecast streams
  PatternKind pattern = PatternKind::lstm;  // multifoundation pattern model
  double leaky_slope = 0.2;
  std::vector<int> bins;  // mean baseline: bin order of the stored means

  void validate() const;
};

struct TrainProvenance {
  std::uint64_t seed = 0;
  int epochs = 0;
  double learning_rate = 1e-3;
  int batch_size = 64;
  double final_train_loss = 0.0;
};

struct ParamBlockData {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::vector<double> values;
};

/// Trained (or freshly initialized) model: descriptor + parameters +
/// provenance sufficient to re-run training identically on one platform.
struct ModelBundle {
  ModelDesc desc;
  TrainProvenance provenance;
  std::vector<ParamBlockData> blocks;
  std::vector<double> loss_trace;  // per-epoch mean training loss
};

/// Per-(bin, period) forecast values in normalized units.
struct StreamEntry {
  int bin = 0;
  int period = 0;
  double value = 0.0;
};

struct ForecastStream {
  std::string model_name;
  std::vector<StreamEntry> entries;  // sorted by (bin, period)

  void sort_entries();
};

/// CSV with header "model,bin_index,period_index,value".
void save_stream(const ForecastStream& stream, const std::string& path);
ForecastStream load_stream(const std::string& path);
std::vector<ForecastStream> load_forecast_streams(const std::vector<std::string>& paths);

struct TrainData {
  const SampleSet* samples = nullptr;                 // network models
  const BinGraph* graph = nullptr;                    // graph models
  const std::vector<ForecastStream>* streams = nullptr;  // multifoundation
  const BinSeriesSet* series = nullptr;               // mean baseline
  int split_boundary = 0;                             // mean baseline span end
};

struct TrainOptions {
  int epochs = 200;
  int batch_size = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

/// Initializes parameters from the seed and minimizes MSE with Adam.
/// LSTM-pattern models train on shuffled mini-batches; graph-pattern models
/// take one full-graph step per target period. The final train loss in the
/// provenance is a clean post-training pass over all training samples.
/// Throws if the loss goes non-finite, reporting the trace so far.
ModelBundle train_model(const ModelDesc& desc, const TrainData& data, const TrainOptions& opts);

struct PredictInputs {
  const SampleSet* samples = nullptr;
  const BinGraph* graph = nullptr;
  const std::vector<ForecastStream>* streams = nullptr;
};

/// Emits one forecast per sample; any model's output is a valid auxiliary
/// stream for a multifoundation combiner.
ForecastStream predict_model(const ModelBundle& bundle, const PredictInputs& in);

/// Last lookback value of the primary feature column.
double persistence_prediction(const SampleWindow& window);

/// manifest.json (descriptor, provenance, shapes, loss trace) + params.tsv.
void save_bundle(const ModelBundle& bundle, const std::string& dir);
ModelBundle load_bundle(const std::string& dir);

}  // namespace quakecast
