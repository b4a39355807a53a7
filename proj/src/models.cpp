#include "quakecast/models.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "quakecast/nn/nets.hpp"
#include "quakecast/nn/optim.hpp"
#include "quakecast/util.hpp"

namespace quakecast {

using nlohmann::json;
using nn::Activation;
using nn::Dense;
using nn::GatLayer;
using nn::LstmLayer;
using nn::GnnCoderNet;
using nn::LstmNet;
using nn::Neighborhoods;
using nn::NetShape;
using nn::ParamRef;
using nn::Tensor2;

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::gnncoder: return "gnncoder";
    case ModelKind::lstm: return "lstm";
    case ModelKind::persistence: return "persistence";
    case ModelKind::mean: return "mean";
    case ModelKind::multifoundation: return "multifoundation";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "gnncoder") return ModelKind::gnncoder;
  if (s == "lstm") return ModelKind::lstm;
  if (s == "persistence") return ModelKind::persistence;
  if (s == "mean") return ModelKind::mean;
  if (s == "multifoundation") return ModelKind::multifoundation;
  throw std::invalid_argument("unknown model kind: " + s);
}

void ModelDesc::validate() const {
  if (hidden < 1) throw std::invalid_argument("model " + name + ": hidden width must be >= 1");
  if (lookback < 1) throw std::invalid_argument("model " + name + ": lookback must be >= 1");
  if (n_features < 1) throw std::invalid_argument("model " + name + ": needs at least one feature");
  if (n_streams < 0) throw std::invalid_argument("model " + name + ": negative stream count");
  bool graphy = kind == ModelKind::gnncoder ||
                (kind == ModelKind::multifoundation && pattern == PatternKind::gat);
  if (graphy && (gat_layers < 1 || gat_layers > 3))
    throw std::invalid_argument("model " + name + ": attention depth must be 1..3");
  if (kind != ModelKind::multifoundation && n_streams != 0)
    throw std::invalid_argument("model " + name + ": only multifoundation models take streams");
}

void ForecastStream::sort_entries() {
  std::sort(entries.begin(), entries.end(), [](const StreamEntry& a, const StreamEntry& b) {
    if (a.bin != b.bin) return a.bin < b.bin;
    return a.period < b.period;
  });
}

// ---- stream files -----------------------------------------------------------

void save_stream(const ForecastStream& stream, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "model,bin_index,period_index,value\n";
  for (const StreamEntry& e : stream.entries)
    out << stream.model_name << ',' << e.bin << ',' << e.period << ',' << fmt_g17(e.value) << '\n';
}

ForecastStream load_stream(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read stream " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("stream " + path + ": empty file");
  std::vector<std::string> header = split_csv_line(line);
  if (header != std::vector<std::string>{"model", "bin_index", "period_index", "value"})
    throw std::runtime_error("stream " + path + ": unexpected header");
  ForecastStream s;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 4)
      throw std::runtime_error("stream " + path + ": bad row " + std::to_string(row));
    if (s.model_name.empty()) s.model_name = f[0];
    s.entries.push_back({static_cast<int>(parse_int(f[1])), static_cast<int>(parse_int(f[2])),
                         parse_double(f[3])});
  }
  s.sort_entries();
  for (std::size_t i = 1; i < s.entries.size(); ++i)
    if (s.entries[i].bin == s.entries[i - 1].bin && s.entries[i].period == s.entries[i - 1].period)
      throw std::runtime_error("stream " + path + ": duplicate (bin, period) entry");
  return s;
}

std::vector<ForecastStream> load_forecast_streams(const std::vector<std::string>& paths) {
  std::vector<ForecastStream> out;
  out.reserve(paths.size());
  for (const std::string& p : paths) out.push_back(load_stream(p));
  return out;
}

// ---- stream lookup ----------------------------------------------------------

namespace {

struct StreamLookup {
  std::unordered_map<std::int64_t, double> map;

  static std::int64_t key(int bin, int period) {
    return (static_cast<std::int64_t>(bin) << 24) | static_cast<std::int64_t>(period);
  }

  explicit StreamLookup(const ForecastStream& s) {
    map.reserve(s.entries.size());
    for (const StreamEntry& e : s.entries) map[key(e.bin, e.period)] = e.value;
  }
};

std::vector<StreamLookup> build_lookups(const std::vector<ForecastStream>& streams) {
  std::vector<StreamLookup> lu;
  lu.reserve(streams.size());
  for (const ForecastStream& s : streams) lu.emplace_back(s);
  return lu;
}

/// Stream values for a set of samples: [n x S]. Hard error listing gaps.
Tensor2 stream_matrix(const std::vector<const SampleWindow*>& samples,
                      const std::vector<ForecastStream>& streams,
                      const std::vector<StreamLookup>& lookups) {
  Tensor2 m(static_cast<int>(samples.size()), static_cast<int>(streams.size()));
  std::vector<std::string> gaps;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t s = 0; s < streams.size(); ++s) {
      auto it = lookups[s].map.find(StreamLookup::key(samples[i]->bin, samples[i]->t_target));
      if (it == lookups[s].map.end()) {
        if (gaps.size() < 5)
          gaps.push_back(streams[s].model_name + " missing (bin " + std::to_string(samples[i]->bin) +
                         ", period " + std::to_string(samples[i]->t_target) + ")");
        continue;
      }
      m(static_cast<int>(i), static_cast<int>(s)) = it->second;
    }
  }
  if (!gaps.empty()) {
    std::string msg = "stream coverage gaps:";
    for (const std::string& g : gaps) msg += "\n  " + g;
    throw std::runtime_error(msg);
  }
  return m;
}

NetShape net_shape(const ModelDesc& desc) {
  return {desc.lookback, desc.n_features, desc.hidden, desc.gat_layers, desc.n_streams,
          desc.leaky_slope};
}

bool uses_graph_pattern(const ModelDesc& desc) {
  return desc.kind == ModelKind::gnncoder ||
         (desc.kind == ModelKind::multifoundation && desc.pattern == PatternKind::gat);
}

bool uses_lstm_pattern(const ModelDesc& desc) {
  return desc.kind == ModelKind::lstm ||
         (desc.kind == ModelKind::multifoundation && desc.pattern == PatternKind::lstm);
}

// parameter export/import between a live net and bundle blocks
std::vector<ParamBlockData> export_blocks(std::vector<ParamRef> params) {
  std::vector<ParamBlockData> blocks;
  blocks.reserve(params.size());
  for (const ParamRef& p : params)
    blocks.push_back({p.name, p.value->rows, p.value->cols, p.value->data});
  return blocks;
}

void import_blocks(const std::vector<ParamBlockData>& blocks, std::vector<ParamRef> params) {
  if (blocks.size() != params.size())
    throw std::runtime_error("bundle: parameter block count mismatch");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const ParamBlockData& b = blocks[i];
    ParamRef& p = params[i];
    if (b.name != p.name || b.rows != p.value->rows || b.cols != p.value->cols)
      throw std::runtime_error("bundle: block '" + b.name + "' does not match the architecture");
    p.value->data = b.values;
  }
}

// ---- per-period grouping for graph models -----------------------------------

struct GraphBatch {
  int t = 0;
  Tensor2 lookbacks;  // [N x L*F], rows in node order
  Tensor2 streams;    // [N x S]
  std::vector<double> targets;
};

std::vector<GraphBatch> group_by_period(const SampleSet& set, const BinGraph& graph,
                                        const std::vector<ForecastStream>* streams,
                                        const std::vector<StreamLookup>* lookups) {
  const int n_nodes = static_cast<int>(graph.nodes.size());
  std::unordered_map<int, int> bin_to_node;
  for (int i = 0; i < n_nodes; ++i) bin_to_node[graph.nodes[i].bin] = i;

  std::unordered_map<int, std::vector<const SampleWindow*>> by_period;
  for (const SampleWindow& w : set.samples) by_period[w.t_target].push_back(&w);

  std::vector<int> periods;
  periods.reserve(by_period.size());
  for (const auto& [t, _] : by_period) periods.push_back(t);
  std::sort(periods.begin(), periods.end());

  const int lf = set.lookback_len * static_cast<int>(set.columns.size());
  std::vector<GraphBatch> batches;
  batches.reserve(periods.size());
  for (int t : periods) {
    const auto& rows = by_period[t];
    if (static_cast<int>(rows.size()) != n_nodes)
      throw std::runtime_error("graph training: period " + std::to_string(t) + " covers " +
                               std::to_string(rows.size()) + " bins, graph has " +
                               std::to_string(n_nodes));
    GraphBatch b;
    b.t = t;
    b.lookbacks = Tensor2(n_nodes, lf);
    b.targets.assign(n_nodes, 0.0);
    std::vector<const SampleWindow*> in_node_order(n_nodes, nullptr);
    for (const SampleWindow* w : rows) {
      auto it = bin_to_node.find(w->bin);
      if (it == bin_to_node.end())
        throw std::runtime_error("graph training: sample bin " + std::to_string(w->bin) +
                                 " is not a graph node");
      in_node_order[it->second] = w;
    }
    for (int i = 0; i < n_nodes; ++i) {
      const SampleWindow* w = in_node_order[i];
      if (!w) throw std::runtime_error("graph training: node coverage gap at period " + std::to_string(t));
      std::copy(w->lookback.begin(), w->lookback.end(), b.lookbacks.data.begin() + static_cast<std::size_t>(i) * lf);
      b.targets[i] = w->target;
    }
    if (streams && !streams->empty()) {
      b.streams = stream_matrix(in_node_order, *streams, *lookups);
    } else {
      b.streams = Tensor2(n_nodes, 0);
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

// LSTM step tensors for a batch of samples.
std::vector<Tensor2> batch_steps(const std::vector<const SampleWindow*>& batch, int lookback,
                                 int n_features) {
  std::vector<Tensor2> steps(lookback, Tensor2(static_cast<int>(batch.size()), n_features));
  for (std::size_t i = 0; i < batch.size(); ++i)
    for (int t = 0; t < lookback; ++t)
      for (int f = 0; f < n_features; ++f) steps[t](static_cast<int>(i), f) = batch[i]->at(t, f);
  return steps;
}

constexpr std::uint64_t kShuffleSalt = 0x9e3779b97f4a7c15ull;

}  // namespace

double persistence_prediction(const SampleWindow& window) {
  return window.at(window.lookback_len - 1, 0);
}

// ---- training ----------------------------------------------------------------

ModelBundle train_model(const ModelDesc& desc, const TrainData& data, const TrainOptions& opts) {
  desc.validate();
  ModelBundle bundle;
  bundle.desc = desc;
  bundle.provenance.seed = opts.seed;
  bundle.provenance.epochs = opts.epochs;
  bundle.provenance.learning_rate = opts.learning_rate;
  bundle.provenance.batch_size = opts.batch_size;

  if (desc.kind == ModelKind::persistence) {
    if (!data.samples) throw std::invalid_argument("train: persistence needs samples");
    std::vector<double> pred, tgt;
    for (const SampleWindow& w : data.samples->samples) {
      pred.push_back(persistence_prediction(w));
      tgt.push_back(w.target);
    }
    bundle.provenance.final_train_loss = pred.empty() ? 0.0 : nn::mse_loss(pred, tgt).loss;
    return bundle;
  }

  if (desc.kind == ModelKind::mean) {
    if (!data.series) throw std::invalid_argument("train: mean baseline needs the series");
    if (data.split_boundary <= 0 || data.split_boundary > data.series->n_periods)
      throw std::invalid_argument("train: mean baseline needs a valid split boundary");
    ParamBlockData block;
    block.name = "bin_means";
    block.rows = static_cast<int>(data.series->active_bins.size());
    block.cols = 1;
    bundle.desc.bins = data.series->active_bins;
    for (std::size_t r = 0; r < data.series->active_bins.size(); ++r) {
      double s = 0.0;
      for (int p = 0; p < data.split_boundary; ++p) s += data.series->values[r][p];
      block.values.push_back(s / data.split_boundary);
    }
    bundle.blocks.push_back(std::move(block));
    if (data.samples) {
      std::unordered_map<int, double> means;
      for (std::size_t r = 0; r < bundle.desc.bins.size(); ++r)
        means[bundle.desc.bins[r]] = bundle.blocks[0].values[r];
      std::vector<double> pred, tgt;
      for (const SampleWindow& w : data.samples->samples) {
        pred.push_back(means.at(w.bin));
        tgt.push_back(w.target);
      }
      if (!pred.empty()) bundle.provenance.final_train_loss = nn::mse_loss(pred, tgt).loss;
    }
    return bundle;
  }

  if (!data.samples) throw std::invalid_argument("train: model needs samples");
  const SampleSet& set = *data.samples;
  if (set.samples.empty()) throw std::invalid_argument("train: empty sample set");
  if (set.lookback_len != desc.lookback || static_cast<int>(set.columns.size()) != desc.n_features)
    throw std::invalid_argument("train: sample layout does not match the descriptor");

  const std::vector<ForecastStream>* streams = data.streams;
  if (desc.kind == ModelKind::multifoundation) {
    int have = streams ? static_cast<int>(streams->size()) : 0;
    if (have != desc.n_streams)
      throw std::invalid_argument("train: descriptor expects " + std::to_string(desc.n_streams) +
                                  " streams, got " + std::to_string(have));
  }
  std::vector<StreamLookup> lookups;
  if (streams) lookups = build_lookups(*streams);

  Rng init_rng(opts.seed);
  Rng shuffle_rng(opts.seed ^ kShuffleSalt);

  auto record_trace_or_abort = [&](double epoch_loss) {
    bundle.loss_trace.push_back(epoch_loss);
    if (!std::isfinite(epoch_loss)) {
      std::string msg = "training diverged (non-finite loss) at epoch " +
                        std::to_string(bundle.loss_trace.size()) + "; trace:";
      for (double l : bundle.loss_trace) msg += " " + fmt_g17(l);
      throw std::runtime_error(msg);
    }
  };

  if (uses_graph_pattern(desc)) {
    if (!data.graph) throw std::invalid_argument("train: graph model needs the bin graph");
    GnnCoderNet net(net_shape(desc));
    std::vector<ParamRef> params = net.params();
    nn::init_params(params, init_rng);
    Neighborhoods nbrs = Neighborhoods::from_adjacency(data.graph->adjacency());
    std::vector<GraphBatch> batches =
        group_by_period(set, *data.graph, streams, streams ? &lookups : nullptr);
    nn::AdamState adam(params, opts.learning_rate);

    std::vector<std::size_t> order(batches.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
      shuffle_rng.shuffle(order);
      double loss_sum = 0.0;
      for (std::size_t idx : order) {
        const GraphBatch& b = batches[idx];
        const Tensor2& pred = net.forward(b.lookbacks, b.streams, nbrs);
        nn::MseResult loss = nn::mse_loss(pred.data, b.targets);
        loss_sum += loss.loss;
        Tensor2 grad(pred.rows, 1);
        grad.data = loss.grad;
        net.zero_grads();
        net.backward(grad);
        adam.step(params);
      }
      record_trace_or_abort(loss_sum / static_cast<double>(batches.size()));
    }

    // clean pass for the recorded final loss
    double sum = 0.0;
    std::size_t n_pairs = 0;
    for (const GraphBatch& b : batches) {
      const Tensor2& pred = net.forward(b.lookbacks, b.streams, nbrs);
      for (int i = 0; i < pred.rows; ++i) {
        double d = pred(i, 0) - b.targets[i];
        sum += d * d;
      }
      n_pairs += b.targets.size();
    }
    bundle.provenance.final_train_loss = sum / static_cast<double>(n_pairs);
    bundle.blocks = export_blocks(params);
    return bundle;
  }

  if (uses_lstm_pattern(desc)) {
    LstmNet net(net_shape(desc));
    std::vector<ParamRef> params = net.params();
    nn::init_params(params, init_rng);
    nn::AdamState adam(params, opts.learning_rate);
    if (opts.batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");

    std::vector<const SampleWindow*> all;
    all.reserve(set.samples.size());
    for (const SampleWindow& w : set.samples) all.push_back(&w);

    std::vector<std::size_t> order(all.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
      shuffle_rng.shuffle(order);
      double loss_sum = 0.0;
      for (std::size_t start = 0; start < order.size(); start += opts.batch_size) {
        std::size_t end = std::min(order.size(), start + opts.batch_size);
        std::vector<const SampleWindow*> batch;
        std::vector<double> targets;
        batch.reserve(end - start);
        for (std::size_t i = start; i < end; ++i) {
          batch.push_back(all[order[i]]);
          targets.push_back(all[order[i]]->target);
        }
        std::vector<Tensor2> steps = batch_steps(batch, desc.lookback, desc.n_features);
        Tensor2 svals = streams ? stream_matrix(batch, *streams, lookups)
                                : Tensor2(static_cast<int>(batch.size()), 0);
        const Tensor2& pred = net.forward(steps, svals);
        nn::MseResult loss = nn::mse_loss(pred.data, targets);
        loss_sum += loss.loss * static_cast<double>(batch.size());
        Tensor2 grad(pred.rows, 1);
        grad.data = loss.grad;
        net.zero_grads();
        net.backward(grad);
        adam.step(params);
      }
      record_trace_or_abort(loss_sum / static_cast<double>(all.size()));
    }

    double sum = 0.0;
    for (std::size_t start = 0; start < all.size(); start += 1024) {
      std::size_t end = std::min(all.size(), start + 1024);
      std::vector<const SampleWindow*> batch(all.begin() + start, all.begin() + end);
      std::vector<Tensor2> steps = batch_steps(batch, desc.lookback, desc.n_features);
      Tensor2 svals = streams ? stream_matrix(batch, *streams, lookups)
                              : Tensor2(static_cast<int>(batch.size()), 0);
      const Tensor2& pred = net.forward(steps, svals);
      for (std::size_t i = 0; i < batch.size(); ++i) {
        double d = pred(static_cast<int>(i), 0) - batch[i]->target;
        sum += d * d;
      }
    }
    bundle.provenance.final_train_loss = sum / static_cast<double>(all.size());
    bundle.blocks = export_blocks(params);
    return bundle;
  }

  throw std::logic_error("train: unhandled model kind");
}

// ---- prediction ---------------------------------------------------------------

ForecastStream predict_model(const ModelBundle& bundle, const PredictInputs& in) {
  const ModelDesc& desc = bundle.desc;
  desc.validate();
  ForecastStream out;
  out.model_name = desc.name;
  if (!in.samples) throw std::invalid_argument("predict: needs samples");
  const SampleSet& set = *in.samples;

  if (desc.kind == ModelKind::persistence) {
    for (const SampleWindow& w : set.samples)
      out.entries.push_back({w.bin, w.t_target, persistence_prediction(w)});
    out.sort_entries();
    return out;
  }

  if (desc.kind == ModelKind::mean) {
    if (bundle.blocks.size() != 1 || bundle.desc.bins.empty())
      throw std::runtime_error("predict: mean baseline bundle is untrained");
    std::unordered_map<int, double> means;
    for (std::size_t r = 0; r < bundle.desc.bins.size(); ++r)
      means[bundle.desc.bins[r]] = bundle.blocks[0].values[r];
    for (const SampleWindow& w : set.samples) {
      auto it = means.find(w.bin);
      if (it == means.end())
        throw std::runtime_error("predict: no stored mean for bin " + std::to_string(w.bin));
      out.entries.push_back({w.bin, w.t_target, it->second});
    }
    out.sort_entries();
    return out;
  }

  if (set.lookback_len != desc.lookback || static_cast<int>(set.columns.size()) != desc.n_features)
    throw std::invalid_argument("predict: sample layout does not match the descriptor");

  std::vector<StreamLookup> lookups;
  if (in.streams) lookups = build_lookups(*in.streams);
  if (desc.kind == ModelKind::multifoundation) {
    int have = in.streams ? static_cast<int>(in.streams->size()) : 0;
    if (have != desc.n_streams)
      throw std::invalid_argument("predict: descriptor expects " + std::to_string(desc.n_streams) +
                                  " streams, got " + std::to_string(have));
  }

  if (uses_graph_pattern(desc)) {
    if (!in.graph) throw std::invalid_argument("predict: graph model needs the bin graph");
    GnnCoderNet net(net_shape(desc));
    import_blocks(bundle.blocks, net.params());
    Neighborhoods nbrs = Neighborhoods::from_adjacency(in.graph->adjacency());
    std::vector<GraphBatch> batches =
        group_by_period(set, *in.graph, in.streams, in.streams ? &lookups : nullptr);
    for (const GraphBatch& b : batches) {
      const Tensor2& pred = net.forward(b.lookbacks, b.streams, nbrs);
      for (int i = 0; i < pred.rows; ++i)
        out.entries.push_back({in.graph->nodes[i].bin, b.t, pred(i, 0)});
    }
    out.sort_entries();
    return out;
  }

  if (uses_lstm_pattern(desc)) {
    LstmNet net(net_shape(desc));
    import_blocks(bundle.blocks, net.params());
    std::vector<const SampleWindow*> all;
    for (const SampleWindow& w : set.samples) all.push_back(&w);
    for (std::size_t start = 0; start < all.size(); start += 1024) {
      std::size_t end = std::min(all.size(), start + 1024);
      std::vector<const SampleWindow*> batch(all.begin() + start, all.begin() + end);
      std::vector<Tensor2> steps = batch_steps(batch, desc.lookback, desc.n_features);
      Tensor2 svals = in.streams ? stream_matrix(batch, *in.streams, lookups)
                                 : Tensor2(static_cast<int>(batch.size()), 0);
      const Tensor2& pred = net.forward(steps, svals);
      for (std::size_t i = 0; i < batch.size(); ++i)
        out.entries.push_back({batch[i]->bin, batch[i]->t_target, pred(static_cast<int>(i), 0)});
    }
    out.sort_entries();
    return out;
  }

  throw std::logic_error("predict: unhandled model kind");
}

// ---- bundle persistence --------------------------------------------------------

void save_bundle(const ModelBundle& bundle, const std::string& dir) {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["name"] = bundle.desc.name;
  manifest["kind"] = to_string(bundle.desc.kind);
  manifest["hidden"] = bundle.desc.hidden;
  manifest["gat_layers"] = bundle.desc.gat_layers;
  manifest["lookback"] = bundle.desc.lookback;
  manifest["n_features"] = bundle.desc.n_features;
  manifest["n_streams"] = bundle.desc.n_streams;
  manifest["pattern"] = bundle.desc.pattern == PatternKind::lstm ? "lstm" : "gat";
  manifest["leaky_slope"] = bundle.desc.leaky_slope;
  manifest["bins"] = bundle.desc.bins;
  manifest["provenance"] = {{"seed", bundle.provenance.seed},
                            {"epochs", bundle.provenance.epochs},
                            {"learning_rate", bundle.provenance.learning_rate},
                            {"batch_size", bundle.provenance.batch_size},
                            {"final_train_loss", bundle.provenance.final_train_loss}};
  json blocks = json::array();
  for (const ParamBlockData& b : bundle.blocks)
    blocks.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}});
  manifest["blocks"] = blocks;
  manifest["loss_trace"] = bundle.loss_trace;

  std::ofstream mf(dir + "/manifest.json");
  if (!mf) throw std::runtime_error("cannot write " + dir + "/manifest.json");
  mf << manifest.dump(2) << '\n';

  std::ofstream pf(dir + "/params.tsv");
  if (!pf) throw std::runtime_error("cannot write " + dir + "/params.tsv");
  for (const ParamBlockData& b : bundle.blocks) {
    pf << b.name;
    for (double v : b.values) pf << '\t' << fmt_g17(v);
    pf << '\n';
  }
}

ModelBundle load_bundle(const std::string& dir) {
  std::ifstream mf(dir + "/manifest.json");
  if (!mf) throw std::runtime_error("cannot read " + dir + "/manifest.json");
  json manifest = json::parse(mf);
  ModelBundle bundle;
  bundle.desc.name = manifest.at("name").get<std::string>();
  bundle.desc.kind = model_kind_from_string(manifest.at("kind").get<std::string>());
  bundle.desc.hidden = manifest.at("hidden").get<int>();
  bundle.desc.gat_layers = manifest.at("gat_layers").get<int>();
  bundle.desc.lookback = manifest.at("lookback").get<int>();
  bundle.desc.n_features = manifest.at("n_features").get<int>();
  bundle.desc.n_streams = manifest.at("n_streams").get<int>();
  bundle.desc.pattern =
      manifest.at("pattern").get<std::string>() == "gat" ? PatternKind::gat : PatternKind::lstm;
  bundle.desc.leaky_slope = manifest.at("leaky_slope").get<double>();
  bundle.desc.bins = manifest.at("bins").get<std::vector<int>>();
  const json& prov = manifest.at("provenance");
  bundle.provenance.seed = prov.at("seed").get<std::uint64_t>();
  bundle.provenance.epochs = prov.at("epochs").get<int>();
  bundle.provenance.learning_rate = prov.at("learning_rate").get<double>();
  bundle.provenance.batch_size = prov.at("batch_size").get<int>();
  bundle.provenance.final_train_loss = prov.at("final_train_loss").get<double>();
  bundle.loss_trace = manifest.at("loss_trace").get<std::vector<double>>();

  std::vector<ParamBlockData> blocks;
  for (const json& b : manifest.at("blocks"))
    blocks.push_back({b.at("name").get<std::string>(), b.at("rows").get<int>(),
                      b.at("cols").get<int>(), {}});

  std::ifstream pf(dir + "/params.tsv");
  if (!pf) throw std::runtime_error("cannot read " + dir + "/params.tsv");
  std::string line;
  std::size_t idx = 0;
  while (std::getline(pf, line)) {
    if (trim(line).empty()) continue;
    if (idx >= blocks.size()) throw std::runtime_error("params.tsv has more rows than the manifest");
    std::istringstream ss(line);
    std::string tok;
    std::getline(ss, tok, '\t');
    if (tok != blocks[idx].name)
      throw std::runtime_error("params.tsv row '" + tok + "' does not match manifest block '" +
                               blocks[idx].name + "'");
    while (std::getline(ss, tok, '\t')) blocks[idx].values.push_back(parse_double(tok));
    std::size_t expect = static_cast<std::size_t>(blocks[idx].rows) * blocks[idx].cols;
    if (blocks[idx].values.size() != expect)
      throw std::runtime_error("params.tsv block '" + blocks[idx].name + "' has wrong length");
    ++idx;
  }
  if (idx != blocks.size()) throw std::runtime_error("params.tsv is missing blocks");
  bundle.blocks = std::move(blocks);
  return bundle;
}

}  // namespace quakecast
