#include "quakecast/commands.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "quakecast/graph.hpp"
#include "quakecast/metrics.hpp"
#include "quakecast/nowcast.hpp"
#include "quakecast/util.hpp"

namespace quakecast {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_artifact(const std::string& path, const std::string& prior_command) {
  if (!fs::exists(path))
    throw std::runtime_error("missing artifact " + path + "; run '" + prior_command + "' first");
}

void write_manifest(const std::string& dir, const std::string& stage, const RunConfig& config,
                    const std::map<std::string, std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  json m;
  m["stage"] = stage;
  m["toolkit_version"] = kToolkitVersion;
  m["config_hash"] = config_hash(config);
  json in = json::object();
  for (const auto& [path, digest] : inputs) in[path] = digest;
  m["inputs"] = in;
  m["outputs"] = outputs;
  std::ofstream out(dir + "/manifest.json");
  if (!out) throw std::runtime_error("cannot write " + dir + "/manifest.json");
  out << m.dump(2) << '\n';
}

SplitSpec split_spec_for(const RunConfig& config, const BinSeriesSet& series) {
  return make_split_spec(config.split_fraction, series.n_periods);
}

struct LoadedSamples {
  SampleSet train;
  SampleSet test;
};

LoadedSamples load_feature_samples(const RunConfig& config) {
  std::string dir = features_dir(config);
  require_artifact(dir + "/samples_meta.json", "quakecast features");
  LoadedSamples s;
  s.train = load_samples(dir + "/samples_meta.json", dir + "/samples_train.tsv");
  s.test = load_samples(dir + "/samples_meta.json", dir + "/samples_test.tsv");
  return s;
}

std::uint64_t model_seed(const RunConfig& config, const ModelConfig& mc) {
  return mc.seed ? *mc.seed : config.seed;
}

ModelDesc desc_from_config(const RunConfig& config, const ModelConfig& mc, int n_features) {
  ModelDesc d;
  d.name = mc.name;
  d.kind = mc.kind;
  d.hidden = mc.hidden;
  d.gat_layers = mc.gat_layers;
  d.lookback = config.lookback;
  d.n_features = n_features;
  d.n_streams = static_cast<int>(mc.stream_files.size());
  d.pattern = mc.pattern;
  return d;
}

bool model_needs_graph(const ModelConfig& mc) {
  return mc.kind == ModelKind::gnncoder ||
         (mc.kind == ModelKind::multifoundation && mc.pattern == PatternKind::gat);
}

}  // namespace

std::string ingest_catalog_path(const RunConfig& c) { return c.out_dir + "/ingest/catalog.csv"; }
std::string series_dir(const RunConfig& c) { return c.out_dir + "/build/series"; }
std::string graph_dir(const RunConfig& c) { return c.out_dir + "/build/graph"; }
std::string features_dir(const RunConfig& c) { return c.out_dir + "/features"; }
std::string train_dir(const RunConfig& c, const std::string& m) { return c.out_dir + "/train/" + m; }
std::string predict_stream_path(const RunConfig& c, const std::string& m, const std::string& split) {
  return c.out_dir + "/predict/" + m + "_" + split + ".csv";
}
std::string eval_dir(const RunConfig& c) { return c.out_dir + "/eval"; }
std::string nowcast_dir(const RunConfig& c) { return c.out_dir + "/nowcast_roc"; }

void cmd_ingest(const RunConfig& config) {
  config.validate(/*require_catalog=*/true);
  ParseResult parsed = parse_catalog_file(config.catalog_path);
  std::vector<CatalogEvent> kept = filter_region(parsed.events, config.region);

  std::string dir = config.out_dir + "/ingest";
  fs::create_directories(dir);
  {
    std::ofstream out(dir + "/catalog.csv");
    if (!out) throw std::runtime_error("cannot write " + dir + "/catalog.csv");
    write_catalog(out, kept);
  }
  {
    json stats;
    stats["rows_total"] = parsed.rows_total;
    stats["rows_skipped"] = parsed.rows_skipped;
    stats["magnitudes_clamped"] = parsed.magnitudes_clamped;
    stats["events_parsed"] = parsed.events.size();
    stats["events_in_region"] = kept.size();
    std::ofstream out(dir + "/stats.json");
    out << stats.dump(2) << '\n';
  }
  write_manifest(dir, "ingest", config, {{config.catalog_path, file_digest(config.catalog_path)}},
                 {"catalog.csv", "stats.json"});
}

void cmd_build(const RunConfig& config) {
  config.validate(false);
  std::string catalog = ingest_catalog_path(config);
  require_artifact(catalog, "quakecast ingest");
  std::vector<CatalogEvent> events = parse_catalog_file(catalog).events;

  SpatialGrid grid = make_grid(config.region, config.cell_size);
  BinSeriesSet full = build_series(events, grid, static_cast<std::int64_t>(config.period_days) * 86400,
                                   config.period_anchor, config.region.t_end);
  std::vector<int> active = select_active_bins(full, config.active_bin_count);
  BinSeriesSet series = normalize(restrict_bins(full, active));
  save_series(series, series_dir(config));

  BinGraph graph = connect_components(epsilon_nng(make_nodes(grid, active), config.epsilon));
  save_graph(graph, graph_dir(config));

  std::string dir = config.out_dir + "/build";
  write_manifest(dir, "build", config, {{catalog, file_digest(catalog)}},
                 {"series/meta.json", "series/values.tsv", "series/counts.tsv", "graph/nodes.tsv",
                  "graph/edges.tsv"});
}

void cmd_features(const RunConfig& config) {
  config.validate(false);
  require_artifact(series_dir(config) + "/meta.json", "quakecast build");
  BinSeriesSet series = load_series(series_dir(config));

  std::vector<CatalogEvent> events;
  std::map<std::string, std::string> inputs = {
      {series_dir(config) + "/values.tsv", file_digest(series_dir(config) + "/values.tsv")}};
  if (config.features.use_multiplicity) {
    std::string catalog = ingest_catalog_path(config);
    require_artifact(catalog, "quakecast ingest");
    events = parse_catalog_file(catalog).events;
    inputs[catalog] = file_digest(catalog);
  }

  SplitSpec spec = split_spec_for(config, series);
  WindowBuild build =
      make_windows(series, events, config.features, config.lookback, spec.boundary_index);

  std::string dir = features_dir(config);
  fs::create_directories(dir);
  save_samples(build.train, dir + "/samples_meta.json", dir + "/samples_train.tsv");
  // the meta sidecar is shared; write it once more harmlessly for the test set
  save_samples(build.test, dir + "/samples_meta.json", dir + "/samples_test.tsv");
  write_manifest(dir, "features", config, inputs,
                 {"samples_meta.json", "samples_train.tsv", "samples_test.tsv"});
}

void cmd_train(const RunConfig& config, const std::string& model_name) {
  config.validate(false);
  const ModelConfig& mc = config.model(model_name);
  require_artifact(series_dir(config) + "/meta.json", "quakecast build");
  BinSeriesSet series = load_series(series_dir(config));
  SplitSpec spec = split_spec_for(config, series);

  LoadedSamples samples = load_feature_samples(config);
  std::map<std::string, std::string> inputs = {
      {features_dir(config) + "/samples_train.tsv",
       file_digest(features_dir(config) + "/samples_train.tsv")}};

  BinGraph graph;
  TrainData data;
  data.samples = &samples.train;
  data.series = &series;
  data.split_boundary = spec.boundary_index;
  if (model_needs_graph(mc)) {
    require_artifact(graph_dir(config) + "/nodes.tsv", "quakecast build");
    graph = load_graph(graph_dir(config));
    data.graph = &graph;
  }
  std::vector<ForecastStream> streams;
  if (!mc.stream_files.empty()) {
    for (const std::string& f : mc.stream_files) {
      require_artifact(f, "quakecast predict (or supply the stream file)");
      inputs[f] = file_digest(f);
    }
    streams = load_forecast_streams(mc.stream_files);
    data.streams = &streams;
  }

  ModelDesc desc = desc_from_config(config, mc, static_cast<int>(samples.train.columns.size()));
  TrainOptions opts{mc.epochs, mc.batch_size, mc.learning_rate, model_seed(config, mc)};
  ModelBundle bundle = train_model(desc, data, opts);

  std::string dir = train_dir(config, model_name);
  save_bundle(bundle, dir);
  {
    std::ofstream out(dir + "/loss_trace.csv");
    out << "epoch,loss\n";
    for (std::size_t e = 0; e < bundle.loss_trace.size(); ++e)
      out << e + 1 << ',' << fmt_g17(bundle.loss_trace[e]) << '\n';
  }
  write_manifest(dir, "train", config, inputs, {"manifest.json", "params.tsv", "loss_trace.csv"});
}

void cmd_predict(const RunConfig& config, const std::string& model_name, const std::string& split) {
  config.validate(false);
  if (split != "train" && split != "test")
    throw std::runtime_error("predict: split must be 'train' or 'test'");
  const ModelConfig& mc = config.model(model_name);

  std::string bundle_dir = train_dir(config, model_name);
  require_artifact(bundle_dir + "/manifest.json", "quakecast train");
  ModelBundle bundle = load_bundle(bundle_dir);

  LoadedSamples samples = load_feature_samples(config);
  PredictInputs in;
  in.samples = split == "train" ? &samples.train : &samples.test;

  BinGraph graph;
  if (model_needs_graph(mc)) {
    require_artifact(graph_dir(config) + "/nodes.tsv", "quakecast build");
    graph = load_graph(graph_dir(config));
    in.graph = &graph;
  }
  std::vector<ForecastStream> streams;
  if (!mc.stream_files.empty()) {
    streams = load_forecast_streams(mc.stream_files);
    in.streams = &streams;
  }

  ForecastStream stream = predict_model(bundle, in);
  fs::create_directories(config.out_dir + "/predict");
  std::string path = predict_stream_path(config, model_name, split);
  save_stream(stream, path);
  write_manifest(config.out_dir + "/predict", "predict", config,
                 {{bundle_dir + "/params.tsv", file_digest(bundle_dir + "/params.tsv")}},
                 {model_name + "_" + split + ".csv"});
}

void cmd_eval(const RunConfig& config, const std::vector<std::string>& stream_paths,
              const std::string& split) {
  config.validate(false);
  if (split != "train" && split != "test")
    throw std::runtime_error("eval: split must be 'train' or 'test'");
  if (stream_paths.empty()) throw std::runtime_error("eval: no stream files given");
  require_artifact(series_dir(config) + "/meta.json", "quakecast build");
  BinSeriesSet series = load_series(series_dir(config));
  SplitSpec spec = split_spec_for(config, series);

  std::map<std::string, std::string> inputs;
  std::vector<ForecastStream> streams;
  for (const std::string& p : stream_paths) {
    require_artifact(p, "quakecast predict");
    inputs[p] = file_digest(p);
    streams.push_back(load_stream(p));
  }

  ReportOptions opt;
  opt.split_name = split;
  if (split == "test") {
    opt.period_begin = spec.boundary_index;
    opt.period_end = series.n_periods;
  } else {
    opt.period_begin = config.lookback;
    opt.period_end = spec.boundary_index;
  }
  MetricReport report = build_report(streams, series, opt);

  std::string dir = eval_dir(config);
  fs::create_directories(dir);
  save_report(report, dir + "/report_" + split + ".csv", dir + "/report_" + split + ".json");
  std::vector<std::string> outputs = {"report_" + split + ".csv", "report_" + split + ".json"};

  // plot-ready truth-vs-prediction series for requested bins
  for (int bin : config.eval_series_bins) {
    int row = series.row_of_bin(bin);
    if (row < 0) throw std::runtime_error("eval: series_bins entry " + std::to_string(bin) +
                                          " is not an active bin");
    for (const ForecastStream& s : streams) {
      std::string name = "series_" + s.model_name + "_bin" + std::to_string(bin) + "_" + split + ".csv";
      std::ofstream out(dir + "/" + name);
      if (!out) throw std::runtime_error("cannot write " + dir + "/" + name);
      out << "period,truth,prediction\n";
      for (const StreamEntry& e : s.entries) {
        if (e.bin != bin || e.period < opt.period_begin || e.period >= opt.period_end) continue;
        out << e.period << ',' << fmt_g17(series.values[row][e.period]) << ','
            << fmt_g17(e.value) << '\n';
      }
      outputs.push_back(name);
    }
  }
  write_manifest(dir, "eval", config, inputs, outputs);
}

void cmd_nowcast_roc(const RunConfig& config) {
  config.validate(false);
  std::string catalog = ingest_catalog_path(config);
  require_artifact(catalog, "quakecast ingest");
  std::vector<CatalogEvent> events = parse_catalog_file(catalog).events;

  MonthlySeries months = monthly_small_rate(events, config.region, config.nowcast.mag_threshold);
  std::vector<int> labels = label_months_before_event(events, config.region, config.nowcast.large_mag,
                                                      config.nowcast.horizon_months, months);
  FilterOptimum opt = optimize_filter(months.counts, labels, config.nowcast.ema_spans,
                                      config.nowcast.lambdas);
  std::vector<double> best_curve = nowcast_curve(months.counts, opt.best);
  RocCurve roc = roc_skill(best_curve, labels);

  std::string dir = nowcast_dir(config);
  fs::create_directories(dir);
  {
    std::ofstream out(dir + "/monthly_rate.csv");
    out << "month_index,count,label\n";
    for (std::size_t t = 0; t < months.counts.size(); ++t)
      out << t << ',' << fmt_g17(months.counts[t]) << ',' << labels[t] << '\n';
  }
  {
    std::ofstream out(dir + "/skill_surface.csv");
    out << "ema_span,lambda,skill\n";
    for (const SkillPoint& p : opt.surface)
      out << p.params.ema_span << ',' << fmt_g17(p.params.correction_weight) << ','
          << fmt_g17(p.skill) << '\n';
  }
  {
    std::ofstream out(dir + "/roc_best.csv");
    out << "threshold,fpr,tpr\n";
    for (std::size_t i = 0; i < roc.thresholds.size(); ++i)
      out << fmt_g17(roc.thresholds[i]) << ',' << fmt_g17(roc.false_positive_rates[i]) << ','
          << fmt_g17(roc.true_positive_rates[i]) << '\n';
  }
  {
    // best nowcast series in the single-row series matrix format
    std::ofstream out(dir + "/nowcast.tsv");
    for (std::size_t t = 0; t < best_curve.size(); ++t)
      out << (t ? "\t" : "") << fmt_g17(best_curve[t]);
    out << '\n';
  }
  {
    json best;
    best["ema_span"] = opt.best.ema_span;
    best["lambda"] = opt.best.correction_weight;
    best["skill"] = opt.best_skill;
    std::ofstream out(dir + "/best.json");
    out << best.dump(2) << '\n';
  }
  write_manifest(dir, "nowcast-roc", config, {{catalog, file_digest(catalog)}},
                 {"monthly_rate.csv", "skill_surface.csv", "roc_best.csv", "nowcast.tsv", "best.json"});
}

}  // namespace quakecast
