// Command-line front end for the nowcasting pipeline. Stages are re-runnable
// and deterministic for a fixed config and seed; see README for the workflow.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "quakecast/commands.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

quakecast::RunConfig resolve_config(const CommonArgs& args) {
  quakecast::RunConfig config =
      args.config_path.empty() ? quakecast::default_config() : quakecast::load_config(args.config_path);
  // precedence: flags > config file > defaults
  if (!args.out_dir.empty()) config.out_dir = args.out_dir;
  if (args.seed_set) config.seed = args.seed;
  return config;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Run configuration JSON");
  cmd->add_option("--out", args.out_dir, "Output directory (overrides config)");
  cmd->add_option("--seed", args.seed, "Base RNG seed (overrides config)")
      ->each([&args](const std::string&) { args.seed_set = true; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quakecast: seismic time-series nowcasting pipeline"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string model_name;
  std::string split = "test";
  std::vector<std::string> stream_paths;

  CLI::App* ingest = app.add_subcommand("ingest", "Parse and filter the raw catalog");
  add_common(ingest, args);

  CLI::App* build = app.add_subcommand("build", "Build the bin series and the bin graph");
  add_common(build, args);

  CLI::App* features = app.add_subcommand("features", "Build supervised sample windows");
  add_common(features, args);

  CLI::App* train = app.add_subcommand("train", "Train one configured model");
  add_common(train, args);
  train->add_option("--model", model_name, "Model name from the config")->required();

  CLI::App* predict = app.add_subcommand("predict", "Emit a forecast stream from a trained model");
  add_common(predict, args);
  predict->add_option("--model", model_name, "Model name from the config")->required();
  predict->add_option("--split", split, "Target split: train or test");

  CLI::App* eval = app.add_subcommand("eval", "Score forecast streams against the truth series");
  add_common(eval, args);
  eval->add_option("--split", split, "Evaluation split: train or test");
  eval->add_option("streams", stream_paths, "Forecast stream CSV files")->required();

  CLI::App* nowcast = app.add_subcommand("nowcast-roc", "Optimize the two-parameter nowcast filter");
  add_common(nowcast, args);

  CLI11_PARSE(app, argc, argv);

  try {
    quakecast::RunConfig config = resolve_config(args);
    if (ingest->parsed()) quakecast::cmd_ingest(config);
    if (build->parsed()) quakecast::cmd_build(config);
    if (features->parsed()) quakecast::cmd_features(config);
    if (train->parsed()) quakecast::cmd_train(config, model_name);
    if (predict->parsed()) quakecast::cmd_predict(config, model_name, split);
    if (eval->parsed()) quakecast::cmd_eval(config, stream_paths, split);
    if (nowcast->parsed()) quakecast::cmd_nowcast_roc(config);
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 1;
  }
  return 0;
}
