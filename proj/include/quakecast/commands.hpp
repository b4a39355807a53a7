#pragma once

#include <string>
#include <vector>

#include "quakecast/config.hpp"

namespace quakecast {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Pipeline stages. Each writes its artifacts plus a manifest (stage name,
/// config hash, input digests, toolkit version) under the run's output
/// directory, is deterministic for a fixed config and seed, and fails with a
/// message naming the prior command when an upstream artifact is missing.
void cmd_ingest(const RunConfig& config);
void cmd_build(const RunConfig& config);
void cmd_features(const RunConfig& config);
void cmd_train(const RunConfig& config, const std::string& model_name);
void cmd_predict(const RunConfig& config, const std::string& model_name, const std::string& split);
void cmd_eval(const RunConfig& config, const std::vector<std::string>& stream_paths,
              const std::string& split);
void cmd_nowcast_roc(const RunConfig& config);

// artifact locations under config.out_dir
std::string ingest_catalog_path(const RunConfig& config);
std::string series_dir(const RunConfig& config);
std::string graph_dir(const RunConfig& config);
std::string features_dir(const RunConfig& config);
std::string train_dir(const RunConfig& config, const std::string& model_name);
std::string predict_stream_path(const RunConfig& config, const std::string& model_name,
                                const std::string& split);
std::string eval_dir(const RunConfig& config);
std::string nowcast_dir(const RunConfig& config);

}  // namespace quakecast
