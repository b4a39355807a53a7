#include "quakecast/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "quakecast/util.hpp"

namespace quakecast {

using nlohmann::json;

RunConfig default_config() {
  RunConfig c;
  c.region.t_start = parse_utc("1986-01-01T00:00:00Z");
  c.region.t_end = parse_utc("2024-05-01T00:00:00Z");
  c.period_anchor = c.region.t_start;
  return c;
}

void RunConfig::validate(bool require_catalog) const {
  std::vector<std::string> problems;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  };

  if (require_catalog) {
    check(!catalog_path.empty(), "catalog path is empty");
    if (!catalog_path.empty())
      check(std::filesystem::exists(catalog_path), "catalog file not found: " + catalog_path);
  }
  check(!out_dir.empty(), "output directory is empty");
  try {
    region.validate();
  } catch (const std::exception& e) {
    problems.push_back(e.what());
  }
  check(cell_size > 0.0, "cell_size must be positive");
  check(period_days >= 1, "period_days must be >= 1");
  check(active_bin_count >= 1, "active_bins must be >= 1");
  check(epsilon > 0.0, "epsilon must be positive");
  check(lookback >= 1, "lookback must be >= 1");
  check(split_fraction > 0.0 && split_fraction < 1.0, "split_fraction must be in (0,1)");
  try {
    features.validate();
  } catch (const std::exception& e) {
    problems.push_back(e.what());
  }
  std::set<std::string> names;
  for (const ModelConfig& m : models) {
    check(!m.name.empty(), "a model entry has no name");
    check(names.insert(m.name).second, "duplicate model name: " + m.name);
    check(m.epochs >= 0, "model " + m.name + ": epochs must be >= 0");
    check(m.batch_size >= 1, "model " + m.name + ": batch_size must be >= 1");
    check(m.learning_rate > 0.0, "model " + m.name + ": learning_rate must be positive");
    if (m.kind == ModelKind::multifoundation)
      check(!m.stream_files.empty(), "model " + m.name + ": multifoundation needs stream files");
    if (m.kind != ModelKind::multifoundation)
      check(m.stream_files.empty(), "model " + m.name + ": only multifoundation takes stream files");
  }
  check(!nowcast.ema_spans.empty(), "nowcast ema_spans is empty");
  check(!nowcast.lambdas.empty(), "nowcast lambdas is empty");
  for (double l : nowcast.lambdas)
    check(l >= 0.0 && l <= 1.0, "nowcast lambda out of [0,1]");
  check(nowcast.horizon_months >= 1, "nowcast horizon must be >= 1 month");

  if (!problems.empty()) {
    std::string msg = "configuration invalid:";
    for (const std::string& p : problems) msg += "\n  - " + p;
    throw std::runtime_error(msg);
  }
}

const ModelConfig& RunConfig::model(const std::string& name) const {
  for (const ModelConfig& m : models)
    if (m.name == name) return m;
  throw std::runtime_error("config has no model named '" + name + "'");
}

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw std::runtime_error("config: unknown key '" + it.key() + "' in " + where);
}

PatternKind pattern_from_string(const std::string& s) {
  if (s == "lstm") return PatternKind::lstm;
  if (s == "gat") return PatternKind::gat;
  throw std::runtime_error("config: unknown pattern kind '" + s + "'");
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path);
  json j = json::parse(in);
  RunConfig c = default_config();

  reject_unknown_keys(j,
                      {"catalog", "out_dir", "region", "cell_size", "period_days", "period_anchor",
                       "active_bins", "epsilon", "lookback", "split_fraction", "features", "seed",
                       "models", "nowcast", "eval"},
                      "top level");

  if (j.contains("catalog")) c.catalog_path = j["catalog"].get<std::string>();
  if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("region")) {
    const json& r = j["region"];
    reject_unknown_keys(r, {"lat_min", "lat_max", "lon_min", "lon_max", "t_start", "t_end"},
                        "region");
    if (r.contains("lat_min")) c.region.lat_min = r["lat_min"].get<double>();
    if (r.contains("lat_max")) c.region.lat_max = r["lat_max"].get<double>();
    if (r.contains("lon_min")) c.region.lon_min = r["lon_min"].get<double>();
    if (r.contains("lon_max")) c.region.lon_max = r["lon_max"].get<double>();
    if (r.contains("t_start")) c.region.t_start = parse_utc(r["t_start"].get<std::string>());
    if (r.contains("t_end")) c.region.t_end = parse_utc(r["t_end"].get<std::string>());
    if (!j.contains("period_anchor")) c.period_anchor = c.region.t_start;
  }
  if (j.contains("cell_size")) c.cell_size = j["cell_size"].get<double>();
  if (j.contains("period_days")) c.period_days = j["period_days"].get<int>();
  if (j.contains("period_anchor")) c.period_anchor = parse_utc(j["period_anchor"].get<std::string>());
  if (j.contains("active_bins")) c.active_bin_count = j["active_bins"].get<int>();
  if (j.contains("epsilon")) c.epsilon = j["epsilon"].get<double>();
  if (j.contains("lookback")) c.lookback = j["lookback"].get<int>();
  if (j.contains("split_fraction")) c.split_fraction = j["split_fraction"].get<double>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();

  if (j.contains("features")) {
    const json& f = j["features"];
    reject_unknown_keys(f,
                        {"use_multiplicity", "multiplicity_threshold", "multiplicity_windows_weeks",
                         "use_ema", "ema_spans"},
                        "features");
    if (f.contains("use_multiplicity")) c.features.use_multiplicity = f["use_multiplicity"].get<bool>();
    if (f.contains("multiplicity_threshold"))
      c.features.multiplicity_threshold = f["multiplicity_threshold"].get<double>();
    if (f.contains("multiplicity_windows_weeks"))
      c.features.multiplicity_windows_weeks = f["multiplicity_windows_weeks"].get<std::vector<int>>();
    if (f.contains("use_ema")) c.features.use_ema = f["use_ema"].get<bool>();
    if (f.contains("ema_spans")) c.features.ema_spans = f["ema_spans"].get<std::vector<int>>();
  }

  if (j.contains("models")) {
    for (const json& m : j["models"]) {
      reject_unknown_keys(m,
                          {"name", "kind", "hidden", "gat_layers", "epochs", "batch_size",
                           "learning_rate", "pattern", "streams", "seed"},
                          "models[]");
      ModelConfig mc;
      mc.name = m.at("name").get<std::string>();
      mc.kind = model_kind_from_string(m.at("kind").get<std::string>());
      if (m.contains("hidden")) mc.hidden = m["hidden"].get<int>();
      if (m.contains("gat_layers")) mc.gat_layers = m["gat_layers"].get<int>();
      if (m.contains("epochs")) mc.epochs = m["epochs"].get<int>();
      if (m.contains("batch_size")) mc.batch_size = m["batch_size"].get<int>();
      if (m.contains("learning_rate")) mc.learning_rate = m["learning_rate"].get<double>();
      if (m.contains("pattern")) mc.pattern = pattern_from_string(m["pattern"].get<std::string>());
      if (m.contains("streams")) mc.stream_files = m["streams"].get<std::vector<std::string>>();
      if (m.contains("seed")) mc.seed = m["seed"].get<std::uint64_t>();
      c.models.push_back(std::move(mc));
    }
  }

  if (j.contains("nowcast")) {
    const json& n = j["nowcast"];
    reject_unknown_keys(n, {"mag_threshold", "large_mag", "horizon_months", "ema_spans", "lambdas"},
                        "nowcast");
    if (n.contains("mag_threshold")) c.nowcast.mag_threshold = n["mag_threshold"].get<double>();
    if (n.contains("large_mag")) c.nowcast.large_mag = n["large_mag"].get<double>();
    if (n.contains("horizon_months")) c.nowcast.horizon_months = n["horizon_months"].get<int>();
    if (n.contains("ema_spans")) c.nowcast.ema_spans = n["ema_spans"].get<std::vector<int>>();
    if (n.contains("lambdas")) c.nowcast.lambdas = n["lambdas"].get<std::vector<double>>();
  }

  if (j.contains("eval")) {
    const json& e = j["eval"];
    reject_unknown_keys(e, {"per_bin_average", "series_bins"}, "eval");
    if (e.contains("per_bin_average")) c.eval_per_bin_average = e["per_bin_average"].get<bool>();
    if (e.contains("series_bins")) c.eval_series_bins = e["series_bins"].get<std::vector<int>>();
  }

  return c;
}

std::string config_canonical_json(const RunConfig& c) {
  json j;
  j["catalog"] = c.catalog_path;
  j["out_dir"] = c.out_dir;
  j["region"] = {{"lat_min", c.region.lat_min}, {"lat_max", c.region.lat_max},
                 {"lon_min", c.region.lon_min}, {"lon_max", c.region.lon_max},
                 {"t_start", format_utc(c.region.t_start)}, {"t_end", format_utc(c.region.t_end)}};
  j["cell_size"] = c.cell_size;
  j["period_days"] = c.period_days;
  j["period_anchor"] = format_utc(c.period_anchor);
  j["active_bins"] = c.active_bin_count;
  j["epsilon"] = c.epsilon;
  j["lookback"] = c.lookback;
  j["split_fraction"] = c.split_fraction;
  j["seed"] = c.seed;
  j["features"] = {{"use_multiplicity", c.features.use_multiplicity},
                   {"multiplicity_threshold", c.features.multiplicity_threshold},
                   {"multiplicity_windows_weeks", c.features.multiplicity_windows_weeks},
                   {"use_ema", c.features.use_ema},
                   {"ema_spans", c.features.ema_spans}};
  json models = json::array();
  for (const ModelConfig& m : c.models) {
    json jm;
    jm["name"] = m.name;
    jm["kind"] = to_string(m.kind);
    jm["hidden"] = m.hidden;
    jm["gat_layers"] = m.gat_layers;
    jm["epochs"] = m.epochs;
    jm["batch_size"] = m.batch_size;
    jm["learning_rate"] = m.learning_rate;
    jm["pattern"] = m.pattern == PatternKind::lstm ? "lstm" : "gat";
    jm["streams"] = m.stream_files;
    if (m.seed) jm["seed"] = *m.seed;
    models.push_back(jm);
  }
  j["models"] = models;
  j["nowcast"] = {{"mag_threshold", c.nowcast.mag_threshold},
                  {"large_mag", c.nowcast.large_mag},
                  {"horizon_months", c.nowcast.horizon_months},
                  {"ema_spans", c.nowcast.ema_spans},
                  {"lambdas", c.nowcast.lambdas}};
  j["eval"] = {{"per_bin_average", c.eval_per_bin_average}, {"series_bins", c.eval_series_bins}};
  return j.dump();
}

std::string config_hash(const RunConfig& c) { return to_hex(fnv1a64(config_canonical_json(c))); }

}  // namespace quakecast
