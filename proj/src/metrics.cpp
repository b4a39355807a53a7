#include "quakecast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "quakecast/util.hpp"

namespace quakecast {

using nlohmann::json;

namespace {

void check_lengths(std::span<const double> o, std::span<const double> p, std::size_t min_len,
                   const char* op) {
  if (o.size() != p.size())
    throw std::invalid_argument(std::string(op) + ": series lengths differ");
  if (o.size() < min_len)
    throw std::invalid_argument(std::string(op) + ": series too short");
}

}  // namespace

double nse(std::span<const double> observed, std::span<const double> predicted) {
  check_lengths(observed, predicted, 2, "nse");
  double mean = 0.0;
  for (double o : observed) mean += o;
  mean /= static_cast<double>(observed.size());
  double ss_res = 0.0, ss_var = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    double r = observed[i] - predicted[i];
    double d = observed[i] - mean;
    ss_res += r * r;
    ss_var += d * d;
  }
  if (ss_var == 0.0) throw std::runtime_error("nse: constant observed series (degenerate bin)");
  return 1.0 - ss_res / ss_var;
}

double nnse_from_nse(double nse_value) {
  if (nse_value > 1.0) throw std::invalid_argument("nnse: NSE cannot exceed 1");
  return 1.0 / (2.0 - nse_value);
}

double mse(std::span<const double> observed, std::span<const double> predicted) {
  check_lengths(observed, predicted, 1, "mse");
  double s = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    double d = observed[i] - predicted[i];
    s += d * d;
  }
  return s / static_cast<double>(observed.size());
}

double mae(std::span<const double> observed, std::span<const double> predicted) {
  check_lengths(observed, predicted, 1, "mae");
  double s = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) s += std::abs(observed[i] - predicted[i]);
  return s / static_cast<double>(observed.size());
}

MetricReport build_report(const std::vector<ForecastStream>& streams, const BinSeriesSet& truth,
                          const ReportOptions& options) {
  if (options.period_begin < 0 || options.period_end > truth.n_periods ||
      options.period_begin >= options.period_end)
    throw std::invalid_argument("report: bad evaluation window");

  MetricReport report;
  report.split = options.split_name;

  const int n_rows = static_cast<int>(truth.active_bins.size());
  const int window = options.period_end - options.period_begin;

  for (const ForecastStream& stream : streams) {
    std::unordered_map<std::int64_t, double> lookup;
    lookup.reserve(stream.entries.size());
    auto key = [](int bin, int period) {
      return (static_cast<std::int64_t>(bin) << 24) | static_cast<std::int64_t>(period);
    };
    for (const StreamEntry& e : stream.entries) lookup[key(e.bin, e.period)] = e.value;

    ModelMetrics mm;
    mm.model = stream.model_name;
    std::vector<double> pooled_obs, pooled_pred;
    pooled_obs.reserve(static_cast<std::size_t>(n_rows) * window);
    pooled_pred.reserve(static_cast<std::size_t>(n_rows) * window);

    std::vector<std::string> gaps;
    double nnse_sum = 0.0;
    int nnse_count = 0;
    for (int r = 0; r < n_rows; ++r) {
      int bin = truth.active_bins[r];
      std::vector<double> obs, pred;
      obs.reserve(window);
      pred.reserve(window);
      for (int p = options.period_begin; p < options.period_end; ++p) {
        auto it = lookup.find(key(bin, p));
        if (it == lookup.end()) {
          if (gaps.size() < 5)
            gaps.push_back("(bin " + std::to_string(bin) + ", period " + std::to_string(p) + ")");
          continue;
        }
        obs.push_back(truth.values[r][p]);
        pred.push_back(it->second);
      }
      if (!gaps.empty()) continue;

      BinMetrics bm;
      bm.bin = bin;
      bm.n = static_cast<int>(obs.size());
      bm.mse = mse(obs, pred);
      bm.mae = mae(obs, pred);
      try {
        bm.nse = nse(obs, pred);
        bm.nnse = nnse_from_nse(bm.nse);
        nnse_sum += bm.nnse;
        ++nnse_count;
      } catch (const std::runtime_error&) {
        bm.degenerate = true;
        mm.degenerate_bins++;
      }
      mm.per_bin.push_back(bm);
      pooled_obs.insert(pooled_obs.end(), obs.begin(), obs.end());
      pooled_pred.insert(pooled_pred.end(), pred.begin(), pred.end());
    }
    if (!gaps.empty()) {
      std::string msg = "report: stream '" + stream.model_name + "' has coverage gaps:";
      for (const std::string& g : gaps) msg += " " + g;
      throw std::runtime_error(msg);
    }

    mm.pooled_mse = mse(pooled_obs, pooled_pred);
    mm.pooled_mae = mae(pooled_obs, pooled_pred);
    mm.pooled_nse = nse(pooled_obs, pooled_pred);
    mm.pooled_nnse = nnse_from_nse(mm.pooled_nse);
    mm.bin_averaged_nnse = nnse_count > 0 ? nnse_sum / nnse_count : 0.0;
    report.models.push_back(std::move(mm));
  }

  std::stable_sort(report.models.begin(), report.models.end(),
                   [](const ModelMetrics& a, const ModelMetrics& b) {
                     return a.pooled_mse > b.pooled_mse;
                   });
  return report;
}

void save_report(const MetricReport& report, const std::string& csv_path,
                 const std::string& json_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write " + csv_path);
  csv << "model,mse,mae,nnse\n";
  for (const ModelMetrics& m : report.models)
    csv << m.model << ',' << fmt_g17(m.pooled_mse) << ',' << fmt_g17(m.pooled_mae) << ','
        << fmt_g17(m.pooled_nnse) << '\n';

  json detail;
  detail["split"] = report.split;
  json models = json::array();
  for (const ModelMetrics& m : report.models) {
    json jm;
    jm["model"] = m.model;
    jm["pooled_mse"] = m.pooled_mse;
    jm["pooled_mae"] = m.pooled_mae;
    jm["pooled_nse"] = m.pooled_nse;
    jm["pooled_nnse"] = m.pooled_nnse;
    jm["bin_averaged_nnse"] = m.bin_averaged_nnse;
    jm["degenerate_bins"] = m.degenerate_bins;
    json bins = json::array();
    for (const BinMetrics& b : m.per_bin) {
      json jb;
      jb["bin"] = b.bin;
      jb["n"] = b.n;
      jb["mse"] = b.mse;
      jb["mae"] = b.mae;
      if (b.degenerate) {
        jb["degenerate"] = true;
      } else {
        jb["nse"] = b.nse;
        jb["nnse"] = b.nnse;
      }
      bins.push_back(jb);
    }
    jm["bins"] = bins;
    models.push_back(jm);
  }
  detail["models"] = models;
  std::ofstream jf(json_path);
  if (!jf) throw std::runtime_error("cannot write " + json_path);
  jf << detail.dump(2) << '\n';
}

}  // namespace quakecast
