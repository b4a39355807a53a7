#include "quakecast/gridding.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "quakecast/util.hpp"

namespace quakecast {

using nlohmann::json;

std::pair<double, double> SpatialGrid::bin_center(int bin) const {
  return {lat_min + (bin_row(bin) + 0.5) * cell_size, lon_min + (bin_col(bin) + 0.5) * cell_size};
}

SpatialGrid make_grid(const RegionFilter& region, double cell_size) {
  region.validate();
  if (!(cell_size > 0.0)) throw std::invalid_argument("grid: cell_size must be positive");
  SpatialGrid g;
  g.lat_min = region.lat_min;
  g.lon_min = region.lon_min;
  g.cell_size = cell_size;
  g.n_rows = static_cast<int>(std::llround((region.lat_max - region.lat_min) / cell_size));
  g.n_cols = static_cast<int>(std::llround((region.lon_max - region.lon_min) / cell_size));
  if (g.n_rows < 1 || g.n_cols < 1) throw std::invalid_argument("grid: region smaller than one cell");
  auto fits = [&](double span, int n) { return std::abs(span - n * cell_size) < 1e-9; };
  if (!fits(region.lat_max - region.lat_min, g.n_rows) ||
      !fits(region.lon_max - region.lon_min, g.n_cols))
    throw std::invalid_argument("grid: region extent is not a whole number of cells");
  return g;
}

int assign_bin(double latitude, double longitude, const SpatialGrid& grid) {
  int row = static_cast<int>(std::floor((latitude - grid.lat_min) / grid.cell_size));
  int col = static_cast<int>(std::floor((longitude - grid.lon_min) / grid.cell_size));
  if (row < 0 || row >= grid.n_rows)
    throw std::out_of_range("grid: latitude " + fmt_g17(latitude) + " outside extent");
  if (col < 0 || col >= grid.n_cols)
    throw std::out_of_range("grid: longitude " + fmt_g17(longitude) + " outside extent");
  return row * grid.n_cols + col;
}

int assign_bin(const CatalogEvent& event, const SpatialGrid& grid) {
  return assign_bin(event.latitude, event.longitude, grid);
}

double log_energy(std::span<const double> magnitudes) {
  if (magnitudes.empty()) return 0.0;  // quiescent-period sentinel
  double max_exp = -1.0;
  for (double m : magnitudes) {
    if (!std::isfinite(m)) throw std::invalid_argument("log_energy: non-finite magnitude");
    max_exp = std::max(max_exp, 1.5 * m);
  }
  double sum = 0.0;
  for (double m : magnitudes) sum += std::pow(10.0, 1.5 * m - max_exp);
  return (max_exp + std::log10(sum)) / 1.5;
}

std::vector<std::int64_t> BinSeriesSet::times() const {
  std::vector<std::int64_t> out(n_periods);
  for (int p = 0; p < n_periods; ++p) out[p] = period_start(p);
  return out;
}

int BinSeriesSet::row_of_bin(int bin) const {
  for (std::size_t i = 0; i < active_bins.size(); ++i)
    if (active_bins[i] == bin) return static_cast<int>(i);
  return -1;
}

BinSeriesSet build_series(const std::vector<CatalogEvent>& events, const SpatialGrid& grid,
                          std::int64_t period_seconds, std::int64_t t_start, std::int64_t t_end) {
  if (period_seconds <= 0) throw std::invalid_argument("series: period length must be positive");
  if (t_end - t_start < period_seconds)
    throw std::invalid_argument("series: span shorter than one period");

  BinSeriesSet set;
  set.grid = grid;
  set.anchor_time = t_start;
  set.period_seconds = period_seconds;
  set.n_periods = static_cast<int>((t_end - t_start) / period_seconds);
  int n_bins = grid.total_bins();
  set.active_bins.resize(n_bins);
  std::iota(set.active_bins.begin(), set.active_bins.end(), 0);
  set.event_counts.assign(n_bins, std::vector<int>(set.n_periods, 0));
  set.values.assign(n_bins, std::vector<double>(set.n_periods, 0.0));

  // magnitudes per cell, in input (time) order so the per-cell reduction
  // order is fixed regardless of how the evaluation below is partitioned
  std::vector<std::vector<std::vector<double>>> cell_mags(
      n_bins, std::vector<std::vector<double>>(set.n_periods));
  for (const CatalogEvent& ev : events) {
    if (ev.time < t_start || ev.time >= t_start + set.n_periods * period_seconds) continue;
    int bin = assign_bin(ev, grid);
    int p = static_cast<int>((ev.time - t_start) / period_seconds);
    cell_mags[bin][p].push_back(ev.magnitude);
    set.event_counts[bin][p]++;
  }

  parallel_for(static_cast<std::size_t>(n_bins), [&](std::size_t b) {
    for (int p = 0; p < set.n_periods; ++p) {
      if (!cell_mags[b][p].empty()) set.values[b][p] = log_energy(cell_mags[b][p]);
    }
  });
  return set;
}

std::vector<int> select_active_bins(const BinSeriesSet& set, int k) {
  if (k < 0 || k > static_cast<int>(set.active_bins.size()))
    throw std::invalid_argument("select_active_bins: k out of range");
  std::vector<std::pair<long long, int>> totals;  // (count, bin id)
  totals.reserve(set.active_bins.size());
  for (std::size_t r = 0; r < set.active_bins.size(); ++r) {
    long long c = 0;
    for (int n : set.event_counts[r]) c += n;
    totals.emplace_back(c, set.active_bins[r]);
  }
  std::sort(totals.begin(), totals.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<int> out(k);
  for (int i = 0; i < k; ++i) out[i] = totals[i].second;
  return out;
}

BinSeriesSet restrict_bins(const BinSeriesSet& set, const std::vector<int>& bins) {
  BinSeriesSet out;
  out.grid = set.grid;
  out.anchor_time = set.anchor_time;
  out.period_seconds = set.period_seconds;
  out.n_periods = set.n_periods;
  out.norm_constant = set.norm_constant;
  out.active_bins = bins;
  out.values.reserve(bins.size());
  out.event_counts.reserve(bins.size());
  for (int bin : bins) {
    int r = set.row_of_bin(bin);
    if (r < 0) throw std::invalid_argument("restrict_bins: bin " + std::to_string(bin) + " not in set");
    out.values.push_back(set.values[r]);
    out.event_counts.push_back(set.event_counts[r]);
  }
  return out;
}

BinSeriesSet normalize(BinSeriesSet set) {
  double max_abs = 0.0;
  for (const auto& row : set.values)
    for (double v : row) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs == 0.0) throw std::runtime_error("normalize: all-zero series (degenerate dataset)");
  for (auto& row : set.values)
    for (double& v : row) v /= max_abs;
  set.norm_constant *= max_abs;
  return set;
}

SplitSpec make_split_spec(double train_fraction, int n_periods) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("split: train_fraction must be in (0,1)");
  SplitSpec spec;
  spec.train_fraction = train_fraction;
  spec.boundary_index = static_cast<int>(std::floor(train_fraction * n_periods));
  if (spec.boundary_index <= 0 || spec.boundary_index >= n_periods)
    throw std::invalid_argument("split: boundary falls at the series edge");
  return spec;
}

std::pair<SeriesView, SeriesView> split(const BinSeriesSet& set, const SplitSpec& spec) {
  if (spec.boundary_index <= 0 || spec.boundary_index >= set.n_periods)
    throw std::invalid_argument("split: boundary falls at the series edge");
  SeriesView train{&set, 0, spec.boundary_index};
  SeriesView test{&set, spec.boundary_index, set.n_periods};
  return {train, test};
}

namespace {

void write_matrix_tsv(const std::string& path, const std::vector<std::vector<double>>& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& row : m) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << '\t';
      out << fmt_g17(row[i]);
    }
    out << '\n';
  }
}

void write_counts_tsv(const std::string& path, const std::vector<std::vector<int>>& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& row : m) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << '\t';
      out << row[i];
    }
    out << '\n';
  }
}

}  // namespace

void save_series(const BinSeriesSet& set, const std::string& dir) {
  std::filesystem::create_directories(dir);
  json meta;
  meta["lat_min"] = set.grid.lat_min;
  meta["lon_min"] = set.grid.lon_min;
  meta["cell_size"] = set.grid.cell_size;
  meta["n_rows"] = set.grid.n_rows;
  meta["n_cols"] = set.grid.n_cols;
  meta["period_anchor"] = format_utc(set.anchor_time);
  meta["period_seconds"] = set.period_seconds;
  meta["n_periods"] = set.n_periods;
  meta["norm_constant"] = set.norm_constant;
  meta["active_bins"] = set.active_bins;
  std::ofstream mf(dir + "/meta.json");
  if (!mf) throw std::runtime_error("cannot write " + dir + "/meta.json");
  mf << meta.dump(2) << '\n';
  write_matrix_tsv(dir + "/values.tsv", set.values);
  write_counts_tsv(dir + "/counts.tsv", set.event_counts);
}

BinSeriesSet load_series(const std::string& dir) {
  std::ifstream mf(dir + "/meta.json");
  if (!mf) throw std::runtime_error("cannot read " + dir + "/meta.json");
  json meta = json::parse(mf);
  BinSeriesSet set;
  set.grid.lat_min = meta.at("lat_min").get<double>();
  set.grid.lon_min = meta.at("lon_min").get<double>();
  set.grid.cell_size = meta.at("cell_size").get<double>();
  set.grid.n_rows = meta.at("n_rows").get<int>();
  set.grid.n_cols = meta.at("n_cols").get<int>();
  set.anchor_time = parse_utc(meta.at("period_anchor").get<std::string>());
  set.period_seconds = meta.at("period_seconds").get<std::int64_t>();
  set.n_periods = meta.at("n_periods").get<int>();
  set.norm_constant = meta.at("norm_constant").get<double>();
  set.active_bins = meta.at("active_bins").get<std::vector<int>>();

  auto read_lines = [&](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) lines.push_back(line);
    return lines;
  };

  const auto vlines = read_lines(dir + "/values.tsv");
  const auto clines = read_lines(dir + "/counts.tsv");
  if (vlines.size() != set.active_bins.size() || clines.size() != set.active_bins.size())
    throw std::runtime_error("series files do not match the active bin list");

  for (const std::string& line : vlines) {
    std::vector<double> row;
    row.reserve(set.n_periods);
    std::istringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, '\t')) row.push_back(parse_double(tok));
    if (static_cast<int>(row.size()) != set.n_periods)
      throw std::runtime_error("values.tsv row length mismatch");
    set.values.push_back(std::move(row));
  }
  for (const std::string& line : clines) {
    std::vector<int> row;
    row.reserve(set.n_periods);
    std::istringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, '\t')) row.push_back(static_cast<int>(parse_int(tok)));
    if (static_cast<int>(row.size()) != set.n_periods)
      throw std::runtime_error("counts.tsv row length mismatch");
    set.event_counts.push_back(std::move(row));
  }
  return set;
}

}  // namespace quakecast
