#include "quakecast/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "quakecast/util.hpp"

namespace quakecast {

void RegionFilter::validate() const {
  if (!(lat_min < lat_max)) throw std::invalid_argument("region: lat_min must be < lat_max");
  if (!(lon_min < lon_max)) throw std::invalid_argument("region: lon_min must be < lon_max");
  if (!(t_start < t_end)) throw std::invalid_argument("region: t_start must be < t_end");
  if (lat_min < -90.0 || lat_max > 90.0) throw std::invalid_argument("region: latitude out of [-90, 90]");
  if (lon_min < -180.0 || lon_max > 180.0) throw std::invalid_argument("region: longitude out of [-180, 180]");
}

namespace {

int find_column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

ParseResult parse_catalog(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("catalog: empty input, no header row");
  std::vector<std::string> header = split_csv_line(line);

  const char* required[] = {"time", "latitude", "longitude", "depth", "mag"};
  int col[5];
  for (int i = 0; i < 5; ++i) {
    col[i] = find_column(header, required[i]);
    if (col[i] < 0)
      throw std::runtime_error(std::string("catalog: missing required column '") + required[i] + "'");
  }
  std::size_t max_col = 0;
  for (int i = 0; i < 5; ++i) max_col = std::max(max_col, static_cast<std::size_t>(col[i]));

  ParseResult result;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    result.rows_total++;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() <= max_col) {
      result.rows_skipped++;
      continue;
    }
    try {
      CatalogEvent ev;
      ev.time = parse_utc(f[col[0]]);
      ev.latitude = parse_double(f[col[1]]);
      ev.longitude = parse_double(f[col[2]]);
      ev.depth_km = parse_double(f[col[3]]);
      ev.magnitude = parse_double(f[col[4]]);
      if (!std::isfinite(ev.latitude) || !std::isfinite(ev.longitude) || !std::isfinite(ev.magnitude))
        throw std::runtime_error("non-finite field");
      if (ev.latitude < -90.0 || ev.latitude > 90.0 || ev.longitude < -180.0 || ev.longitude > 180.0)
        throw std::runtime_error("coordinate out of range");
      if (ev.magnitude < 0.0) {
        // some USGS exports carry small negative magnitudes
        ev.magnitude = 0.0;
        result.magnitudes_clamped++;
      }
      result.events.push_back(ev);
    } catch (const std::exception&) {
      result.rows_skipped++;
    }
  }

  std::stable_sort(result.events.begin(), result.events.end(),
                   [](const CatalogEvent& a, const CatalogEvent& b) { return a.time < b.time; });
  return result;
}

ParseResult parse_catalog_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("catalog: cannot open " + path);
  return parse_catalog(in);
}

std::vector<CatalogEvent> filter_region(const std::vector<CatalogEvent>& events,
                                        const RegionFilter& filter) {
  filter.validate();
  std::vector<CatalogEvent> kept;
  for (const CatalogEvent& ev : events) {
    if (ev.latitude >= filter.lat_min && ev.latitude < filter.lat_max &&
        ev.longitude >= filter.lon_min && ev.longitude < filter.lon_max &&
        ev.time >= filter.t_start && ev.time < filter.t_end) {
      kept.push_back(ev);
    }
  }
  return kept;
}

void write_catalog(std::ostream& out, const std::vector<CatalogEvent>& events) {
  out << "time,latitude,longitude,depth,mag\n";
  for (const CatalogEvent& ev : events) {
    out << format_utc(ev.time) << ',' << fmt_g17(ev.latitude) << ',' << fmt_g17(ev.longitude)
        << ',' << fmt_g17(ev.depth_km) << ',' << fmt_g17(ev.magnitude) << '\n';
  }
}

}  // namespace quakecast
