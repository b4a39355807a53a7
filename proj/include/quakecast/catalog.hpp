#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace quakecast {

/// One seismic event from a catalog export.
struct CatalogEvent {
  std::int64_t time = 0;  // UTC epoch seconds
  double latitude = 0.0;
  double longitude = 0.0;
  double depth_km = 0.0;
  double magnitude = 0.0;
};

/// Half-open spatial and temporal study window: lat in [lat_min, lat_max),
/// lon in [lon_min, lon_max), time in [t_start, t_end).
struct RegionFilter {
  double lat_min = 0.0, lat_max = 0.0;
  double lon_min = 0.0, lon_max = 0.0;
  std::int64_t t_start = 0, t_end = 0;

  void validate() const;  // throws std::invalid_argument on bad bounds
};

struct ParseResult {
  std::vector<CatalogEvent> events;   // sorted by time ascending (stable)
  std::size_t rows_total = 0;         // data rows seen (header excluded)
  std::size_t rows_skipped = 0;       // unparseable rows
  std::size_t magnitudes_clamped = 0; // negative magnitudes clamped to 0
};

/// Reads a comma-separated catalog with USGS export header names
/// (time, latitude, longitude, depth, mag; extra columns ignored).
/// Missing required column is a hard failure naming the column; bad rows are
/// skipped and counted. Events come back sorted by time, stable for ties.
ParseResult parse_catalog(std::istream& in);
ParseResult parse_catalog_file(const std::string& path);

/// Keeps events inside the filter box, preserving order.
std::vector<CatalogEvent> filter_region(const std::vector<CatalogEvent>& events,
                                        const RegionFilter& filter);

/// Re-export in the input format (time,latitude,longitude,depth,mag).
void write_catalog(std::ostream& out, const std::vector<CatalogEvent>& events);

}  // namespace quakecast
