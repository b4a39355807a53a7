#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace quakecast {

// ---- UTC time handling ----------------------------------------------------
// All timestamps are UTC epoch seconds. Sub-second precision is truncated at
// parse time.

/// Parses "YYYY-MM-DD[T ]HH:MM:SS[.fff][Z]" (also bare "YYYY-MM-DD") into
/// epoch seconds. Throws std::runtime_error on malformed input.
std::int64_t parse_utc(std::string_view text);

/// Formats epoch seconds as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_utc(std::int64_t epoch_seconds);

/// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int year, int month, int day);

/// Inverse of days_from_civil.
void civil_from_days(std::int64_t days, int& year, int& month, int& day);

/// Zero-based count of calendar months from (y0, m0) to the month containing
/// `epoch_seconds`. Negative if the instant precedes the origin month.
std::int64_t month_index(std::int64_t epoch_seconds, int y0, int m0);

/// Year and month (1-12) of the month containing the instant.
void year_month_of(std::int64_t epoch_seconds, int& year, int& month);

// ---- delimited text --------------------------------------------------------

/// Splits one CSV line into fields. Handles double-quoted fields containing
/// commas and "" escapes; surrounding whitespace of unquoted fields is
/// trimmed.
std::vector<std::string> split_csv_line(const std::string& line);

std::string trim(std::string_view s);

/// Formats a double with 17 significant digits (round-trips bit-exactly
/// through strtod).
std::string fmt_g17(double v);

/// strtod with full-string validation; throws on garbage.
double parse_double(const std::string& s);
std::int64_t parse_int(const std::string& s);

// ---- hashing ---------------------------------------------------------------

/// FNV-1a 64-bit over a byte string.
std::uint64_t fnv1a64(std::string_view bytes);
std::string to_hex(std::uint64_t v);

/// FNV-1a digest of a file's contents, as 16 hex chars. Throws if unreadable.
std::string file_digest(const std::string& path);

// ---- deterministic RNG -----------------------------------------------------
// Thin wrapper over a 64-bit xorshift-style generator (splitmix64). The
// distribution transforms are hand-rolled so streams are identical everywhere.

class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller (no spare caching).
  double gaussian();

  /// Fisher-Yates shuffle with this generator.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(below(i + 1));
      std::swap(v[i], v[j]);
    }
  }

private:
  std::uint64_t state_;
};

// ---- parallelism -----------------------------------------------------------

/// Worker cap: min(hardware, QUAKECAST_THREADS). At least 1.
int worker_count();

/// Runs fn(i) for i in [0, n) over a deterministic contiguous partition of
/// the index range. fn must not touch shared mutable state outside its own
/// indices. Serial when worker_count() == 1 or n is small.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace quakecast
