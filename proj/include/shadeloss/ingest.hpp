#pragma once

#include <chrono>
#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace shadeloss {

/// Seconds since 1970-01-01T00:00 of a timezone-naive local-standard-time clock.
using LocalSeconds = std::int64_t;

inline constexpr LocalSeconds kSecondsPerDay = 86400;

/// Power time series in kW. Missing samples hold kMissing.
struct RawSeries {
    std::vector<LocalSeconds> timestamps;
    std::vector<double> power;
    int interval = 0;  ///< seconds; modal spacing of the samples

    std::size_t size() const noexcept { return timestamps.size(); }
};

/// Samples-per-day x days embedding of a regular series.
struct DayMatrix {
    Eigen::MatrixXd values;  ///< kW; NaN where missing until fill_gaps runs
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> gap_mask;
    std::chrono::sys_days start_date;
    int interval = 0;
    /// Per-day flag. All true after embed; fill_gaps clears days it cannot repair.
    std::vector<bool> usable;

    int n_per_day() const noexcept { return static_cast<int>(values.rows()); }
    int n_days() const noexcept { return static_cast<int>(values.cols()); }
};

/// Per-day sunrise/sunset as fractional row indices into a DayMatrix.
struct SunTimes {
    std::vector<double> sunrise;
    std::vector<double> sunset;
};

struct ParseOptions {
    /// Fewer distinct calendar days than this raises InsufficientDataError.
    int min_distinct_days = 180;
};

/// Parses `timestamp<sep>power` rows (comma or tab). Lines starting with # are skipped; a non-timestamp
/// first row is taken as a header.
RawSeries parse_series(std::istream& text, const ParseOptions& opts = {});
RawSeries parse_series(const std::string& text, const ParseOptions& opts = {});

/// Parses `YYYY-MM-DD[T| ]HH:MM[:SS]`. Returns false on malformed input.
bool parse_timestamp(const std::string& field, LocalSeconds& out);
std::string format_timestamp(LocalSeconds t);

/// Writes a series in the same two-column format parse_series consumes.
void write_series(std::ostream& os, const RawSeries& s);

/// Modal spacing between consecutive samples, ties broken toward the smaller spacing.
int modal_spacing(const std::vector<LocalSeconds>& timestamps);

/// Puts the series on a uniform grid aligned to midnight with the modal spacing.
RawSeries regularize(const RawSeries& s);

/// Column d holds calendar day start_date + d, rows in time order.
DayMatrix embed(const RawSeries& s);

/// Interpolates daytime gaps and zero-fills night gaps; marks unrepairable days unusable.
DayMatrix fill_gaps(const DayMatrix& m, const SunTimes& sun);

/// Days whose daytime samples are more than this fraction missing are marked unusable.
inline constexpr double kMaxDaytimeMissingFraction = 0.2;

}  // namespace shadeloss
