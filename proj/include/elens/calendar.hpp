#ifndef ELENS_CALENDAR_HPP
#define ELENS_CALENDAR_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace elens {

inline constexpr std::int64_t kSecondsPerDay = 86400;

// UTC day index (days since 1970-01-01) of a unix timestamp; floors for
// negative timestamps.
std::int64_t utc_day(std::int64_t timestamp);

// "YYYY-MM-DD" -> day index. Throws ParseError on malformed or impossible dates.
std::int64_t parse_date(std::string_view iso_date);
std::string format_date(std::int64_t day);

enum class Granularity { Day, Week, Month, Year };

Granularity granularity_from_string(std::string_view name);
std::string_view to_string(Granularity g);

// Closed interval [begin, end] in unix seconds.
struct TimeWindow {
    std::int64_t begin = 0;
    std::int64_t end = 0;

    bool contains(std::int64_t ts) const { return ts >= begin && ts <= end; }
};

// Start day of the calendar unit containing `day` (ISO weeks start Monday).
std::int64_t window_start_day(std::int64_t day, Granularity g);

// Calendar-aligned UTC windows (ISO weeks start Monday; months and years on
// calendar boundaries) that are consecutive, pairwise disjoint, and cover
// [span_begin, span_end]. Throws ConfigError if span_begin > span_end.
std::vector<TimeWindow> window_partition(std::int64_t span_begin, std::int64_t span_end,
                                         Granularity g);

} // namespace elens

#endif
