#include "elens/calendar.hpp"

#include <chrono>
#include <cstdio>

#include "elens/errors.hpp"

namespace elens {

namespace chr = std::chrono;

std::int64_t utc_day(std::int64_t timestamp) {
    std::int64_t d = timestamp / kSecondsPerDay;
    if (timestamp < 0 && timestamp % kSecondsPerDay != 0) --d;
    return d;
}

std::int64_t parse_date(std::string_view iso_date) {
    int y = 0, m = 0, d = 0;
    char tail = 0;
    std::string buf(iso_date);
    if (std::sscanf(buf.c_str(), "%d-%d-%d%c", &y, &m, &d, &tail) != 3)
        throw ParseError("bad date '" + buf + "', expected YYYY-MM-DD");
    chr::year_month_day ymd{chr::year{y}, chr::month{unsigned(m)}, chr::day{unsigned(d)}};
    if (!ymd.ok())
        throw ParseError("impossible calendar date '" + buf + "'");
    return chr::sys_days{ymd}.time_since_epoch().count();
}

std::string format_date(std::int64_t day) {
    chr::year_month_day ymd{chr::sys_days{chr::days{day}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
}

Granularity granularity_from_string(std::string_view name) {
    if (name == "day") return Granularity::Day;
    if (name == "week") return Granularity::Week;
    if (name == "month") return Granularity::Month;
    if (name == "year") return Granularity::Year;
    throw ParseError("unknown granularity '" + std::string(name) +
                     "', expected day|week|month|year");
}

std::string_view to_string(Granularity g) {
    switch (g) {
    case Granularity::Day: return "day";
    case Granularity::Week: return "week";
    case Granularity::Month: return "month";
    case Granularity::Year: return "year";
    }
    return "?";
}

std::int64_t window_start_day(std::int64_t day, Granularity g) {
    chr::sys_days sd{chr::days{day}};
    switch (g) {
    case Granularity::Day:
        return day;
    case Granularity::Week: {
        unsigned iso = chr::weekday{sd}.iso_encoding(); // Mon=1..Sun=7
        return day - std::int64_t(iso - 1);
    }
    case Granularity::Month: {
        chr::year_month_day ymd{sd};
        return chr::sys_days{ymd.year() / ymd.month() / chr::day{1}}.time_since_epoch().count();
    }
    case Granularity::Year: {
        chr::year_month_day ymd{sd};
        return chr::sys_days{ymd.year() / chr::January / chr::day{1}}.time_since_epoch().count();
    }
    }
    return day;
}

namespace {

std::int64_t next_start(std::int64_t start_day, Granularity g) {
    chr::sys_days sd{chr::days{start_day}};
    switch (g) {
    case Granularity::Day:
        return start_day + 1;
    case Granularity::Week:
        return start_day + 7;
    case Granularity::Month: {
        chr::year_month_day ymd{sd};
        chr::year_month ym = ymd.year() / ymd.month();
        ym += chr::months{1};
        return chr::sys_days{ym / chr::day{1}}.time_since_epoch().count();
    }
    case Granularity::Year: {
        chr::year_month_day ymd{sd};
        return chr::sys_days{(ymd.year() + chr::years{1}) / chr::January / chr::day{1}}
            .time_since_epoch()
            .count();
    }
    }
    return start_day + 1;
}

} // namespace

std::vector<TimeWindow> window_partition(std::int64_t span_begin, std::int64_t span_end,
                                         Granularity g) {
    if (span_begin > span_end)
        throw ConfigError("window_partition: empty span");
    std::vector<TimeWindow> windows;
    std::int64_t start_day = window_start_day(utc_day(span_begin), g);
    while (start_day * kSecondsPerDay <= span_end) {
        std::int64_t next_day = next_start(start_day, g);
        windows.push_back({start_day * kSecondsPerDay, next_day * kSecondsPerDay - 1});
        start_day = next_day;
    }
    return windows;
}

} // namespace elens
