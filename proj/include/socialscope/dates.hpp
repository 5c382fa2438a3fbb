#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace socialscope {

using UtcTime = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

/// Accepts ISO 8601 ("2016-12-04T18:30:00Z", "+01:00" style offsets, space
/// instead of 'T', missing zone = UTC), integer epoch seconds, and the archived
/// API form "Sun Dec 04 18:30:00 +0000 2016". Fractional seconds are truncated.
std::optional<UtcTime> parse_timestamp(std::string_view s);
std::string format_timestamp(UtcTime t);

std::optional<Date> parse_date(std::string_view s);
std::string format_date(Date d);

inline Date utc_date(UtcTime t) { return std::chrono::floor<std::chrono::days>(t); }

/// Inclusive calendar-day interval.
struct DateRange {
    Date start;
    Date end;

    /// Throws ParameterError when end < start.
    static DateRange make(Date start, Date end);
    static DateRange parse(std::string_view start, std::string_view end);

    int days() const { return static_cast<int>((end - start).count()) + 1; }
    bool contains(Date d) const { return d >= start && d <= end; }
    int index_of(Date d) const { return static_cast<int>((d - start).count()); }
};

}  // namespace socialscope
