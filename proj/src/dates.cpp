#include "socialscope/dates.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "socialscope/errors.hpp"
#include "socialscope/text.hpp"

namespace socialscope {

namespace {

using namespace std::chrono;

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    for (std::size_t i = pos; i < pos + len; ++i)
        if (s[i] < '0' || s[i] > '9') return false;
    auto r = std::from_chars(s.data() + pos, s.data() + pos + len, out);
    return r.ec == std::errc{};
}

std::optional<sys_seconds> assemble(int y, int mo, int d, int h, int mi, int sec, int offset_minutes) {
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) return std::nullopt;
    sys_seconds t = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
    return t - minutes{offset_minutes};
}

// "+HH:MM", "+HHMM", "Z", or empty.
std::optional<int> parse_offset(std::string_view z) {
    if (z.empty() || z == "Z" || z == "z") return 0;
    if (z[0] != '+' && z[0] != '-') return std::nullopt;
    int sign = z[0] == '-' ? -1 : 1;
    int hh = 0, mm = 0;
    if (z.size() == 6 && z[3] == ':') {
        if (!read_int(z, 1, 2, hh) || !read_int(z, 4, 2, mm)) return std::nullopt;
    } else if (z.size() == 5) {
        if (!read_int(z, 1, 2, hh) || !read_int(z, 3, 2, mm)) return std::nullopt;
    } else if (z.size() == 3) {
        if (!read_int(z, 1, 2, hh)) return std::nullopt;
    } else {
        return std::nullopt;
    }
    return sign * (hh * 60 + mm);
}

std::optional<sys_seconds> parse_iso(std::string_view s) {
    int y, mo, d, h = 0, mi = 0, sec = 0;
    if (!read_int(s, 0, 4, y) || s.size() < 10 || s[4] != '-' || !read_int(s, 5, 2, mo) || s[7] != '-' ||
        !read_int(s, 8, 2, d))
        return std::nullopt;
    std::size_t pos = 10;
    if (pos < s.size()) {
        if (s[pos] != 'T' && s[pos] != ' ') return std::nullopt;
        if (!read_int(s, pos + 1, 2, h) || s.size() < pos + 6 || s[pos + 3] != ':' || !read_int(s, pos + 4, 2, mi))
            return std::nullopt;
        pos += 6;
        if (pos < s.size() && s[pos] == ':') {
            if (!read_int(s, pos + 1, 2, sec)) return std::nullopt;
            pos += 3;
        }
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        }
    }
    auto off = parse_offset(s.substr(pos));
    if (!off) return std::nullopt;
    return assemble(y, mo, d, h, mi, sec, *off);
}

// "Sun Dec 04 18:30:00 +0000 2016"
std::optional<sys_seconds> parse_api_form(std::string_view s) {
    static constexpr std::array<std::string_view, 12> kMonths = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                                 "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    if (s.size() != 30) return std::nullopt;
    int mo = 0;
    for (std::size_t i = 0; i < kMonths.size(); ++i)
        if (s.substr(4, 3) == kMonths[i]) mo = static_cast<int>(i) + 1;
    int d, h, mi, sec, y;
    if (mo == 0 || !read_int(s, 8, 2, d) || !read_int(s, 11, 2, h) || !read_int(s, 14, 2, mi) ||
        !read_int(s, 17, 2, sec) || !read_int(s, 26, 4, y))
        return std::nullopt;
    auto off = parse_offset(s.substr(20, 5));
    if (!off) return std::nullopt;
    return assemble(y, mo, d, h, mi, sec, *off);
}

}  // namespace

std::optional<UtcTime> parse_timestamp(std::string_view s) {
    s = text::trim(s);
    if (s.empty()) return std::nullopt;
    bool all_digits = true;
    for (char c : s) all_digits = all_digits && c >= '0' && c <= '9';
    if (all_digits) {
        long long v = 0;
        auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc{}) return std::nullopt;
        return UtcTime{seconds{v}};
    }
    if (auto t = parse_iso(s)) return t;
    return parse_api_form(s);
}

std::string format_timestamp(UtcTime t) {
    auto day = floor<days>(t);
    year_month_day ymd{day};
    hh_mm_ss hms{t - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

std::optional<Date> parse_date(std::string_view s) {
    s = text::trim(s);
    if (s.size() != 10) return std::nullopt;
    auto t = parse_iso(s);
    if (!t) return std::nullopt;
    return floor<days>(*t);
}

std::string format_date(Date d) {
    year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

DateRange DateRange::make(Date start, Date end) {
    if (end < start) throw ParameterError("date range end " + format_date(end) + " precedes start " + format_date(start));
    return {start, end};
}

DateRange DateRange::parse(std::string_view start, std::string_view end) {
    auto s = parse_date(start);
    auto e = parse_date(end);
    if (!s || !e) throw ParameterError("invalid date range '" + std::string(start) + "'..'" + std::string(end) + "'");
    return make(*s, *e);
}

}  // namespace socialscope
