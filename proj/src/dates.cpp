#include "corrtext/dates.hpp"
#include "corrtext/errors.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace corrtext {

namespace {

bool parse_int(std::string_view text, int& out) {
    if (text.empty()) return false;
    for (char c : text) {
        if (c < '0' || c > '9') return false;
    }
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
    // YYYY-MM-DD
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
        !parse_int(text.substr(8, 2), d)) {
        return std::nullopt;
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y},
                                          std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date{ymd};
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    // YYYY-MM-DDTHH:MM:SSZ; a bare date means midnight.
    if (text.size() == 10) {
        auto d = parse_date(text);
        if (!d) return std::nullopt;
        return Timestamp{*d};
    }
    if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
    if (text.size() != 19 || (text[10] != 'T' && text[10] != ' ') || text[13] != ':' ||
        text[16] != ':') {
        return std::nullopt;
    }
    auto d = parse_date(text.substr(0, 10));
    int hh = 0, mm = 0, ss = 0;
    if (!d || !parse_int(text.substr(11, 2), hh) || !parse_int(text.substr(14, 2), mm) ||
        !parse_int(text.substr(17, 2), ss)) {
        return std::nullopt;
    }
    if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
    return Timestamp{*d} + std::chrono::hours{hh} + std::chrono::minutes{mm} +
           std::chrono::seconds{ss};
}

Date parse_date_or_throw(std::string_view text) {
    auto d = parse_date(text);
    if (!d) throw DataError("invalid date '" + std::string(text) + "'");
    return *d;
}

std::string format_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string format_timestamp(Timestamp t) {
    const Date d = date_of(t);
    const auto secs = (t - Timestamp{d}).count();
    char buf[64];
    std::snprintf(buf, sizeof buf, "T%02lld:%02lld:%02lldZ", static_cast<long long>(secs / 3600),
                  static_cast<long long>((secs / 60) % 60), static_cast<long long>(secs % 60));
    return format_date(d) + buf;
}

unsigned iso_weekday(Date d) { return std::chrono::weekday{d}.iso_encoding(); }

bool is_business_day(Date d) { return iso_weekday(d) <= 5; }

Date week_end(Date d) { return d + std::chrono::days{7 - iso_weekday(d)}; }

Date week_end(Timestamp t) { return week_end(date_of(t)); }

Date date_of(Timestamp t) { return std::chrono::floor<std::chrono::days>(t); }

Date year_start(Date d) {
    const std::chrono::year_month_day ymd{d};
    return Date{ymd.year() / std::chrono::January / 1};
}

int year_of(Date d) { return static_cast<int>(std::chrono::year_month_day{d}.year()); }

Date month_end(Date d) {
    const std::chrono::year_month_day ymd{d};
    return Date{std::chrono::year_month_day_last{ymd.year(), std::chrono::month_day_last{ymd.month()}}};
}

}  // namespace corrtext
