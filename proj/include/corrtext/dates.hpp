#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace corrtext {

using Date = std::chrono::sys_days;
using Timestamp = std::chrono::sys_seconds;

// Inclusive calendar range.
struct DateRange {
    Date start;
    Date end;

    bool contains(Date d) const { return d >= start && d <= end; }
};

std::optional<Date> parse_date(std::string_view text);
std::optional<Timestamp> parse_timestamp(std::string_view text);

Date parse_date_or_throw(std::string_view text);

std::string format_date(Date d);
std::string format_timestamp(Timestamp t);

// Monday = 1 .. Sunday = 7.
unsigned iso_weekday(Date d);
bool is_business_day(Date d);

// Sunday closing the Monday..Sunday week that contains d.
Date week_end(Date d);
Date week_end(Timestamp t);

Date date_of(Timestamp t);

// First day of the calendar year containing d.
Date year_start(Date d);
int year_of(Date d);

// Last day of the month containing d.
Date month_end(Date d);

}  // namespace corrtext
