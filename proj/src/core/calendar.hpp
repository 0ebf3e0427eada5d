#ifndef EQHMM_CORE_CALENDAR_HPP
#define EQHMM_CORE_CALENDAR_HPP

#include <cstdint>
#include <string>

namespace eqhmm {

/// Calendar date in the proleptic Gregorian calendar.
struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  friend bool operator==(const Date&, const Date&) = default;
};

/// Serial day number with 1970-01-01 == 0 (negative before the epoch).
std::int64_t days_from_civil(const Date& d);

/// Inverse of days_from_civil.
Date civil_from_days(std::int64_t z);

bool is_valid_date(const Date& d);

/// Parses "YYYY-MM-DD". Throws ErrorCode::parse on malformed input.
Date parse_date(const std::string& s);

/// Parses "HH:MM:SS" or "HH:MM:SS.ffffff" into a fraction of a day in [0,1).
/// An empty string means midnight.
double parse_time_of_day(const std::string& s);

std::string format_date(const Date& d);

/// Formats a day fraction as "HH:MM:SS.ffffff" (microsecond resolution).
std::string format_time_of_day(double frac);

/// Shifts a date by a whole number of days.
Date add_days(const Date& d, std::int64_t n);

}  // namespace eqhmm

#endif
