#include "core/calendar.hpp"

#include <cmath>
#include <cstdio>

#include "core/error.hpp"

namespace eqhmm {

std::int64_t days_from_civil(const Date& d) {
  // Howard Hinnant's civil-from-days algorithm, era-based, exact for the
  // proleptic Gregorian calendar.
  std::int64_t y = d.year;
  const int m = d.month;
  const int dd = d.day;
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);           // [0,399]
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + dd - 1;  // [0,365]
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;          // [0,146096]
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned dd = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
              static_cast<int>(dd)};
}

bool is_valid_date(const Date& d) {
  if (d.month < 1 || d.month > 12 || d.day < 1) return false;
  static const int md[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int dim = md[d.month - 1];
  const bool leap =
      (d.year % 4 == 0 && d.year % 100 != 0) || d.year % 400 == 0;
  if (d.month == 2 && leap) dim = 29;
  return d.day <= dim;
}

Date parse_date(const std::string& s) {
  int y = 0, m = 0, d = 0;
  char extra = 0;
  if (std::sscanf(s.c_str(), "%d-%d-%d%c", &y, &m, &d, &extra) != 3)
    fail(ErrorCode::parse, "bad date '" + s + "' (expected YYYY-MM-DD)");
  Date out{y, m, d};
  if (!is_valid_date(out))
    fail(ErrorCode::parse, "invalid calendar date '" + s + "'");
  return out;
}

double parse_time_of_day(const std::string& s) {
  if (s.empty()) return 0.0;
  int h = 0, m = 0;
  double sec = 0.0;
  char extra = 0;
  if (std::sscanf(s.c_str(), "%d:%d:%lf%c", &h, &m, &sec, &extra) != 3)
    fail(ErrorCode::parse, "bad time '" + s + "' (expected HH:MM:SS)");
  if (h < 0 || h > 23 || m < 0 || m > 59 || sec < 0.0 || sec >= 61.0)
    fail(ErrorCode::parse, "time of day out of range: '" + s + "'");
  return (h * 3600.0 + m * 60.0 + sec) / 86400.0;
}

std::string format_date(const Date& d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

std::string format_time_of_day(double frac) {
  if (frac < 0.0) frac = 0.0;
  // round to whole microseconds; carry into the next day is clamped back
  std::int64_t us = static_cast<std::int64_t>(std::llround(frac * 86400.0e6));
  if (us >= 86400000000LL) us = 86400000000LL - 1;
  const int h = static_cast<int>(us / 3600000000LL);
  const int m = static_cast<int>(us / 60000000LL % 60);
  const int s = static_cast<int>(us / 1000000LL % 60);
  const int u = static_cast<int>(us % 1000000LL);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02d:%02d:%02d.%06d", h, m, s, u);
  return buf;
}

Date add_days(const Date& d, std::int64_t n) {
  return civil_from_days(days_from_civil(d) + n);
}

}  // namespace eqhmm
