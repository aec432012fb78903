#include "formline/dates.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace formline {

namespace {

// Howard Hinnant's civil-from-days / days-from-civil algorithms.
long days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

std::array<int, 3> civil_from_days(long z) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long y = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int last_day_of_month(int y, int m) {
    static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return days[m - 1];
}

bool parse_int(const std::string& s, size_t begin, size_t end, int& out) {
    if (begin >= end) return false;
    auto [p, ec] = std::from_chars(s.data() + begin, s.data() + end, out);
    return ec == std::errc() && p == s.data() + end;
}

}  // namespace

long Date::serial() const { return days_from_civil(year, month, day); }

Date Date::from_serial(long days) {
    auto [y, m, d] = civil_from_days(days);
    return Date{y, m, d};
}

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

long days_between(const Date& a, const Date& b) { return b.serial() - a.serial(); }

bool is_valid_date(int year, int month, int day) {
    return month >= 1 && month <= 12 && day >= 1 && day <= last_day_of_month(year, month);
}

Date parse_date(const std::string& text) {
    int a = 0, b = 0, c = 0;
    size_t s1 = text.find('/');
    if (s1 != std::string::npos) {
        size_t s2 = text.find('/', s1 + 1);
        if (s2 == std::string::npos || !parse_int(text, 0, s1, a) ||
            !parse_int(text, s1 + 1, s2, b) || !parse_int(text, s2 + 1, text.size(), c)) {
            throw std::runtime_error("malformed date: '" + text + "'");
        }
        int year = c;
        size_t year_digits = text.size() - s2 - 1;
        if (year_digits == 2) {
            year = c < 50 ? 2000 + c : 1900 + c;
        } else if (year_digits != 4) {
            throw std::runtime_error("malformed date: '" + text + "'");
        }
        if (!is_valid_date(year, b, a))
            throw std::runtime_error("invalid calendar date: '" + text + "'");
        return Date{year, b, a};
    }
    size_t d1 = text.find('-');
    if (d1 != std::string::npos) {
        size_t d2 = text.find('-', d1 + 1);
        if (d2 == std::string::npos || !parse_int(text, 0, d1, a) ||
            !parse_int(text, d1 + 1, d2, b) || !parse_int(text, d2 + 1, text.size(), c)) {
            throw std::runtime_error("malformed date: '" + text + "'");
        }
        if (!is_valid_date(a, b, c))
            throw std::runtime_error("invalid calendar date: '" + text + "'");
        return Date{a, b, c};
    }
    throw std::runtime_error("malformed date: '" + text + "'");
}

}  // namespace formline
