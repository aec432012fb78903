#pragma once

#include <string>

namespace formline {

// Calendar date with proleptic-Gregorian day arithmetic.
struct Date {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    // Days since 1970-01-01 (may be negative).
    long serial() const;
    static Date from_serial(long days);

    Date plus_days(int n) const { return from_serial(serial() + n); }

    bool operator==(const Date& o) const = default;
    auto operator<=>(const Date& o) const { return serial() <=> o.serial(); }

    // ISO "YYYY-MM-DD".
    std::string iso() const;
};

// Days from a to b (b - a).
long days_between(const Date& a, const Date& b);

// Accepts DD/MM/YY and DD/MM/YYYY. Two-digit years < 50 map to 20xx, else 19xx.
// Also accepts ISO YYYY-MM-DD. Throws std::runtime_error on malformed input.
Date parse_date(const std::string& text);

bool is_valid_date(int year, int month, int day);

}  // namespace formline
