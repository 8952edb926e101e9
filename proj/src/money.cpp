#include "aoicache/money.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace aoicache {

Money Money::from_double(double value) {
    const double scaled = value * static_cast<double>(kScale);
    if (!std::isfinite(scaled) || std::fabs(scaled) > 9.0e18)
        throw std::out_of_range("money value out of range");
    return Money{std::llround(scaled)};
}

Money Money::parse(std::string_view text) {
    auto fail = [&] { return std::invalid_argument("not a decimal money value: '" + std::string(text) + "'"); };
    std::size_t i = 0;
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
        text.remove_suffix(1);
    bool negative = false;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
        negative = text[i] == '-';
        ++i;
    }
    std::int64_t whole = 0;
    std::int64_t frac = 0;
    int frac_digits = 0;
    bool any_digit = false;
    bool in_frac = false;
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '.') {
            if (in_frac) throw fail();
            in_frac = true;
            continue;
        }
        if (c < '0' || c > '9') throw fail();
        any_digit = true;
        const int digit = c - '0';
        if (in_frac) {
            if (frac_digits == 6) {
                if (digit != 0) throw fail();  // finer than the money resolution
                continue;
            }
            frac = frac * 10 + digit;
            ++frac_digits;
        } else {
            if (whole > (std::numeric_limits<std::int64_t>::max() / kScale - 9) / 10) throw fail();
            whole = whole * 10 + digit;
        }
    }
    if (!any_digit) throw fail();
    for (; frac_digits < 6; ++frac_digits) frac *= 10;
    const std::int64_t micros = whole * kScale + frac;
    return Money{negative ? -micros : micros};
}

std::string Money::to_string() const {
    const bool negative = micros_ < 0;
    // Magnitude via unsigned arithmetic so INT64_MIN does not overflow.
    const auto mag = negative ? 0 - static_cast<std::uint64_t>(micros_) : static_cast<std::uint64_t>(micros_);
    std::string out = negative ? "-" : "";
    out += std::to_string(mag / kScale);
    std::uint64_t frac = mag % kScale;
    if (frac != 0) {
        std::string digits = std::to_string(frac);
        digits.insert(0, 6 - digits.size(), '0');
        while (digits.back() == '0') digits.pop_back();
        out += '.';
        out += digits;
    }
    return out;
}

Money Money::scaled(double factor) const {
    const double v = static_cast<double>(micros_) * factor;
    if (!std::isfinite(v) || std::fabs(v) > 9.0e18) throw std::out_of_range("money product out of range");
    return Money{std::llround(v)};
}

std::ostream& operator<<(std::ostream& os, Money m) { return os << m.to_string(); }

}  // namespace aoicache
