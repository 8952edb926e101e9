#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace aoicache {

/// Fixed-point money with 10^-6 resolution.
///
/// All utility, fee and cost arithmetic runs on integer micro-units so that
/// strategy totals compare exactly and ties break the same way everywhere.
class Money {
public:
    static constexpr std::int64_t kScale = 1'000'000;

    constexpr Money() = default;

    static constexpr Money from_micros(std::int64_t micros) { return Money{micros}; }
    static constexpr Money from_units(std::int64_t units) { return Money{units * kScale}; }
    /// Rounds to the nearest micro-unit (half away from zero).
    static Money from_double(double value);
    /// Exact decimal parse ("12.5", "-0.000001", "3"). Throws std::invalid_argument.
    static Money parse(std::string_view text);

    constexpr std::int64_t micros() const { return micros_; }
    double to_double() const { return static_cast<double>(micros_) / kScale; }

    /// Shortest exact decimal representation: "21.2", "-5", "0.000001".
    std::string to_string() const;

    /// this * factor, rounded to the nearest micro-unit.
    Money scaled(double factor) const;

    constexpr Money operator-() const { return Money{-micros_}; }
    constexpr Money& operator+=(Money o) { micros_ += o.micros_; return *this; }
    constexpr Money& operator-=(Money o) { micros_ -= o.micros_; return *this; }
    friend constexpr Money operator+(Money a, Money b) { return Money{a.micros_ + b.micros_}; }
    friend constexpr Money operator-(Money a, Money b) { return Money{a.micros_ - b.micros_}; }
    friend constexpr Money operator*(Money a, std::int64_t k) { return Money{a.micros_ * k}; }
    friend constexpr Money operator*(std::int64_t k, Money a) { return Money{a.micros_ * k}; }
    friend constexpr auto operator<=>(Money, Money) = default;
    friend constexpr bool operator==(Money, Money) = default;

private:
    constexpr explicit Money(std::int64_t micros) : micros_(micros) {}
    std::int64_t micros_ = 0;
};

std::ostream& operator<<(std::ostream& os, Money m);

}  // namespace aoicache
