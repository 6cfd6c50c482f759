#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "lobsig/errors.hpp"

namespace lobsig {

/// Decimal fixed-point value with 8 fractional digits.
///
/// Prices and quantities are kept in this representation from CSV parse to
/// CSV write so a serialize/parse round trip is bit-exact; feature math
/// converts to double at the edge.
class Fixed8 {
public:
    static constexpr std::int64_t kScale = 100'000'000;  // 1e8

    constexpr Fixed8() = default;

    static constexpr Fixed8 from_raw(std::int64_t raw) {
        Fixed8 v;
        v.raw_ = raw;
        return v;
    }

    /// Nearest representable value (ties away from zero).
    static Fixed8 from_double(double v) {
        if (!std::isfinite(v)) throw ConfigError("non-finite value for Fixed8");
        return from_raw(std::llround(v * static_cast<double>(kScale)));
    }

    /// Parses a plain decimal string: [+-]digits[.digits], at most 8
    /// fractional digits, no exponent, no thousands separators.
    static Fixed8 parse(std::string_view s);

    /// Canonical decimal string: no exponent, trailing fractional zeros
    /// trimmed, no trailing '.'.
    std::string str() const;

    constexpr std::int64_t raw() const { return raw_; }
    double to_double() const { return static_cast<double>(raw_) / static_cast<double>(kScale); }

    constexpr bool is_zero() const { return raw_ == 0; }
    constexpr bool is_positive() const { return raw_ > 0; }
    constexpr bool is_negative() const { return raw_ < 0; }

    friend constexpr auto operator<=>(Fixed8 a, Fixed8 b) = default;

    friend constexpr Fixed8 operator+(Fixed8 a, Fixed8 b) { return from_raw(a.raw_ + b.raw_); }
    friend constexpr Fixed8 operator-(Fixed8 a, Fixed8 b) { return from_raw(a.raw_ - b.raw_); }

private:
    std::int64_t raw_ = 0;
};

}  // namespace lobsig
