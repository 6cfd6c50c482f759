#include "lobsig/fixed8.hpp"

#include <cctype>
#include <limits>

namespace lobsig {

Fixed8 Fixed8::parse(std::string_view s) {
    if (s.empty()) throw ConfigError("empty decimal string");
    std::size_t i = 0;
    bool neg = false;
    if (s[i] == '+' || s[i] == '-') {
        neg = (s[i] == '-');
        ++i;
    }
    if (i == s.size()) throw ConfigError("decimal string has no digits: '" + std::string(s) + "'");

    std::int64_t int_part = 0;
    bool any_digit = false;
    constexpr std::int64_t kMaxInt = std::numeric_limits<std::int64_t>::max() / kScale - 1;
    for (; i < s.size() && s[i] != '.'; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i])))
            throw ConfigError("invalid character in decimal string: '" + std::string(s) + "'");
        any_digit = true;
        int_part = int_part * 10 + (s[i] - '0');
        if (int_part > kMaxInt) throw ConfigError("decimal overflow: '" + std::string(s) + "'");
    }

    if (!any_digit)
        throw ConfigError("decimal string has no integer digits: '" + std::string(s) + "'");

    std::int64_t frac_part = 0;
    int frac_digits = 0;
    if (i < s.size() && s[i] == '.') {
        ++i;
        if (i == s.size())
            throw ConfigError("decimal string ends after '.': '" + std::string(s) + "'");
        for (; i < s.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(s[i])))
                throw ConfigError("invalid character in decimal string: '" + std::string(s) + "'");
            if (++frac_digits > 8)
                throw ConfigError("more than 8 fractional digits: '" + std::string(s) + "'");
            frac_part = frac_part * 10 + (s[i] - '0');
        }
    }

    for (int d = frac_digits; d < 8; ++d) frac_part *= 10;
    std::int64_t raw = int_part * kScale + frac_part;
    return from_raw(neg ? -raw : raw);
}

std::string Fixed8::str() const {
    std::int64_t r = raw_;
    std::string out;
    if (r < 0) {
        out.push_back('-');
        r = -r;
    }
    out += std::to_string(r / kScale);
    std::int64_t frac = r % kScale;
    if (frac != 0) {
        char buf[10];
        std::snprintf(buf, sizeof(buf), "%08lld", static_cast<long long>(frac));
        std::string f(buf);
        while (!f.empty() && f.back() == '0') f.pop_back();
        out.push_back('.');
        out += f;
    }
    return out;
}

}  // namespace lobsig
