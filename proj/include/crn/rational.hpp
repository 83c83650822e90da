#pragma once

#include <boost/rational.hpp>

#include <cctype>
#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace crn {

/// Exact exponent arithmetic. Network coordinates never leave this type.
/// Compare against Rational(0), not a bare int: the mixed-type boost operators
/// recurse forever for rational<int64_t>.
using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) { return boost::rational_cast<double>(r); }
inline double to_double(double v) { return v; }

inline std::string to_string(const Rational& r) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

namespace detail {

inline std::optional<std::int64_t> parse_int(std::string_view s) {
    std::int64_t v = 0;
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace detail

/// Parses an integer ("3"), a decimal ("-0.25") or a fraction ("7/8") exactly.
/// Returns nullopt on malformed input or when the value does not fit in 64 bits.
inline std::optional<Rational> parse_rational(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        auto num = detail::parse_int(s.substr(0, slash));
        auto den = detail::parse_int(s.substr(slash + 1));
        if (!num || !den || *den == 0) return std::nullopt;
        return Rational(*num, *den);
    }
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
        bool negative = false;
        std::string_view body = s;
        if (body.front() == '-' || body.front() == '+') {
            negative = body.front() == '-';
            body.remove_prefix(1);
        }
        dot = body.find('.');
        std::string digits(body.substr(0, dot));
        std::string_view frac = body.substr(dot + 1);
        if (digits.empty() && frac.empty()) return std::nullopt;
        for (char c : frac)
            if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        for (char c : digits)
            if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        if (frac.size() > 17) return std::nullopt;
        digits += frac;
        if (digits.empty()) digits = "0";
        auto num = detail::parse_int(digits);
        if (!num) return std::nullopt;
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        return Rational(negative ? -*num : *num, den);
    }
    auto v = detail::parse_int(s);
    if (!v) return std::nullopt;
    return Rational(*v);
}

inline int sign(const Rational& r) { return r > Rational(0) ? 1 : (r < Rational(0) ? -1 : 0); }
inline int sign(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

}  // namespace crn
