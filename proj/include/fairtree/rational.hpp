#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fairtree {

/// Non-negative fraction num/den, kept reduced. Balance gates compare cluster
/// sizes against it by cross-multiplication so boundaries never flip.
struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;

    constexpr Fraction() = default;
    constexpr Fraction(std::int64_t n, std::int64_t d) : num(n), den(d) {
        if (den <= 0 || num < 0) throw std::invalid_argument("fraction must be non-negative with positive denominator");
        const auto g = std::gcd(num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    constexpr double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend constexpr bool operator==(const Fraction&, const Fraction&) = default;
    friend constexpr bool operator<(const Fraction& a, const Fraction& b) {
        return a.num * b.den < b.num * a.den;
    }

    /// Accepts "a/b" or a decimal such as "0.125" (at most 9 fractional digits).
    static Fraction parse(std::string_view text);

    std::string to_string() const { return std::to_string(num) + "/" + std::to_string(den); }
};

inline Fraction Fraction::parse(std::string_view text) {
    const auto bad = [&] { return std::invalid_argument("cannot parse fraction '" + std::string(text) + "'"); };
    if (text.empty()) throw bad();
    const auto to_int = [&](std::string_view digits) {
        if (digits.empty() || digits.size() > 12) throw bad();
        std::int64_t v = 0;
        for (char c : digits) {
            if (c < '0' || c > '9') throw bad();
            v = v * 10 + (c - '0');
        }
        return v;
    };
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        const auto d = to_int(text.substr(slash + 1));
        if (d == 0) throw bad();
        return {to_int(text.substr(0, slash)), d};
    }
    const auto dot = text.find('.');
    if (dot == std::string_view::npos) return {to_int(text), 1};
    const auto whole = text.substr(0, dot);
    const auto frac = text.substr(dot + 1);
    if (frac.size() > 9) throw bad();
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    const std::int64_t w = whole.empty() ? 0 : to_int(whole);
    const std::int64_t f = frac.empty() ? 0 : to_int(frac);
    return {w * scale + f, scale};
}

}  // namespace fairtree
