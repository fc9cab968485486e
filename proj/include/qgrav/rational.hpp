#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>

namespace qgrav {

// Exact rational arithmetic on int64 numerator/denominator. All operations
// are checked: on overflow they report failure instead of wrapping, and the
// caller decides how to degrade (the expression layer falls back to keeping
// the operation symbolic).
class Rational {
public:
    constexpr Rational() : num_(0), den_(1) {}
    constexpr Rational(std::int64_t n) : num_(n), den_(1) {}
    Rational(std::int64_t n, std::int64_t d) {
        if (d == 0) { num_ = 0; den_ = 0; return; }  // invalid marker, callers check
        if (d < 0) { n = -n; d = -d; }
        const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
        num_ = g ? n / g : n;
        den_ = g ? d / g : d;
    }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    bool valid() const { return den_ != 0; }
    bool is_integer() const { return den_ == 1; }
    bool is_zero() const { return num_ == 0; }
    bool is_one() const { return num_ == 1 && den_ == 1; }
    bool negative() const { return num_ < 0; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    static std::optional<Rational> add(const Rational& a, const Rational& b) {
        __int128 n = (__int128)a.num_ * b.den_ + (__int128)b.num_ * a.den_;
        __int128 d = (__int128)a.den_ * b.den_;
        return normalize(n, d);
    }
    static std::optional<Rational> mul(const Rational& a, const Rational& b) {
        __int128 n = (__int128)a.num_ * b.num_;
        __int128 d = (__int128)a.den_ * b.den_;
        return normalize(n, d);
    }
    static std::optional<Rational> neg(const Rational& a) {
        if (a.num_ == INT64_MIN) return std::nullopt;
        Rational r;
        r.num_ = -a.num_;
        r.den_ = a.den_;
        return r;
    }
    // a^n for integer n; n < 0 inverts (fails on zero base).
    static std::optional<Rational> pow(const Rational& a, std::int64_t n) {
        if (n == 0) return Rational(1);
        Rational base = a;
        if (n < 0) {
            if (a.num_ == 0) return std::nullopt;
            base = Rational(a.den_, a.num_);
            n = -n;
        }
        if (n > 63) return std::nullopt;
        Rational acc(1);
        for (std::int64_t i = 0; i < n; ++i) {
            auto m = mul(acc, base);
            if (!m) return std::nullopt;
            acc = *m;
        }
        return acc;
    }

    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const {
        return (__int128)num_ * o.den_ < (__int128)o.num_ * den_;
    }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

private:
    static std::optional<Rational> normalize(__int128 n, __int128 d) {
        if (d == 0) return std::nullopt;
        if (d < 0) { n = -n; d = -d; }
        __int128 an = n < 0 ? -n : n;
        __int128 g = gcd128(an, d);
        if (g > 1) { n /= g; d /= g; }
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX) return std::nullopt;
        Rational r;
        r.num_ = static_cast<std::int64_t>(n);
        r.den_ = static_cast<std::int64_t>(d);
        return r;
    }
    static __int128 gcd128(__int128 a, __int128 b) {
        while (b) { __int128 t = a % b; a = b; b = t; }
        return a;
    }

    std::int64_t num_;
    std::int64_t den_;
};

}  // namespace qgrav
