#ifndef RATEQ_RATIONAL_HPP
#define RATEQ_RATIONAL_HPP

#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace rateq {

/// Exact rational arithmetic on 64-bit numerator/denominator.
/// Symbolic coefficients stay exact; conversion to double happens only at
/// integration time. Overflow throws instead of wrapping.
class Rational {
public:
    constexpr Rational() : num_(0), den_(1) {}
    Rational(std::int64_t n) : num_(n), den_(1) {}
    Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool is_zero() const { return num_ == 0; }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational(checked(i128(a.num_) * b.den_ + i128(b.num_) * a.den_),
                        checked(i128(a.den_) * b.den_), already_checked{});
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return a + Rational(-b.num_, b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational(checked(i128(a.num_) * b.num_),
                        checked(i128(a.den_) * b.den_), already_checked{});
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("rational division by zero");
        return Rational(checked(i128(a.num_) * b.den_),
                        checked(i128(a.den_) * b.num_), already_checked{});
    }
    Rational operator-() const { return Rational(-num_, den_); }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
    }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
        return os << r.str();
    }

    /// Parses a decimal literal ("2", "0.25", "3/4") exactly.
    static Rational parse(const std::string& s) {
        auto slash = s.find('/');
        if (slash != std::string::npos) {
            return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
        }
        auto dot = s.find('.');
        if (dot == std::string::npos) return Rational(std::stoll(s));
        std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den = checked(i128(den) * 10);
        std::int64_t w = whole.empty() || whole == "-" ? 0 : std::stoll(whole);
        std::int64_t f = frac.empty() ? 0 : std::stoll(frac);
        bool neg = !whole.empty() && whole[0] == '-';
        std::int64_t n = checked(i128(w) * den + (neg ? -i128(f) : i128(f)));
        return Rational(n, den);
    }

private:
    using i128 = __int128;
    struct already_checked {};

    Rational(std::int64_t n, std::int64_t d, already_checked) : num_(n), den_(d) { normalize(); }

    static std::int64_t checked(i128 v) {
        if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("rational overflow");
        return static_cast<std::int64_t>(v);
    }

    void normalize() {
        if (den_ == 0) throw std::domain_error("rational with zero denominator");
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) { num_ /= g; den_ /= g; }
        if (num_ == 0) den_ = 1;
    }

    std::int64_t num_;
    std::int64_t den_;
};

} // namespace rateq

#endif
