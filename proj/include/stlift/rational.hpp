// Exact rational arithmetic for summary coefficients and index math.
#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "stlift/diag.hpp"

namespace stlift {

namespace detail {
inline bool add_ovf(int64_t a, int64_t b, int64_t* r) { return __builtin_add_overflow(a, b, r); }
inline bool mul_ovf(int64_t a, int64_t b, int64_t* r) { return __builtin_mul_overflow(a, b, r); }
}  // namespace detail

class Rational {
public:
    Rational() = default;
    Rational(int64_t v) : num_(v), den_(1) {}
    Rational(int64_t n, int64_t d) : num_(n), den_(d) {
        if (den_ == 0) throw Error(ErrorCode::DivisionByZeroConstant, "rational with zero denominator");
        reduce();
    }

    int64_t num() const { return num_; }
    int64_t den() const { return den_; }

    bool is_integer() const { return den_ == 1; }
    bool is_zero() const { return num_ == 0; }
    int sign() const { return num_ > 0 ? 1 : num_ < 0 ? -1 : 0; }

    int64_t as_integer() const {
        if (!is_integer()) throw Error(ErrorCode::NonAffineBinding, "expected integer, got " + str());
        return num_;
    }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        int64_t n1, n2, n, d;
        if (detail::mul_ovf(a.num_, b.den_, &n1) || detail::mul_ovf(b.num_, a.den_, &n2) ||
            detail::add_ovf(n1, n2, &n) || detail::mul_ovf(a.den_, b.den_, &d))
            throw Error(ErrorCode::Internal, "rational overflow in +");
        return Rational(n, d);
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + Rational(-b.num_, b.den_); }
    friend Rational operator-(const Rational& a) { return Rational(-a.num_, a.den_); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        int64_t n, d;
        if (detail::mul_ovf(a.num_, b.num_, &n) || detail::mul_ovf(a.den_, b.den_, &d))
            throw Error(ErrorCode::Internal, "rational overflow in *");
        return Rational(n, d);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw Error(ErrorCode::DivisionByZeroConstant, "division by zero constant");
        int64_t n, d;
        if (detail::mul_ovf(a.num_, b.den_, &n) || detail::mul_ovf(a.den_, b.num_, &d))
            throw Error(ErrorCode::Internal, "rational overflow in /");
        return Rational(n, d);
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) { return (a - b).num_ < 0; }
    friend bool operator<=(const Rational& a, const Rational& b) { return (a - b).num_ <= 0; }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    // Exact decimal when the denominator is 2^a * 5^b (true for every
    // decimal literal); falls back to n/d otherwise.
    std::string decimal_str() const {
        if (den_ == 1) return std::to_string(num_);
        int64_t d = den_;
        int64_t scale = 1;
        while (d % 2 == 0) { d /= 2; scale *= 10; }
        int64_t five = 1;
        while (d % 5 == 0) { d /= 5; five *= 10; }
        if (d != 1) return str();
        // digits = max(#2s, #5s)
        int64_t pow10 = scale > five ? scale : five;
        if (pow10 % den_ != 0) return str();
        int64_t scaled_num;
        if (detail::mul_ovf(num_, pow10 / den_, &scaled_num)) return str();
        bool neg = scaled_num < 0;
        std::string digits = std::to_string(neg ? -scaled_num : scaled_num);
        std::string p10 = std::to_string(pow10);
        size_t frac_digits = p10.size() - 1;
        while (digits.size() <= frac_digits) digits.insert(digits.begin(), '0');
        digits.insert(digits.end() - frac_digits, '.');
        return (neg ? "-" : "") + digits;
    }

    // Decimal literal text, e.g. "0.25" -> 1/4. Exact.
    static Rational from_decimal(const std::string& text) {
        auto dot = text.find('.');
        if (dot == std::string::npos) return Rational(std::stoll(text));
        std::string whole = text.substr(0, dot);
        std::string frac = text.substr(dot + 1);
        int64_t scale = 1;
        for (size_t i = 0; i < frac.size(); ++i) {
            if (detail::mul_ovf(scale, 10, &scale))
                throw Error(ErrorCode::SyntaxError, "numeric literal too precise: " + text);
        }
        int64_t w = whole.empty() ? 0 : std::stoll(whole);
        int64_t f = frac.empty() ? 0 : std::stoll(frac);
        bool neg = !whole.empty() && whole[0] == '-';
        int64_t n;
        if (detail::mul_ovf(w, scale, &n)) throw Error(ErrorCode::SyntaxError, "numeric literal overflow");
        n = neg ? n - f : n + f;
        return Rational(n, scale);
    }

private:
    int64_t num_ = 0;
    int64_t den_ = 1;

    void reduce() {
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) { num_ /= g; den_ /= g; }
        if (num_ == 0) den_ = 1;
    }
};

}  // namespace stlift
