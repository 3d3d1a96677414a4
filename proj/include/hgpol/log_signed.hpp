#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "errors.hpp"

namespace hgpol {

/**
 * Signed real number stored as sign, binary fraction in [0.5, 1) and an
 * unbounded binary exponent.
 *
 * Products and quotients of factorials, binomials and powers that would
 * overflow a double stay representable, and each multiplication costs a
 * single rounding of the fraction. The natural log of the magnitude is
 * available through log_magnitude().
 */
class LogSignedValue {
public:
    constexpr LogSignedValue() = default;

    static LogSignedValue zero() { return {}; }
    static LogSignedValue one() { return from_real(1.0); }

    static LogSignedValue from_real(double x)
    {
        LogSignedValue v;
        if (std::isnan(x))
            throw DomainError("LogSignedValue: NaN input");
        if (x == 0.0)
            return v;
        int e = 0;
        double f = std::frexp(std::fabs(x), &e);
        v.sign_ = x < 0 ? -1 : 1;
        v.fraction_ = f;
        v.exponent_ = e;
        return v;
    }

    /// Value with magnitude exp(log_magnitude).
    static LogSignedValue from_log(double log_magnitude, int sign = 1)
    {
        LogSignedValue v;
        if (sign == 0 || log_magnitude == -std::numeric_limits<double>::infinity())
            return v;
        const double log2_mag = log_magnitude / std::log(2.0);
        const double whole = std::floor(log2_mag);
        // exp2 of the fractional part lands in [1, 2); frexp normalizes it.
        int e = 0;
        double f = std::frexp(std::exp2(log2_mag - whole), &e);
        v.sign_ = sign < 0 ? -1 : 1;
        v.fraction_ = f;
        v.exponent_ = static_cast<std::int64_t>(whole) + e;
        return v;
    }

    int sign() const noexcept { return sign_; }
    bool is_zero() const noexcept { return sign_ == 0; }

    double log_magnitude() const
    {
        if (sign_ == 0)
            return -std::numeric_limits<double>::infinity();
        return std::log(fraction_) + static_cast<double>(exponent_) * std::log(2.0);
    }

    /// Binary exponent such that |x| = fraction * 2^exponent, fraction in [0.5, 1).
    std::int64_t binary_exponent() const noexcept { return exponent_; }

    double to_real() const
    {
        if (sign_ == 0)
            return 0.0;
        return sign_ * scaled(exponent_);
    }

    /// Signed value divided by 2^shift, i.e. the mantissa re-expressed
    /// relative to a common reference exponent.
    double to_real_scaled(std::int64_t shift) const
    {
        if (sign_ == 0)
            return 0.0;
        return sign_ * scaled(exponent_ - shift);
    }

    LogSignedValue pow(unsigned n) const
    {
        LogSignedValue result = one();
        LogSignedValue base = *this;
        while (n != 0) {
            if (n & 1u)
                result = result * base;
            base = base * base;
            n >>= 1u;
        }
        return result;
    }

    friend LogSignedValue operator*(const LogSignedValue& x, const LogSignedValue& y)
    {
        if (x.sign_ == 0 || y.sign_ == 0)
            return {};
        int e = 0;
        LogSignedValue r;
        r.fraction_ = std::frexp(x.fraction_ * y.fraction_, &e);
        r.exponent_ = x.exponent_ + y.exponent_ + e;
        r.sign_ = x.sign_ * y.sign_;
        return r;
    }

    friend LogSignedValue operator/(const LogSignedValue& x, const LogSignedValue& y)
    {
        if (y.sign_ == 0)
            throw DomainError("LogSignedValue: division by zero");
        if (x.sign_ == 0)
            return {};
        int e = 0;
        LogSignedValue r;
        r.fraction_ = std::frexp(x.fraction_ / y.fraction_, &e);
        r.exponent_ = x.exponent_ - y.exponent_ + e;
        r.sign_ = x.sign_ * y.sign_;
        return r;
    }

    LogSignedValue operator-() const
    {
        LogSignedValue r = *this;
        r.sign_ = -r.sign_;
        return r;
    }

    friend bool operator==(const LogSignedValue&, const LogSignedValue&) = default;

private:
    double scaled(std::int64_t e) const
    {
        if (e > std::numeric_limits<double>::max_exponent)
            return std::numeric_limits<double>::infinity();
        if (e < std::numeric_limits<double>::min_exponent - std::numeric_limits<double>::digits)
            return 0.0;
        return std::ldexp(fraction_, static_cast<int>(e));
    }

    double fraction_ = 0.0;
    std::int64_t exponent_ = 0;
    int sign_ = 0;
};

} // namespace hgpol
