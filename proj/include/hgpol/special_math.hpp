#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "log_signed.hpp"

namespace hgpol::special {

inline constexpr unsigned max_polynomial_order = 64;
inline constexpr unsigned max_binomial_n = 128;

namespace detail {

inline void check_order(unsigned order, const char* what)
{
    if (order > max_polynomial_order)
        throw UnsupportedOrder(std::string(what) + ": order " + std::to_string(order) +
                               " exceeds cap " + std::to_string(max_polynomial_order));
}

} // namespace detail

/// Physicists' Hermite polynomial H_order(x) (weight exp(-x^2)).
inline double hermite(unsigned order, double x)
{
    detail::check_order(order, "hermite");
    if (order == 0)
        return 1.0;
    double prev = 1.0;
    double cur = 2.0 * x;
    for (unsigned i = 1; i < order; ++i) {
        const double next = 2.0 * x * cur - 2.0 * i * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

/// Binomial coefficient C(n, k), exact for every representable value.
inline LogSignedValue binomial(unsigned n, unsigned k)
{
    if (k > n)
        throw DomainError("binomial: k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
    if (n > max_binomial_n)
        throw DomainError("binomial: n = " + std::to_string(n) + " exceeds cap " +
                          std::to_string(max_binomial_n));
    if (k > n - k)
        k = n - k;
    // c * (n-k+i) / i is an integer at each step; splitting c = q*i + r keeps
    // every intermediate below the final value.
    unsigned __int128 c = 1;
    for (unsigned i = 1; i <= k; ++i) {
        const unsigned __int128 top = n - k + i;
        const unsigned __int128 q = c / i;
        const unsigned __int128 r = c % i;
        c = q * top + (r * top) / i;
    }
    return LogSignedValue::from_real(static_cast<double>(c));
}

/// n! as a LogSignedValue.
inline LogSignedValue factorial(unsigned n)
{
    LogSignedValue f = LogSignedValue::one();
    for (unsigned i = 2; i <= n; ++i)
        f = f * LogSignedValue::from_real(static_cast<double>(i));
    return f;
}

/// Generalized Laguerre polynomial L_n^alpha(x) by the three-term recurrence.
inline double laguerre(unsigned n, double alpha, double x)
{
    detail::check_order(n, "laguerre");
    if (n == 0)
        return 1.0;
    double prev = 1.0;
    double cur = 1.0 + alpha - x;
    for (unsigned k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

/**
 * Closed form of  integral over R of x^n exp(-p x^2 + 2 q x) dx.
 *
 * The textbook form carries (q/p)^n (p/4q^2)^k and divides by q. Combining
 * the two gives q^(n-2k) p^(k-n) 4^(-k), which is finite at q = 0: only the
 * k = n/2 term survives there, and odd n yields zero.
 */
inline std::complex<double> gaussian_moment(unsigned n, double p, std::complex<double> q)
{
    detail::check_order(n, "gaussian_moment");
    if (!(p > 0.0))
        throw DomainError("gaussian_moment: p must be positive, integral diverges");

    std::vector<std::complex<double>> q_pow(n + 1);
    q_pow[0] = 1.0;
    for (unsigned j = 1; j <= n; ++j)
        q_pow[j] = q_pow[j - 1] * q;

    std::complex<double> sum = 0.0;
    for (unsigned k = 0; 2 * k <= n; ++k) {
        const double coeff =
            (factorial(n) / (factorial(n - 2 * k) * factorial(k))).to_real() *
            std::pow(p, static_cast<double>(k) - n) * std::pow(4.0, -static_cast<double>(k));
        sum += coeff * q_pow[n - 2 * k];
    }
    return std::exp(q * q / p) * std::sqrt(std::numbers::pi / p) * sum;
}

} // namespace hgpol::special
