#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <queue>
#include <string>
#include <type_traits>
#include <vector>

#include "errors.hpp"

namespace hgpol::quad {

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    /// Maximum number of bisections applied to any single subinterval.
    int max_depth = 50;
    std::size_t max_intervals = 20000;
};

template <class T>
struct Result {
    T value{};
    double error = 0.0;
    /// Integral of |f|, used by callers to set absolute tolerances.
    double abs_integral = 0.0;
    std::size_t evaluations = 0;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Panel {
    double a = 0.0;
    double b = 0.0;
    T value{};
    double error = 0.0;
    double abs_integral = 0.0;
    int depth = 0;
};

template <class T>
struct ByError {
    bool operator()(const Panel<T>& x, const Panel<T>& y) const { return x.error < y.error; }
};

/// One G7K15 panel with the QUADPACK error heuristic.
template <class T, class F>
Panel<T> gk15(F& f, double a, double b, int depth)
{
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    std::array<T, 15> fv{};
    fv[7] = f(center);
    for (int j = 0; j < 7; ++j) {
        const double dx = half * xgk[j];
        fv[j] = f(center - dx);
        fv[14 - j] = f(center + dx);
    }

    T kronrod = wgk[7] * fv[7];
    T gauss = wg[3] * fv[7];
    double res_abs = wgk[7] * std::abs(fv[7]);
    for (int j = 0; j < 7; ++j) {
        const T pair = fv[j] + fv[14 - j];
        kronrod += wgk[j] * pair;
        res_abs += wgk[j] * (std::abs(fv[j]) + std::abs(fv[14 - j]));
        if (j % 2 == 1)
            gauss += wg[j / 2] * pair;
    }
    const T mean = 0.5 * kronrod;
    double res_asc = wgk[7] * std::abs(fv[7] - mean);
    for (int j = 0; j < 7; ++j)
        res_asc += wgk[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));

    const double scale = std::fabs(half);
    res_abs *= scale;
    res_asc *= scale;
    double err = std::abs((kronrod - gauss) * half);
    if (res_asc != 0.0 && err != 0.0)
        err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (res_abs > std::numeric_limits<double>::min() / (50.0 * eps))
        err = std::max(50.0 * eps * res_abs, err);

    return Panel<T>{a, b, kronrod * half, err, res_abs, depth};
}

} // namespace detail

/**
 * Globally adaptive Gauss-Kronrod integration of f over [a, b].
 *
 * The panel with the largest error estimate is bisected until the summed
 * estimate satisfies max(abs_tol, rel_tol * |I|). Throws NumericFailure if a
 * panel would exceed max_depth bisections or the panel budget runs out.
 * T may be real or complex.
 */
template <class F>
auto integrate(F&& f, double a, double b, const Options& opts = {})
    -> Result<std::decay_t<std::invoke_result_t<F&, double>>>
{
    using T = std::decay_t<std::invoke_result_t<F&, double>>;
    using detail::Panel;

    Result<T> out;
    if (a == b)
        return out;

    std::priority_queue<Panel<T>, std::vector<Panel<T>>, detail::ByError<T>> heap;
    heap.push(detail::gk15<T>(f, a, b, 0));
    out.evaluations = 15;

    T total = heap.top().value;
    double total_err = heap.top().error;
    double total_abs = heap.top().abs_integral;

    auto converged = [&] {
        return total_err <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
    };

    while (!converged()) {
        Panel<T> worst = heap.top();
        if (worst.depth >= opts.max_depth || heap.size() >= opts.max_intervals) {
            throw NumericFailure("adaptive quadrature did not converge on [" + std::to_string(a) +
                                     ", " + std::to_string(b) + "]: error estimate " +
                                     std::to_string(total_err),
                                 total_err);
        }
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Panel<T> left = detail::gk15<T>(f, worst.a, mid, worst.depth + 1);
        Panel<T> right = detail::gk15<T>(f, mid, worst.b, worst.depth + 1);
        out.evaluations += 30;

        total += (left.value + right.value) - worst.value;
        total_err += (left.error + right.error) - worst.error;
        total_abs += (left.abs_integral + right.abs_integral) - worst.abs_integral;
        heap.push(left);
        heap.push(right);

        // Guard against drift of the running sums.
        if (total_err < 0.0 || (heap.size() % 64) == 0) {
            T v{};
            double e = 0.0;
            double s = 0.0;
            auto copy = heap;
            while (!copy.empty()) {
                v += copy.top().value;
                e += copy.top().error;
                s += copy.top().abs_integral;
                copy.pop();
            }
            total = v;
            total_err = e;
            total_abs = s;
        }
    }

    out.value = total;
    out.error = total_err;
    out.abs_integral = total_abs;
    return out;
}

} // namespace hgpol::quad
