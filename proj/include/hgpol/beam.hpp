#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "log_signed.hpp"
#include "special_math.hpp"
#include "turbulence.hpp"

namespace hgpol {

inline constexpr unsigned max_beam_order = 20;

/// Deterministic Hermite-Gaussian source, SI units.
struct BeamParams {
    double wavelength = 800e-9;
    double waist = 0.03;
    unsigned order_x = 0; ///< m
    unsigned order_y = 0; ///< n

    double wavenumber() const { return 2.0 * std::numbers::pi / wavelength; }

    void validate() const
    {
        if (!(wavelength > 0.0))
            throw DomainError("BeamParams: wavelength must be > 0");
        if (!(waist > 0.0))
            throw DomainError("BeamParams: waist must be > 0");
        if (order_x > max_beam_order || order_y > max_beam_order)
            throw UnsupportedOrder("BeamParams: mode orders are limited to " +
                                   std::to_string(max_beam_order));
    }

    friend bool operator==(const BeamParams&, const BeamParams&) = default;
};

/// Gaussian Schell-model degree of coherence.
struct CoherenceSpec {
    double sigma0 = 0.01;

    void validate() const
    {
        if (!(sigma0 > 0.0))
            throw DomainError("CoherenceSpec: sigma0 must be > 0");
    }
};

struct Observation {
    double rho_x = 0.0;
    double rho_y = 0.0;
    double z = 1.0;

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// Constants of the closed-form intensity at one observation point.
struct PropagationConstants {
    double a = 0.0;                  ///< k^2 w0^2 / (8 z^2) + 1/eps^2
    std::complex<double> b_x;        ///< i k rho'_x / (2 z)
    std::complex<double> b_y;        ///< i k rho'_y / (2 z)
    double d = 0.0;                  ///< k^2 w0^2 / (4 z^2) + 1/w0^2
    double eps_inv2 = 0.0;           ///< 1/(2 w0^2) + 1/(2 sigma0^2) + 1/rho^2
    double inv_rho2 = 0.0;           ///< turbulence part of eps_inv2
    double wavenumber = 0.0;
    double z = 0.0;
};

/// H_m(sqrt2 x / w0) H_n(sqrt2 y / w0) exp(-(x^2 + y^2) / w0^2).
inline double source_field(const BeamParams& beam, double rho_x, double rho_y)
{
    const double s = std::numbers::sqrt2 / beam.waist;
    return special::hermite(beam.order_x, s * rho_x) * special::hermite(beam.order_y, s * rho_y) *
           std::exp(-(rho_x * rho_x + rho_y * rho_y) / (beam.waist * beam.waist));
}

inline double coherence_degree(const CoherenceSpec& spec, double dx, double dy)
{
    return std::exp(-(dx * dx + dy * dy) / (2.0 * spec.sigma0 * spec.sigma0));
}

/// Cross-spectral density of the source between points (x1, y1) and (x2, y2).
inline double source_csd(const BeamParams& beam, const CoherenceSpec& spec, double x1, double y1,
                         double x2, double y2)
{
    return source_field(beam, x1, y1) * source_field(beam, x2, y2) *
           coherence_degree(spec, x1 - x2, y1 - y2);
}

/// Constants for a known turbulence term 1/rho^2. Reused by the polarization
/// elements, which share 1/rho^2 but differ in sigma0.
inline PropagationConstants propagation_constants(const BeamParams& beam, double sigma0,
                                                  double inv_rho2, const Observation& obs)
{
    if (!(obs.z > 0.0))
        throw DomainError("propagation_constants: observation plane must have z > 0");
    if (!(sigma0 > 0.0))
        throw DomainError("propagation_constants: sigma0 must be > 0");
    const double k = beam.wavenumber();
    const double w0 = beam.waist;
    const double kw = k * w0 / obs.z;

    PropagationConstants c;
    c.wavenumber = k;
    c.z = obs.z;
    c.inv_rho2 = inv_rho2;
    c.eps_inv2 = 1.0 / (2.0 * w0 * w0) + 1.0 / (2.0 * sigma0 * sigma0) + inv_rho2;
    c.a = kw * kw / 8.0 + c.eps_inv2;
    c.d = kw * kw / 4.0 + 1.0 / (w0 * w0);
    c.b_x = {0.0, k * obs.rho_x / (2.0 * obs.z)};
    c.b_y = {0.0, k * obs.rho_y / (2.0 * obs.z)};
    return c;
}

/// Constants at `obs`. The turbulence term is evaluated over the path with its
/// distance taken from the observation plane.
inline PropagationConstants propagation_constants(const BeamParams& beam, const CoherenceSpec& spec,
                                                  const PathSpec& path, const Observation& obs)
{
    beam.validate();
    spec.validate();
    if (!(obs.z > 0.0))
        throw DomainError("propagation_constants: observation plane must have z > 0");
    PathSpec at_plane = path;
    at_plane.distance = obs.z;
    return propagation_constants(beam, spec.sigma0, effective_inverse_rho2(at_plane, beam.wavenumber()),
                                 obs);
}

inline constexpr double series_residue_tolerance = 1e-10;

/**
 * One axis factor of the closed-form intensity:
 *
 *   S = 2^m m! exp(b^2/a) sum_{l=0}^{m} sum_{k=0}^{l} T(l, k)
 *   T(l, k) = (-1)^l C(m, l) d^l / l! (2l)! / ((2l-2k)! k!) b^(2(l-k)) 4^(-k) a^(k-2l)
 *
 * Magnitudes are carried as LogSignedValue and summed against a common
 * binary exponent with compensated summation. b enters only through b^2; for
 * the physical (purely imaginary) b the terms are real. A residual imaginary
 * part above 1e-10 of the summed term magnitudes raises NumericFailure.
 */
inline double series_s(unsigned order, double a, std::complex<double> b, double d)
{
    if (order > max_beam_order)
        throw UnsupportedOrder("series_s: order " + std::to_string(order) + " exceeds cap " +
                               std::to_string(max_beam_order));
    if (!(a > 0.0))
        throw DomainError("series_s: a must be > 0");
    if (!(d >= 0.0))
        throw DomainError("series_s: d must be >= 0");

    const std::complex<double> b2 = b * b;
    const bool b2_real = b2.imag() == 0.0;
    const LogSignedValue b2_abs = LogSignedValue::from_real(std::abs(b2));
    const double b2_arg = std::arg(b2);
    const LogSignedValue a_val = LogSignedValue::from_real(a);
    const LogSignedValue d_val = LogSignedValue::from_real(d);
    const LogSignedValue quarter = LogSignedValue::from_real(0.25);

    struct Term {
        LogSignedValue magnitude;
        unsigned b2_power;
    };
    std::vector<Term> terms;
    terms.reserve((order + 1) * (order + 2) / 2);

    for (unsigned l = 0; l <= order; ++l) {
        const LogSignedValue outer = special::binomial(order, order - l) * d_val.pow(l) /
                                     special::factorial(l) * special::factorial(2 * l);
        for (unsigned k = 0; k <= l; ++k) {
            const unsigned power = l - k;
            if (power > 0 && b2_abs.is_zero())
                continue;
            LogSignedValue t = outer / (special::factorial(2 * l - 2 * k) * special::factorial(k)) *
                               b2_abs.pow(power) * quarter.pow(k);
            // a^(k - 2l) with k <= l, so the exponent is never positive.
            t = t / a_val.pow(2 * l - k);
            if (l % 2 == 1)
                t = -t;
            terms.push_back({t, power});
        }
    }

    std::int64_t ref = terms.front().magnitude.binary_exponent();
    for (const Term& t : terms)
        if (!t.magnitude.is_zero())
            ref = std::max(ref, t.magnitude.binary_exponent());

    // Neumaier summation of real and imaginary parts at scale 2^ref.
    double re = 0.0, re_c = 0.0, im = 0.0, im_c = 0.0, l1 = 0.0;
    auto add = [](double& sum, double& comp, double x) {
        const double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    };
    for (const Term& t : terms) {
        const double mag = t.magnitude.to_real_scaled(ref);
        l1 += std::fabs(mag);
        if (b2_real) {
            const bool flip = b2.real() < 0.0 && (t.b2_power % 2 == 1);
            add(re, re_c, flip ? -mag : mag);
        } else {
            const std::complex<double> phase = std::polar(1.0, b2_arg * t.b2_power);
            add(re, re_c, mag * phase.real());
            add(im, im_c, mag * phase.imag());
        }
    }
    std::complex<double> sum(re + re_c, im + im_c);

    // Prefactor 2^m m! exp(b^2 / a), kept off the double range until the end.
    const std::complex<double> expo = b2 / a;
    sum *= std::polar(1.0, expo.imag());
    if (std::fabs(sum.imag()) > series_residue_tolerance * l1) {
        throw NumericFailure("series_s: imaginary residue " + std::to_string(std::fabs(sum.imag())) +
                                 " relative to term magnitude " + std::to_string(l1),
                             std::fabs(sum.imag()) / l1);
    }
    const LogSignedValue pre = LogSignedValue::from_real(std::ldexp(1.0, static_cast<int>(order))) *
                               special::factorial(order) * LogSignedValue::from_log(expo.real());
    const LogSignedValue total = pre * LogSignedValue::from_real(sum.real());
    return total.to_real_scaled(-ref);
}

/// Closed-form intensity (k/2z)^2 w0^2/(2a) S_x S_y for precomputed constants.
inline double intensity(const BeamParams& beam, const PropagationConstants& c)
{
    const double sx = series_s(beam.order_x, c.a, c.b_x, c.d);
    const double sy = series_s(beam.order_y, c.a, c.b_y, c.d);
    const double pre = c.wavenumber / (2.0 * c.z);
    return pre * pre * beam.waist * beam.waist / (2.0 * c.a) * sx * sy;
}

/// Average intensity of the partially coherent beam at `obs`.
inline double intensity(const BeamParams& beam, const CoherenceSpec& spec, const PathSpec& path,
                        const Observation& obs)
{
    return intensity(beam, propagation_constants(beam, spec, path, obs));
}

} // namespace hgpol
