#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "beam.hpp"
#include "errors.hpp"
#include "polarization.hpp"
#include "quadrature.hpp"
#include "special_math.hpp"
#include "turbulence.hpp"

// Ground-truth intensity by direct numerical integration of the propagated
// cross-spectral density. Independent of the series in beam.hpp: only the
// Hermite recurrence, the turbulence term and the generic quadrature engine
// are shared.

namespace hgpol::oracle {

struct OracleSettings {
    double relative_tolerance = 1e-9;
    /// Half-width of the integration square in envelope widths.
    double truncation_radius = 8.0;
    int max_subdivision_depth = 40;

    void validate() const
    {
        if (!(relative_tolerance > 0.0 && relative_tolerance <= 1e-3))
            throw DomainError("OracleSettings: relative_tolerance must lie in (0, 1e-3]");
        if (!(truncation_radius >= 5.0))
            throw DomainError("OracleSettings: truncation_radius must be >= 5");
        if (max_subdivision_depth < 1)
            throw DomainError("OracleSettings: max_subdivision_depth must be >= 1");
    }
};

struct OracleResult {
    double value = 0.0;
    double error_estimate = 0.0;
};

/**
 * One Cartesian axis of the separable coincident-point CSD integral,
 *
 *   F = int du int dv exp(-2u^2/w0^2) exp(-v^2 eps_inv2) exp(-i k u v / z)
 *       exp(i k rho' v / z) H(sqrt2 (u - v/2)/w0) H(sqrt2 (u + v/2)/w0),
 *
 * with u the mean and v the difference of the two source coordinates. The
 * u-v coupling phase follows from expanding the two Fresnel kernels. The
 * integrand is complex; its imaginary part integrates to zero by symmetry and
 * is checked.
 *
 * The domain is a square truncated at `truncation_radius` envelope widths,
 * widened by sqrt(2 order) widths to cover the Hermite growth.
 */
inline OracleResult oracle_axis_factor(unsigned order, double w0, double eps_inv2, double k, double z,
                                       double rho_prime, const OracleSettings& settings = {})
{
    settings.validate();
    if (!(z > 0.0))
        throw DomainError("oracle_axis_factor: z must be > 0");
    if (!(w0 > 0.0) || !(eps_inv2 > 0.0) || !(k > 0.0))
        throw DomainError("oracle_axis_factor: w0, eps_inv2 and k must be > 0");

    const double scale = std::numbers::sqrt2 / w0;
    const double radius = settings.truncation_radius + std::sqrt(2.0 * order);
    const double u_half = radius * w0 / std::numbers::sqrt2;
    const double v_half = radius / std::sqrt(eps_inv2);
    const double kz = k / z;

    quad::Options outer;
    outer.rel_tol = settings.relative_tolerance;
    outer.max_depth = settings.max_subdivision_depth;

    double worst_inner_error = 0.0;

    auto inner = [&](double v) -> std::complex<double> {
        const double gauss_v = std::exp(-v * v * eps_inv2);
        const std::complex<double> shift = std::polar(1.0, kz * rho_prime * v);
        auto f = [&](double u) -> std::complex<double> {
            const double h = special::hermite(order, scale * (u - 0.5 * v)) *
                             special::hermite(order, scale * (u + 0.5 * v));
            return std::exp(-2.0 * u * u / (w0 * w0)) * h * std::polar(1.0, -kz * u * v);
        };
        // The inner value can be far smaller than its absolute integrand
        // (oscillation), so its tolerance is anchored to the absolute scale.
        quad::Options opts;
        opts.rel_tol = 0.1 * settings.relative_tolerance;
        opts.max_depth = settings.max_subdivision_depth;
        auto pilot = quad::integrate(
            [&](double u) { return std::abs(f(u)); }, -u_half, u_half,
            quad::Options{1e-3, 0.0, settings.max_subdivision_depth, 20000});
        opts.abs_tol = 1e-3 * settings.relative_tolerance * pilot.value;
        auto r = quad::integrate(f, -u_half, u_half, opts);
        worst_inner_error = std::max(worst_inner_error, r.error * gauss_v);
        return gauss_v * shift * r.value;
    };

    auto res = quad::integrate(inner, -v_half, v_half, outer);

    const double value = res.value.real();
    const double error = res.error + 2.0 * v_half * worst_inner_error;
    const double residue = std::fabs(res.value.imag());
    if (residue > 10.0 * (settings.relative_tolerance * std::fabs(value) + error)) {
        throw NumericFailure("oracle_axis_factor: imaginary residue " + std::to_string(residue) +
                                 " exceeds tolerance; integrand definition is inconsistent",
                             residue);
    }
    return {value, error};
}

/// Intensity by the oracle for a known 1/rho^2: (k / 2 pi z)^2 F_x F_y.
inline OracleResult oracle_intensity(const BeamParams& beam, double sigma0, double inv_rho2,
                                     const Observation& obs, const OracleSettings& settings = {})
{
    const double k = beam.wavenumber();
    const double w0 = beam.waist;
    const double eps_inv2 = 1.0 / (2.0 * w0 * w0) + 1.0 / (2.0 * sigma0 * sigma0) + inv_rho2;
    const auto fx = oracle_axis_factor(beam.order_x, w0, eps_inv2, k, obs.z, obs.rho_x, settings);
    const auto fy = oracle_axis_factor(beam.order_y, w0, eps_inv2, k, obs.z, obs.rho_y, settings);
    const double pre = k / (2.0 * std::numbers::pi * obs.z);
    const double pre2 = pre * pre;
    return {pre2 * fx.value * fy.value,
            pre2 * (std::fabs(fx.value) * fy.error_estimate + std::fabs(fy.value) * fx.error_estimate +
                    fx.error_estimate * fy.error_estimate)};
}

inline OracleResult oracle_intensity(const BeamParams& beam, const CoherenceSpec& spec,
                                     const PathSpec& path, const Observation& obs,
                                     const OracleSettings& settings = {})
{
    beam.validate();
    spec.validate();
    if (!(obs.z > 0.0))
        throw DomainError("oracle_intensity: z must be > 0");
    PathSpec at_plane = path;
    at_plane.distance = obs.z;
    return oracle_intensity(beam, spec.sigma0, effective_inverse_rho2(at_plane, beam.wavenumber()), obs,
                            settings);
}

/// Oracle analogue of csd_element: sigma0 -> sigma0_ij, scaled by gamma_ij.
inline std::complex<double> oracle_csd_element(Component ij, const BeamParams& beam,
                                               const PolarizationSource& source, const PathSpec& path,
                                               const Observation& obs, const OracleSettings& settings = {})
{
    source.validate();
    double sigma = source.sigma0_xy;
    std::complex<double> gamma = source.gamma_xy;
    switch (ij) {
    case Component::XX: sigma = source.sigma0_xx; gamma = source.gamma_xx; break;
    case Component::YY: sigma = source.sigma0_yy; gamma = source.gamma_yy; break;
    case Component::XY: break;
    case Component::YX: gamma = std::conj(source.gamma_xy); break;
    }
    return gamma * oracle_intensity(beam, CoherenceSpec{sigma}, path, obs, settings).value;
}

} // namespace hgpol::oracle
