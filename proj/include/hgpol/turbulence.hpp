#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "errors.hpp"
#include "quadrature.hpp"

namespace hgpol {

/// Altitude-dependent turbulence strength and the scales that enter the
/// phase structure function. SI units throughout.
struct TurbulenceProfile {
    double cn2_ground = 1e-14;    ///< C_n^2 at h = 0, m^(-2/3)
    double wind_rms = 2.1;        ///< rms wind speed v, m/s
    double inner_scale = 0.01;    ///< l0, m
    double ground_altitude = 0.0; ///< lower limit h0 of the altitude integrals, m

    void validate() const
    {
        if (!(cn2_ground >= 0.0))
            throw DomainError("TurbulenceProfile: cn2_ground must be >= 0");
        if (!(wind_rms >= 0.0))
            throw DomainError("TurbulenceProfile: wind_rms must be >= 0");
        if (!(inner_scale > 0.0))
            throw DomainError("TurbulenceProfile: inner_scale must be > 0");
        if (!(ground_altitude >= 0.0))
            throw DomainError("TurbulenceProfile: ground_altitude must be >= 0");
    }

    friend bool operator==(const TurbulenceProfile&, const TurbulenceProfile&) = default;
};

enum class PathKind { FreeSpace, Horizontal, SlantUp, SlantDown };

inline constexpr std::string_view to_string(PathKind kind)
{
    switch (kind) {
    case PathKind::FreeSpace: return "free_space";
    case PathKind::Horizontal: return "horizontal";
    case PathKind::SlantUp: return "slant_up";
    case PathKind::SlantDown: return "slant_down";
    }
    return "unknown";
}

inline std::optional<PathKind> parse_path_kind(std::string_view name)
{
    for (PathKind k : {PathKind::FreeSpace, PathKind::Horizontal, PathKind::SlantUp, PathKind::SlantDown})
        if (to_string(k) == name)
            return k;
    return std::nullopt;
}

inline constexpr bool is_slant(PathKind kind)
{
    return kind == PathKind::SlantUp || kind == PathKind::SlantDown;
}

struct PathSpec {
    PathKind kind = PathKind::FreeSpace;
    double zenith = 0.0;   ///< xi, rad; slant kinds only
    double distance = 1.0; ///< z, m
    TurbulenceProfile profile{};

    /// Altitude span H = z cos(xi) of a slant link.
    double altitude_span() const { return distance * std::cos(zenith); }

    void validate() const
    {
        if (!(distance > 0.0))
            throw DomainError("PathSpec: distance must be > 0");
        if (kind == PathKind::FreeSpace)
            return;
        profile.validate();
        if (is_slant(kind)) {
            if (!(zenith >= 0.0 && zenith < std::numbers::pi / 2))
                throw DomainError("PathSpec: zenith must lie in [0, pi/2) for slant paths");
            if (!(altitude_span() > 0.0))
                throw DomainError("PathSpec: altitude span z cos(zenith) must be > 0");
        }
    }

    friend bool operator==(const PathSpec&, const PathSpec&) = default;
};

/// Hufnagel-Valley structure constant at altitude h (m).
inline double cn2_at_altitude(const TurbulenceProfile& profile, double h)
{
    if (!(h >= 0.0))
        throw DomainError("cn2_at_altitude: altitude must be >= 0");
    const double wind = profile.wind_rms / 27.0;
    const double scaled = 1e-5 * h;
    const double s2 = scaled * scaled;
    const double s10 = s2 * s2 * s2 * s2 * s2;
    return 0.00594 * wind * wind * s10 * std::exp(-h / 1000.0) +
           2.7e-16 * std::exp(-h / 1500.0) + profile.cn2_ground * std::exp(-h / 100.0);
}

/// Spherical-wave coherence length (0.545 C_n^2 k^2 z)^(-3/5); +inf when cn2 = 0.
inline double rho0_horizontal(double wavenumber, double z, double cn2)
{
    if (!(wavenumber > 0.0) || !(z > 0.0) || !(cn2 >= 0.0))
        throw DomainError("rho0_horizontal: require k > 0, z > 0, cn2 >= 0");
    if (cn2 == 0.0)
        return std::numeric_limits<double>::infinity();
    return std::pow(0.545 * cn2 * wavenumber * wavenumber * z, -0.6);
}

struct SlantCoefficients {
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
};

/// 3.2796 k^2 l0^(-1/3) sec(xi), the common prefactor of A1, A2, A3.
inline double slant_prefactor(const PathSpec& path, double wavenumber)
{
    return 3.2796 * wavenumber * wavenumber * std::pow(path.profile.inner_scale, -1.0 / 3.0) /
           std::cos(path.zenith);
}

inline quad::Options slant_quadrature_options()
{
    quad::Options opts;
    opts.rel_tol = 1e-10;
    opts.max_depth = 50;
    return opts;
}

/**
 * Slant-path coefficients for an arbitrary altitude profile `cn2(h)`.
 *
 * The weight variable is eta = 1 - h/H on an upward path and eta = h/H on a
 * downward one; A1, A2, A3 integrate C_n^2 against (1-eta)^2, 2 eta (1-eta)
 * and eta^2 over [h0, H].
 */
template <class Cn2>
SlantCoefficients slant_coefficients(const PathSpec& path, double wavenumber, Cn2&& cn2,
                                     const quad::Options& opts = slant_quadrature_options())
{
    if (!is_slant(path.kind))
        throw DomainError("slant_coefficients: path must be slant_up or slant_down");
    path.validate();
    const double span = path.altitude_span();
    const double h0 = path.profile.ground_altitude;
    if (!(h0 < span))
        throw DomainError("slant_coefficients: ground altitude must lie below z cos(zenith)");

    const bool up = path.kind == PathKind::SlantUp;
    auto eta = [&](double h) { return up ? 1.0 - h / span : h / span; };

    auto a1 = quad::integrate([&](double h) { const double e = eta(h); return cn2(h) * (1 - e) * (1 - e); },
                              h0, span, opts);
    auto a2 = quad::integrate([&](double h) { const double e = eta(h); return 2.0 * cn2(h) * e * (1 - e); },
                              h0, span, opts);
    auto a3 = quad::integrate([&](double h) { const double e = eta(h); return cn2(h) * e * e; },
                              h0, span, opts);

    const double pre = slant_prefactor(path, wavenumber);
    return {pre * a1.value, pre * a2.value, pre * a3.value};
}

inline SlantCoefficients slant_coefficients(const PathSpec& path, double wavenumber)
{
    return slant_coefficients(path, wavenumber,
                              [&](double h) { return cn2_at_altitude(path.profile, h); });
}

/**
 * Turbulence contribution 1/rho^2 to the source coherence term at
 * coincident observation points: 0 in free space, 1/rho0^2 on a horizontal
 * path (C_n^2 taken at ground level), A3/2 on slant paths.
 */
inline double effective_inverse_rho2(const PathSpec& path, double wavenumber)
{
    path.validate();
    switch (path.kind) {
    case PathKind::FreeSpace:
        return 0.0;
    case PathKind::Horizontal: {
        if (path.profile.cn2_ground == 0.0)
            return 0.0;
        const double rho0 = rho0_horizontal(wavenumber, path.distance, path.profile.cn2_ground);
        return 1.0 / (rho0 * rho0);
    }
    case PathKind::SlantUp:
    case PathKind::SlantDown:
        return 0.5 * slant_coefficients(path, wavenumber).a3;
    }
    return 0.0;
}

} // namespace hgpol
