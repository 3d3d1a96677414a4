#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "beam.hpp"
#include "errors.hpp"
#include "turbulence.hpp"

namespace hgpol {

/// Electromagnetic source: per-component correlation strengths gamma_ij and
/// correlation lengths sigma0_ij. gamma_yx is conj(gamma_xy) and not stored.
struct PolarizationSource {
    double gamma_xx = 0.5;
    double gamma_yy = 0.5;
    std::complex<double> gamma_xy{0.1, 0.0};
    double sigma0_xx = 0.01;
    double sigma0_yy = 0.01;
    double sigma0_xy = 0.02;

    void validate() const
    {
        if (!(gamma_xx >= 0.0 && gamma_xx <= 1.0) || !(gamma_yy >= 0.0 && gamma_yy <= 1.0))
            throw DomainError("PolarizationSource: gamma_xx and gamma_yy must lie in [0, 1]");
        if (!(std::abs(gamma_xy) <= 1.0))
            throw DomainError("PolarizationSource: |gamma_xy| must not exceed 1");
        if (std::norm(gamma_xy) > gamma_xx * gamma_yy * (1.0 + 1e-12))
            throw DomainError("PolarizationSource: |gamma_xy|^2 must not exceed gamma_xx * gamma_yy");
        if (!(sigma0_xx > 0.0 && sigma0_yy > 0.0 && sigma0_xy > 0.0))
            throw DomainError("PolarizationSource: sigma0 values must be > 0");
    }

    friend bool operator==(const PolarizationSource&, const PolarizationSource&) = default;
};

enum class Component { XX, YY, XY, YX };

/// Hermitian 2x2 coherence matrix stored as its upper triangle.
struct CoherenceMatrix2 {
    double w_xx = 0.0;
    double w_yy = 0.0;
    std::complex<double> w_xy{};

    std::complex<double> w_yx() const { return std::conj(w_xy); }
    double trace() const { return w_xx + w_yy; }
    double determinant() const { return w_xx * w_yy - std::norm(w_xy); }
};

struct PolarizationResult {
    Observation observation;
    CoherenceMatrix2 matrix;
    double dop = 0.0;
    double normalized_intensity = 1.0;
};

namespace detail {

inline double sigma_for(Component c, const PolarizationSource& s)
{
    switch (c) {
    case Component::XX: return s.sigma0_xx;
    case Component::YY: return s.sigma0_yy;
    default: return s.sigma0_xy;
    }
}

inline std::complex<double> gamma_for(Component c, const PolarizationSource& s)
{
    switch (c) {
    case Component::XX: return s.gamma_xx;
    case Component::YY: return s.gamma_yy;
    case Component::XY: return s.gamma_xy;
    case Component::YX: return std::conj(s.gamma_xy);
    }
    return 0.0;
}

inline double path_inverse_rho2(const BeamParams& beam, const PathSpec& path, const Observation& obs)
{
    if (!(obs.z > 0.0))
        throw DomainError("observation plane must have z > 0");
    PathSpec at_plane = path;
    at_plane.distance = obs.z;
    return effective_inverse_rho2(at_plane, beam.wavenumber());
}

} // namespace detail

/// W_ij at a coincident point for a known turbulence term 1/rho^2.
inline std::complex<double> csd_element(Component ij, const BeamParams& beam,
                                        const PolarizationSource& source, double inv_rho2,
                                        const Observation& obs)
{
    const std::complex<double> gamma = detail::gamma_for(ij, source);
    if (gamma == 0.0)
        return 0.0;
    const auto c = propagation_constants(beam, detail::sigma_for(ij, source), inv_rho2, obs);
    return gamma * intensity(beam, c);
}

/// W_ij(rho', rho', z): the scalar intensity with sigma0 -> sigma0_ij, scaled by gamma_ij.
inline std::complex<double> csd_element(Component ij, const BeamParams& beam,
                                        const PolarizationSource& source, const PathSpec& path,
                                        const Observation& obs)
{
    beam.validate();
    source.validate();
    return csd_element(ij, beam, source, detail::path_inverse_rho2(beam, path, obs), obs);
}

inline CoherenceMatrix2 coherence_matrix(const BeamParams& beam, const PolarizationSource& source,
                                         double inv_rho2, const Observation& obs)
{
    CoherenceMatrix2 m;
    m.w_xx = csd_element(Component::XX, beam, source, inv_rho2, obs).real();
    m.w_yy = csd_element(Component::YY, beam, source, inv_rho2, obs).real();
    m.w_xy = csd_element(Component::XY, beam, source, inv_rho2, obs);
    return m;
}

inline CoherenceMatrix2 coherence_matrix(const BeamParams& beam, const PolarizationSource& source,
                                         const PathSpec& path, const Observation& obs)
{
    beam.validate();
    source.validate();
    return coherence_matrix(beam, source, detail::path_inverse_rho2(beam, path, obs), obs);
}

/// Determinants more negative than this fraction of trace^2 are not roundoff.
inline constexpr double determinant_floor = 1e-12;

/// P = sqrt(1 - 4 det W / (tr W)^2).
inline double degree_of_polarization(const CoherenceMatrix2& m)
{
    const double tr = m.trace();
    if (!(tr > 0.0))
        throw DegenerateMatrix("degree_of_polarization: trace must be positive");
    double det = m.determinant();
    if (det < -determinant_floor * tr * tr)
        throw RealizabilityViolation("degree_of_polarization: determinant " + std::to_string(det) +
                                     " is negative beyond roundoff");
    det = std::max(det, 0.0);
    const double radicand = std::clamp(1.0 - 4.0 * det / (tr * tr), 0.0, 1.0);
    return std::sqrt(radicand);
}

/// Degree of polarization in the source plane; independent of beam orders and sigma0.
inline double source_dop(const PolarizationSource& s)
{
    const double tr = s.gamma_xx + s.gamma_yy;
    if (!(tr > 0.0))
        throw DegenerateMatrix("source_dop: gamma_xx + gamma_yy must be positive");
    CoherenceMatrix2 m{s.gamma_xx, s.gamma_yy, s.gamma_xy};
    return degree_of_polarization(m);
}

inline PolarizationResult evaluate_point(const BeamParams& beam, const PolarizationSource& source,
                                         const PathSpec& path, const Observation& obs)
{
    PolarizationResult r;
    r.observation = obs;
    r.matrix = coherence_matrix(beam, source, path, obs);
    r.dop = degree_of_polarization(r.matrix);
    r.normalized_intensity = 1.0;
    return r;
}

/// Evaluates a set of points and normalizes intensity (matrix trace) to the
/// largest value among them.
inline std::vector<PolarizationResult> evaluate_profile(const BeamParams& beam,
                                                        const PolarizationSource& source,
                                                        const PathSpec& path,
                                                        std::span<const Observation> points)
{
    std::vector<PolarizationResult> out;
    out.reserve(points.size());
    double peak = 0.0;
    for (const Observation& obs : points) {
        out.push_back(evaluate_point(beam, source, path, obs));
        peak = std::max(peak, out.back().matrix.trace());
    }
    for (auto& r : out)
        r.normalized_intensity = peak > 0.0 ? r.matrix.trace() / peak : 0.0;
    return out;
}

} // namespace hgpol
