#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "polarization.hpp"
#include "scenario_config.hpp"
#include "scenario_run.hpp"
#include "turbulence.hpp"

namespace hgpol {

inline constexpr std::string_view figure_ids[] = {"fig1", "fig2", "fig3", "fig4", "fig5", "table1"};

inline bool is_figure_id(std::string_view id)
{
    for (auto f : figure_ids)
        if (f == id)
            return true;
    return false;
}

/// Altitudes of the reference C_n^2 table, m.
inline constexpr double table1_altitudes[] = {0.0, 100.0, 200.0, 256.0, 300.0, 800.0, 1485.0};

struct Table1Row {
    double altitude = 0.0;
    double cn2 = 0.0;
};

inline std::vector<Table1Row> table1_rows(const TurbulenceProfile& profile = {})
{
    std::vector<Table1Row> rows;
    for (double h : table1_altitudes)
        rows.push_back({h, cn2_at_altitude(profile, h)});
    return rows;
}

inline std::string table1_csv(const std::vector<Table1Row>& rows)
{
    std::string out = "altitude_m,cn2_m-2/3\n";
    for (const auto& r : rows)
        out += format_number(r.altitude) + "," + format_number(r.cn2) + "\n";
    return out;
}

/// One sweep of a figure plus the suffix that distinguishes its curves.
struct FigurePart {
    ScenarioConfig config;
    std::string series_suffix;
};

namespace figure_detail {

inline ScenarioConfig base(std::string_view id)
{
    ScenarioConfig c = default_config();
    c.label = std::string(id);
    c.beam.order_x = c.beam.order_y = 2;
    c.zenith = std::numbers::pi / 3;
    return c;
}

inline std::string km(double z)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, ", z=%g km", z / 1000.0);
    return buf;
}

} // namespace figure_detail

/**
 * Sweeps behind each figure, built on default_config():
 *  fig1  m = n = 4, diagonal profile over +-4 beam widths (61 points) at
 *        z = 1, 5, 20, 50 km, all paths
 *  fig2  P on axis against 50 log-spaced distances, 10 m to 100 km
 *  fig3  P on axis against m = n = 0..10 at z = 10 km
 *  fig4  as fig2 up to 10 km with sigma0 (xx, yy, xy) = (1, 1, 2) mm and
 *        (100, 100, 200) mm
 *  fig5  P on axis against zenith 0..89.5 deg (0.5 deg steps) at
 *        z = 1, 5, 20 km, slant paths only
 * Zenith is pi/3 and m = n = 2 wherever not listed.
 */
inline std::vector<FigurePart> figure_parts(std::string_view id)
{
    using namespace figure_detail;
    std::vector<FigurePart> parts;
    if (id == "fig1") {
        for (double z : {1e3, 5e3, 20e3, 50e3}) {
            ScenarioConfig c = base(id);
            c.beam.order_x = c.beam.order_y = 4;
            c.distance = z;
            c.sweep.variable = SweepVariable::RadialProfile;
            c.sweep.radial_unit = RadialUnit::BeamWidth;
            c.sweep.direction = RadialDirection::Diagonal;
            c.sweep.grid = linear_grid(-4.0, 4.0, 61);
            parts.push_back({c, km(z)});
        }
    } else if (id == "fig2") {
        ScenarioConfig c = base(id);
        c.sweep.grid = log_grid(10.0, 1e5, 50);
        parts.push_back({c, ""});
    } else if (id == "fig3") {
        ScenarioConfig c = base(id);
        c.distance = 10e3;
        c.sweep.variable = SweepVariable::Order;
        c.sweep.grid = linear_grid(0.0, 10.0, 11);
        parts.push_back({c, ""});
    } else if (id == "fig4") {
        for (double s : {1e-3, 100e-3}) {
            ScenarioConfig c = base(id);
            c.source.sigma0_xx = s;
            c.source.sigma0_yy = s;
            c.source.sigma0_xy = 2.0 * s;
            c.sweep.grid = log_grid(10.0, 1e4, 50);
            char buf[48];
            std::snprintf(buf, sizeof buf, ", sigma0xx=%g mm", s * 1e3);
            parts.push_back({c, buf});
        }
    } else if (id == "fig5") {
        for (double z : {1e3, 5e3, 20e3}) {
            ScenarioConfig c = base(id);
            c.paths = {PathKind::SlantUp, PathKind::SlantDown};
            c.distance = z;
            c.sweep.variable = SweepVariable::Zenith;
            c.sweep.grid.clear();
            for (int i = 0; i < 180; ++i)
                c.sweep.grid.push_back(0.5 * i * std::numbers::pi / 180.0);
            parts.push_back({c, km(z)});
        }
    } else if (id != "table1") {
        throw DomainError("unknown figure id \"" + std::string(id) + "\"");
    }
    return parts;
}

struct FigureOutput {
    std::vector<SweepRow> rows;
    std::vector<Table1Row> table;
    std::vector<std::filesystem::path> files;

    std::size_t errors() const { return count_errors(rows); }
};

/// Writes <id>.csv, optional <id>.svg (and <id>_intensity.svg for fig1) and
/// the sidecar <id>.manifest.json with every resolved sweep.
inline FigureOutput reproduce_figure(std::string_view id, const std::filesystem::path& dir, bool svg = false,
                                     unsigned threads = 1, const TurbulenceProfile* profile = nullptr)
{
    if (!is_figure_id(id))
        throw DomainError("unknown figure id \"" + std::string(id) + "\"");
    FigureOutput out;
    const std::string stem(id);
    nlohmann::json manifest;
    manifest["software"] = "hgpol";
    manifest["version"] = software_version;
    manifest["figure"] = stem;

    if (id == "table1") {
        const TurbulenceProfile p = profile ? *profile : default_config().profile;
        out.table = table1_rows(p);
        out.files.push_back(dir / (stem + ".csv"));
        write_text_file(out.files.back(), table1_csv(out.table));
        manifest["turbulence"] = {{"cn2_ground_m-2/3", p.cn2_ground}, {"wind_rms_m_per_s", p.wind_rms}};
        manifest["rows"] = out.table.size();
        manifest["errors"] = 0;
    } else {
        Chart dop;
        dop.title = stem + ": degree of polarization";
        dop.y_label = "P";
        Chart inten;
        inten.title = stem + ": normalized intensity";
        inten.y_label = "I / I_max";
        nlohmann::json sweeps = nlohmann::json::array();
        for (FigurePart part : figure_parts(id)) {
            if (profile)
                part.config.profile = *profile;
            auto rows = run_sweep(part.config, threads);
            auto series = dop_series(part.config, rows, part.series_suffix);
            dop.series.insert(dop.series.end(), series.begin(), series.end());
            dop.x_label = display_label(part.config);
            dop.log_x = part.config.sweep.variable == SweepVariable::Distance;
            if (part.config.sweep.variable == SweepVariable::RadialProfile) {
                inten.x_label = dop.x_label;
                for (PathKind k : part.config.paths) {
                    ChartSeries s;
                    s.name = std::string(to_string(k)) + part.series_suffix;
                    for (const auto& r : rows)
                        if (r.path == k) {
                            s.x.push_back(r.sweep_value);
                            s.y.push_back(r.i_norm ? *r.i_norm : std::nan(""));
                        }
                    inten.series.push_back(std::move(s));
                }
            }
            nlohmann::json entry;
            entry["config_hash"] = config_hash(part.config);
            entry["config"] = to_json(part.config);
            sweeps.push_back(entry);
            out.rows.insert(out.rows.end(), rows.begin(), rows.end());
        }
        out.files.push_back(dir / (stem + ".csv"));
        write_text_file(out.files.back(), to_csv(out.rows));
        if (svg) {
            out.files.push_back(dir / (stem + ".svg"));
            write_text_file(out.files.back(), render_svg(dop));
            if (!inten.series.empty()) {
                out.files.push_back(dir / (stem + "_intensity.svg"));
                write_text_file(out.files.back(), render_svg(inten));
            }
        }
        manifest["sweeps"] = sweeps;
        manifest["rows"] = out.rows.size();
        manifest["errors"] = out.errors();
    }

    std::vector<std::string> names;
    for (const auto& f : out.files)
        names.push_back(f.filename().string());
    manifest["files"] = names;
    out.files.push_back(dir / (stem + ".manifest.json"));
    write_text_file(out.files.back(), manifest.dump(2) + "\n");
    return out;
}

// ---------------------------------------------------------------------------
// Inner-scale calibration

struct InnerScaleFit {
    double inner_scale = 0.0;
    double dop_slant_down = 0.0;
    double dop_slant_up = 0.0;
    /// max(|P_down - target_down|, |P_up - target_up|)
    double worst_deviation = 0.0;
};

/// On-axis P for the given path at the config's fixed distance and zenith.
inline double on_axis_dop(const ScenarioConfig& cfg, PathKind kind)
{
    const PathSpec path{kind, cfg.zenith, cfg.distance, cfg.profile};
    return degree_of_polarization(coherence_matrix(cfg.beam, cfg.source, path, Observation{0.0, 0.0, cfg.distance}));
}

/**
 * Golden-section search over l0 in [lo, hi] minimizing the squared distance
 * of the on-axis slant-down and slant-up P from the targets, with all other
 * parameters taken from `cfg`.
 */
inline InnerScaleFit calibrate_inner_scale(ScenarioConfig cfg, double target_down, double target_up,
                                           double lo = 1e-3, double hi = 20e-3, double tol = 1e-7)
{
    auto eval = [&](double l0) {
        cfg.profile.inner_scale = l0;
        InnerScaleFit f;
        f.inner_scale = l0;
        f.dop_slant_down = on_axis_dop(cfg, PathKind::SlantDown);
        f.dop_slant_up = on_axis_dop(cfg, PathKind::SlantUp);
        f.worst_deviation =
            std::max(std::fabs(f.dop_slant_down - target_down), std::fabs(f.dop_slant_up - target_up));
        return f;
    };
    auto cost = [&](const InnerScaleFit& f) {
        const double a = f.dop_slant_down - target_down;
        const double b = f.dop_slant_up - target_up;
        return a * a + b * b;
    };

    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    InnerScaleFit fc = eval(c), fd = eval(d);
    while (b - a > tol) {
        if (cost(fc) < cost(fd)) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = eval(d);
        }
    }
    InnerScaleFit best = cost(fc) < cost(fd) ? fc : fd;
    for (double edge : {lo, hi}) {
        InnerScaleFit fe = eval(edge);
        if (cost(fe) < cost(best))
            best = fe;
    }
    return best;
}

} // namespace hgpol
