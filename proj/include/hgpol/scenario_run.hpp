#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "beam.hpp"
#include "polarization.hpp"
#include "scenario_config.hpp"
#include "turbulence.hpp"

#ifndef HGPOL_VERSION
#define HGPOL_VERSION "0.0.0"
#endif

namespace hgpol {

inline constexpr const char* software_version = HGPOL_VERSION;
inline constexpr const char* output_dir_env = "HGPOL_OUTPUT_DIR";

struct SweepRow {
    std::string figure;
    PathKind path = PathKind::FreeSpace;
    double sweep_value = 0.0; ///< grid value as configured (SI)
    double z = 0.0;
    double zenith = 0.0;
    unsigned m = 0;
    unsigned n = 0;
    double sigma0_xx = 0.0;
    double rho_x = 0.0;
    double rho_y = 0.0;
    double dop = std::numeric_limits<double>::quiet_NaN();
    double trace = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> i_norm;
    double inv_rho2 = std::numeric_limits<double>::quiet_NaN();
    std::string status = "ok";
    std::string config_hash;

    bool ok() const { return status == "ok"; }
};

/// Evaluates one grid point on one path. Failures are recorded in `status`.
inline SweepRow evaluate_sweep_point(const ScenarioConfig& cfg, PathKind kind, double value,
                                     const std::string& hash)
{
    SweepRow r;
    r.figure = cfg.label;
    r.path = kind;
    r.sweep_value = value;
    r.config_hash = hash;

    BeamParams beam = cfg.beam;
    PolarizationSource src = cfg.source;
    double z = cfg.distance;
    double zenith = cfg.zenith;
    double rx = cfg.rho_x;
    double ry = cfg.rho_y;

    switch (cfg.sweep.variable) {
    case SweepVariable::Distance: z = value; break;
    case SweepVariable::Order:
        beam.order_x = beam.order_y = static_cast<unsigned>(value);
        break;
    case SweepVariable::Sigma0: {
        const double scale = value / src.sigma0_xx;
        src.sigma0_xx = value;
        src.sigma0_yy *= scale;
        src.sigma0_xy *= scale;
        break;
    }
    case SweepVariable::Zenith: zenith = value; break;
    case SweepVariable::RadialProfile: break;
    }

    r.z = z;
    r.zenith = zenith;
    r.m = beam.order_x;
    r.n = beam.order_y;
    r.sigma0_xx = src.sigma0_xx;
    r.rho_x = rx;
    r.rho_y = ry;

    try {
        const PathSpec path{kind, zenith, z, cfg.profile};
        r.inv_rho2 = effective_inverse_rho2(path, beam.wavenumber());
        if (cfg.sweep.variable == SweepVariable::RadialProfile) {
            double radius = value;
            if (cfg.sweep.radial_unit == RadialUnit::BeamWidth) {
                const auto c = propagation_constants(beam, src.sigma0_xx, r.inv_rho2, Observation{0, 0, z});
                radius *= 2.0 * z * std::sqrt(c.a) / beam.wavenumber();
            }
            switch (cfg.sweep.direction) {
            case RadialDirection::X: rx = radius; ry = 0.0; break;
            case RadialDirection::Y: rx = 0.0; ry = radius; break;
            case RadialDirection::Diagonal:
                rx = ry = radius / std::numbers::sqrt2;
                break;
            }
            r.rho_x = rx;
            r.rho_y = ry;
        }
        const CoherenceMatrix2 w = coherence_matrix(beam, src, r.inv_rho2, Observation{rx, ry, z});
        r.trace = w.trace();
        r.dop = degree_of_polarization(w);
        if (!std::isfinite(r.dop) || !std::isfinite(r.trace))
            throw NumericFailure("non-finite result", std::numeric_limits<double>::infinity());
    } catch (const std::exception& e) {
        r.status = std::string("error: ") + e.what();
        r.dop = std::numeric_limits<double>::quiet_NaN();
        r.trace = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

/**
 * One row per (path kind, grid point), path-major in declared order. Points
 * are independent; with threads > 1 they are evaluated concurrently and
 * written to fixed slots, so the result does not depend on scheduling.
 * threads = 0 uses the hardware concurrency.
 */
inline std::vector<SweepRow> run_sweep(const ScenarioConfig& cfg, unsigned threads = 1)
{
    cfg.validate();
    const std::string hash = config_hash(cfg);
    const std::size_t npts = cfg.sweep.grid.size();
    const std::size_t total = cfg.paths.size() * npts;
    std::vector<SweepRow> rows(total);

    auto work = [&](std::size_t i) {
        rows[i] = evaluate_sweep_point(cfg, cfg.paths[i / npts], cfg.sweep.grid[i % npts], hash);
    };

    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < total; ++i)
            work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < total; i = next++)
                    work(i);
            });
    }

    if (cfg.sweep.variable == SweepVariable::RadialProfile) {
        for (std::size_t p = 0; p < cfg.paths.size(); ++p) {
            double peak = 0.0;
            for (std::size_t i = 0; i < npts; ++i)
                if (rows[p * npts + i].ok())
                    peak = std::max(peak, rows[p * npts + i].trace);
            for (std::size_t i = 0; i < npts; ++i) {
                SweepRow& r = rows[p * npts + i];
                if (r.ok() && peak > 0.0)
                    r.i_norm = r.trace / peak;
            }
        }
    }
    return rows;
}

inline std::size_t count_errors(const std::vector<SweepRow>& rows)
{
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return !r.ok(); }));
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* csv_header =
    "figure,path_kind,z_m,zenith_rad,m,n,sigma0xx_m,rho_x_m,rho_y_m,P,I_norm,inv_rho2_m2,status,config_hash";

inline std::string format_number(double x)
{
    if (!std::isfinite(x))
        return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

inline std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += (c == '\n' || c == '\r') ? ' ' : c;
    }
    return out + "\"";
}

inline void write_csv(std::ostream& os, const std::vector<SweepRow>& rows)
{
    os << csv_header << '\n';
    for (const SweepRow& r : rows) {
        os << csv_escape(r.figure) << ',' << to_string(r.path) << ',' << format_number(r.z) << ','
           << format_number(r.zenith) << ',' << r.m << ',' << r.n << ',' << format_number(r.sigma0_xx) << ','
           << format_number(r.rho_x) << ',' << format_number(r.rho_y) << ',' << format_number(r.dop) << ','
           << (r.i_norm ? format_number(*r.i_norm) : std::string()) << ',' << format_number(r.inv_rho2) << ','
           << csv_escape(r.status) << ',' << r.config_hash << '\n';
    }
}

inline std::string to_csv(const std::vector<SweepRow>& rows)
{
    std::ostringstream os;
    write_csv(os, rows);
    return os.str();
}

// ---------------------------------------------------------------------------
// SVG line charts

struct ChartSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    std::vector<ChartSeries> series;
};

namespace svg_detail {

inline std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

inline std::string tick_label(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", std::fabs(x) < 1e-12 ? 0.0 : x);
    return buf;
}

inline std::vector<double> linear_ticks(double lo, double hi)
{
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double f : {1.0, 2.0, 5.0, 10.0})
        if (f * mag >= raw) {
            step = f * mag;
            break;
        }
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step)
        t.push_back(v);
    return t;
}

inline constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

} // namespace svg_detail

inline std::string render_svg(const Chart& chart)
{
    using namespace svg_detail;
    constexpr double width = 760, height = 480;
    constexpr double left = 70, right = 200, top = 40, bottom = 60;
    const double pw = width - left - right, ph = height - top - bottom;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : chart.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (chart.log_x && !(s.x[i] > 0)))
                continue;
            const double xv = chart.log_x ? std::log10(s.x[i]) : s.x[i];
            xmin = std::min(xmin, xv);
            xmax = std::max(xmax, xv);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (!std::isfinite(xmin)) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax == xmin)
        xmax = xmin + 1;
    ymin = std::min(ymin, 0.0);
    if (ymax <= ymin)
        ymax = ymin + 1;
    ymax += 0.05 * (ymax - ymin);

    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return top + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(chart.title) << "</text>\n";
    o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

    std::vector<double> xt;
    if (chart.log_x) {
        for (double d = std::ceil(xmin - 1e-9); d <= xmax + 1e-9; d += 1.0)
            xt.push_back(d);
    } else {
        xt = linear_ticks(xmin, xmax);
    }
    for (double t : xt) {
        o << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(px(t)) << "\" y2=\""
          << num(top + ph + 5) << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << num(px(t)) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">"
          << (chart.log_x ? tick_label(std::pow(10.0, t)) : tick_label(t)) << "</text>\n";
    }
    for (double t : linear_ticks(ymin, ymax)) {
        o << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(left) << "\" y2=\""
          << num(py(t)) << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << num(left - 8) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">"
          << tick_label(t) << "</text>\n";
    }
    o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 15) << "\" text-anchor=\"middle\">"
      << escape(chart.x_label) << "</text>\n";
    o << "<text transform=\"translate(18," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(chart.y_label) << "</text>\n";

    for (std::size_t s = 0; s < chart.series.size(); ++s) {
        const auto& ser = chart.series[s];
        const char* color = palette[s % std::size(palette)];
        const std::string dash = (s / std::size(palette)) % 2 == 1 ? " stroke-dasharray=\"6,3\"" : "";
        std::string pts;
        auto flush = [&] {
            if (!pts.empty())
                o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"" << dash << " points=\"" << pts
                  << "\"/>\n";
            pts.clear();
        };
        for (std::size_t i = 0; i < ser.x.size(); ++i) {
            if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i]) || (chart.log_x && !(ser.x[i] > 0))) {
                flush();
                continue;
            }
            const double xv = chart.log_x ? std::log10(ser.x[i]) : ser.x[i];
            pts += num(px(xv)) + "," + num(py(ser.y[i])) + " ";
        }
        flush();
        const double ly = top + 10 + 18.0 * static_cast<double>(s);
        o << "<line x1=\"" << num(left + pw + 12) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(left + pw + 36)
          << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << dash << "/>\n";
        o << "<text x=\"" << num(left + pw + 42) << "\" y=\"" << num(ly + 4) << "\">" << escape(ser.name)
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

/// Axis value and label for a sweep variable, in display units.
inline double display_value(const ScenarioConfig& cfg, const SweepRow& r)
{
    switch (cfg.sweep.variable) {
    case SweepVariable::Distance: return r.z / 1000.0;
    case SweepVariable::Order: return r.m;
    case SweepVariable::Sigma0: return r.sigma0_xx * 1000.0;
    case SweepVariable::Zenith: return r.zenith * 180.0 / std::numbers::pi;
    case SweepVariable::RadialProfile: return r.sweep_value;
    }
    return r.sweep_value;
}

inline std::string display_label(const ScenarioConfig& cfg)
{
    switch (cfg.sweep.variable) {
    case SweepVariable::Distance: return "z (km)";
    case SweepVariable::Order: return "m = n";
    case SweepVariable::Sigma0: return "sigma0_xx (mm)";
    case SweepVariable::Zenith: return "zenith angle (deg)";
    case SweepVariable::RadialProfile:
        return cfg.sweep.radial_unit == RadialUnit::BeamWidth ? "radial position (beam widths)"
                                                               : "radial position (m)";
    }
    return "";
}

/// P against the swept variable, one series per path. `suffix` is appended
/// to the series names.
inline std::vector<ChartSeries> dop_series(const ScenarioConfig& cfg, const std::vector<SweepRow>& rows,
                                           const std::string& suffix = "")
{
    std::vector<ChartSeries> out;
    for (PathKind k : cfg.paths) {
        ChartSeries s;
        s.name = std::string(to_string(k)) + suffix;
        for (const SweepRow& r : rows) {
            if (r.path != k)
                continue;
            s.x.push_back(display_value(cfg, r));
            s.y.push_back(r.ok() ? r.dop : std::numeric_limits<double>::quiet_NaN());
        }
        out.push_back(std::move(s));
    }
    return out;
}

inline Chart dop_chart(const ScenarioConfig& cfg, const std::vector<SweepRow>& rows)
{
    Chart c;
    c.title = cfg.label + ": degree of polarization";
    c.x_label = display_label(cfg);
    c.y_label = "P";
    c.log_x = cfg.sweep.variable == SweepVariable::Distance && cfg.sweep.grid.front() > 0.0 &&
              cfg.sweep.grid.back() / cfg.sweep.grid.front() > 100.0;
    c.series = dop_series(cfg, rows);
    return c;
}

// ---------------------------------------------------------------------------
// Files

/// Output directory: explicit value, else the config's, else $HGPOL_OUTPUT_DIR, else "hgpol_out".
inline std::filesystem::path resolve_output_dir(const std::string& explicit_dir, const std::string& config_dir = "")
{
    if (!explicit_dir.empty())
        return explicit_dir;
    if (!config_dir.empty())
        return config_dir;
    if (const char* env = std::getenv(output_dir_env); env && *env)
        return env;
    return "hgpol_out";
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    out << text;
    if (!out)
        throw Error("write failed for " + path.string());
}

inline std::string file_stem(const std::string& label)
{
    std::string s;
    for (char c : label)
        s += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
    return s.empty() ? "scenario" : s;
}

inline nlohmann::json manifest_json(const std::string& label, const std::vector<SweepRow>& rows,
                                    const std::vector<std::string>& files)
{
    nlohmann::json m;
    m["software"] = "hgpol";
    m["version"] = software_version;
    m["label"] = label;
    m["rows"] = rows.size();
    m["errors"] = count_errors(rows);
    m["files"] = files;
    return m;
}

struct RunOutput {
    std::vector<SweepRow> rows;
    std::vector<std::filesystem::path> files;
};

/// Runs the sweep and writes <label>.csv, optionally <label>.svg, and
/// <label>.manifest.json into `dir`.
inline RunOutput run_and_write(const ScenarioConfig& cfg, const std::filesystem::path& dir, bool svg,
                               unsigned threads = 1)
{
    RunOutput out;
    out.rows = run_sweep(cfg, threads);
    const std::string stem = file_stem(cfg.label);
    out.files.push_back(dir / (stem + ".csv"));
    write_text_file(out.files.back(), to_csv(out.rows));
    if (svg) {
        out.files.push_back(dir / (stem + ".svg"));
        write_text_file(out.files.back(), render_svg(dop_chart(cfg, out.rows)));
    }
    std::vector<std::string> names;
    for (const auto& f : out.files)
        names.push_back(f.filename().string());
    nlohmann::json m = manifest_json(cfg.label, out.rows, names);
    m["config_hash"] = config_hash(cfg);
    m["config"] = to_json(cfg);
    out.files.push_back(dir / (stem + ".manifest.json"));
    write_text_file(out.files.back(), m.dump(2) + "\n");
    return out;
}

} // namespace hgpol
