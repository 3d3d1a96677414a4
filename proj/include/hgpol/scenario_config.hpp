#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "beam.hpp"
#include "errors.hpp"
#include "polarization.hpp"
#include "turbulence.hpp"

namespace hgpol {

enum class SweepVariable { Distance, Order, Sigma0, Zenith, RadialProfile };

inline constexpr std::string_view to_string(SweepVariable v)
{
    switch (v) {
    case SweepVariable::Distance: return "distance";
    case SweepVariable::Order: return "order";
    case SweepVariable::Sigma0: return "sigma0";
    case SweepVariable::Zenith: return "zenith";
    case SweepVariable::RadialProfile: return "radial_profile";
    }
    return "unknown";
}

inline std::optional<SweepVariable> parse_sweep_variable(std::string_view name)
{
    for (SweepVariable v : {SweepVariable::Distance, SweepVariable::Order, SweepVariable::Sigma0,
                            SweepVariable::Zenith, SweepVariable::RadialProfile})
        if (to_string(v) == name)
            return v;
    return std::nullopt;
}

/// Line along which a radial profile is taken.
enum class RadialDirection { X, Y, Diagonal };

inline constexpr std::string_view to_string(RadialDirection d)
{
    switch (d) {
    case RadialDirection::X: return "x";
    case RadialDirection::Y: return "y";
    case RadialDirection::Diagonal: return "diagonal";
    }
    return "unknown";
}

/// Radial grid values are metres, or multiples of the local beam width
/// 2 z sqrt(a) / k evaluated for the xx element at the observation plane.
enum class RadialUnit { Metre, BeamWidth };

/**
 * What is swept and over which values. Grid values are SI: metres for
 * distance, sigma0 (sigma0_xx; the yy and xy lengths keep their ratio to it)
 * and radial profiles, radians for zenith, and m = n for order.
 */
struct SweepSpec {
    SweepVariable variable = SweepVariable::Distance;
    std::vector<double> grid;
    RadialDirection direction = RadialDirection::Diagonal;
    RadialUnit radial_unit = RadialUnit::Metre;

    friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct OutputSpec {
    std::string directory; ///< empty: environment default
    bool svg = false;

    friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct ScenarioConfig {
    std::string label = "scenario";
    BeamParams beam{800e-9, 0.03, 2, 2};
    PolarizationSource source{};
    TurbulenceProfile profile{};
    std::vector<PathKind> paths{PathKind::FreeSpace, PathKind::Horizontal, PathKind::SlantUp,
                                PathKind::SlantDown};
    /// Values held fixed unless swept.
    double distance = 10000.0;
    double zenith = std::numbers::pi / 3;
    double rho_x = 0.0;
    double rho_y = 0.0;
    SweepSpec sweep{};
    OutputSpec output{};

    void validate() const;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// n points from start to stop inclusive, evenly or geometrically spaced.
inline std::vector<double> linear_grid(double start, double stop, std::size_t n)
{
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = n == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(n - 1);
    if (n > 1)
        g.back() = stop;
    return g;
}

inline std::vector<double> log_grid(double start, double stop, std::size_t n)
{
    if (!(start > 0.0 && stop > 0.0))
        throw DomainError("log_grid: bounds must be > 0");
    std::vector<double> g = linear_grid(std::log(start), std::log(stop), n);
    for (double& x : g)
        x = std::exp(x);
    g.front() = start;
    if (n > 1)
        g.back() = stop;
    return g;
}

namespace config_detail {

using nlohmann::json;

struct Unit {
    std::string_view suffix;
    double factor;
};

inline constexpr Unit length_units[] = {{"m", 1.0},   {"km", 1e3},  {"cm", 1e-2},
                                        {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}};
inline constexpr Unit angle_units[] = {{"rad", 1.0}, {"deg", std::numbers::pi / 180.0}};
inline constexpr Unit cn2_units[] = {{"m-2/3", 1.0}};
inline constexpr Unit speed_units[] = {{"m_per_s", 1.0}};

/// Reads keys of one JSON object and rejects any that were not consumed.
class Section {
public:
    Section(const json& obj, std::string name) : obj_(obj), name_(std::move(name))
    {
        if (!obj_.is_object())
            throw ValidationError(name_, "must be an object");
    }

    std::string field(std::string_view key) const
    {
        return name_.empty() ? std::string(key) : name_ + "." + std::string(key);
    }

    bool has(std::string_view key) const { return obj_.contains(key); }

    const json* peek(std::string_view key) const
    {
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    const json* take(std::string_view key)
    {
        auto it = obj_.find(key);
        if (it == obj_.end())
            return nullptr;
        used_.insert(std::string(key));
        return &*it;
    }

    double number(std::string_view key, std::optional<double> fallback = std::nullopt)
    {
        const json* v = take(key);
        if (!v) {
            if (fallback)
                return *fallback;
            throw ValidationError(field(key), "missing");
        }
        if (!v->is_number())
            throw ValidationError(field(key), "must be a number");
        return v->get<double>();
    }

    unsigned integer(std::string_view key, std::optional<unsigned> fallback = std::nullopt)
    {
        const json* v = take(key);
        if (!v) {
            if (fallback)
                return *fallback;
            throw ValidationError(field(key), "missing");
        }
        if (!v->is_number_integer() || v->get<std::int64_t>() < 0)
            throw ValidationError(field(key), "must be a nonnegative integer");
        return v->get<unsigned>();
    }

    std::string string(std::string_view key, std::optional<std::string> fallback = std::nullopt)
    {
        const json* v = take(key);
        if (!v) {
            if (fallback)
                return *fallback;
            throw ValidationError(field(key), "missing");
        }
        if (!v->is_string())
            throw ValidationError(field(key), "must be a string");
        return v->get<std::string>();
    }

    /// Finds `base_<unit>` among the keys. At most one spelling may be given.
    template <std::size_t N>
    std::optional<std::pair<std::string, double>> find_unit(std::string_view base, const Unit (&units)[N])
    {
        std::optional<std::pair<std::string, double>> hit;
        for (const Unit& u : units) {
            std::string key = std::string(base) + "_" + std::string(u.suffix);
            if (!obj_.contains(key))
                continue;
            if (hit)
                throw ValidationError(field(base), "given more than once (" + hit->first + ", " + key + ")");
            hit = {key, u.factor};
        }
        return hit;
    }

    template <std::size_t N>
    double quantity(std::string_view base, const Unit (&units)[N], std::optional<double> fallback = std::nullopt)
    {
        auto hit = find_unit(base, units);
        if (!hit) {
            if (fallback)
                return *fallback;
            throw ValidationError(field(base), "missing (expected a unit suffix such as " + std::string(base) +
                                                   "_" + std::string(units[0].suffix) + ")");
        }
        return number(hit->first) * hit->second;
    }

    void finish() const
    {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!used_.count(it.key()))
                throw ValidationError(field(it.key()), "unknown key");
    }

private:
    const json& obj_;
    std::string name_;
    std::set<std::string> used_;
};

inline void read_beam(Section s, ScenarioConfig& c)
{
    c.beam.wavelength = s.quantity("wavelength", length_units);
    c.beam.waist = s.quantity("waist", length_units);
    c.beam.order_x = s.integer("m", 0);
    c.beam.order_y = s.integer("n", 0);
    s.finish();
}

inline void read_source(Section s, ScenarioConfig& c)
{
    PolarizationSource& p = c.source;
    p.gamma_xx = s.number("gamma_xx");
    p.gamma_yy = s.number("gamma_yy");
    if (const json* g = s.take("gamma_xy")) {
        if (g->is_number())
            p.gamma_xy = {g->get<double>(), 0.0};
        else if (g->is_array() && g->size() == 2 && (*g)[0].is_number() && (*g)[1].is_number())
            p.gamma_xy = {(*g)[0].get<double>(), (*g)[1].get<double>()};
        else
            throw ValidationError(s.field("gamma_xy"), "must be a number or [re, im]");
    } else {
        throw ValidationError(s.field("gamma_xy"), "missing");
    }
    p.sigma0_xx = s.quantity("sigma0_xx", length_units);
    p.sigma0_yy = s.quantity("sigma0_yy", length_units);
    p.sigma0_xy = s.quantity("sigma0_xy", length_units);
    s.finish();
}

inline void read_turbulence(Section s, ScenarioConfig& c)
{
    const TurbulenceProfile d{};
    c.profile.cn2_ground = s.quantity("cn2_ground", cn2_units, d.cn2_ground);
    c.profile.wind_rms = s.quantity("wind_rms", speed_units, d.wind_rms);
    c.profile.inner_scale = s.quantity("inner_scale", length_units, d.inner_scale);
    c.profile.ground_altitude = s.quantity("ground_altitude", length_units, d.ground_altitude);
    s.finish();
}

inline void read_observation(Section s, ScenarioConfig& c)
{
    const ScenarioConfig d{};
    c.distance = s.quantity("distance", length_units, d.distance);
    c.zenith = s.quantity("zenith", angle_units, d.zenith);
    c.rho_x = s.quantity("rho_x", length_units, 0.0);
    c.rho_y = s.quantity("rho_y", length_units, 0.0);
    s.finish();
}

inline std::vector<double> read_numbers(const Section& s, std::string_view key, const json& v)
{
    if (!v.is_array())
        throw ValidationError(s.field(key), "must be an array of numbers");
    std::vector<double> out;
    for (const json& x : v) {
        if (!x.is_number())
            throw ValidationError(s.field(key), "must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

/// Grid from `values_<unit>` or from a `range` object with start/stop/points.
template <std::size_t N>
std::vector<double> read_grid(Section& s, const Unit (&units)[N])
{
    if (auto hit = s.find_unit("values", units)) {
        auto g = read_numbers(s, hit->first, *s.take(hit->first));
        for (double& x : g)
            x *= hit->second;
        return g;
    }
    const json* r = s.take("range");
    if (!r)
        throw ValidationError(s.field("values"), "missing (give values_<unit> or range)");
    Section rs(*r, s.field("range"));
    const double start = rs.quantity("start", units);
    const double stop = rs.quantity("stop", units);
    const unsigned points = rs.integer("points");
    const std::string spacing = rs.string("spacing", std::string("linear"));
    rs.finish();
    if (points == 0)
        throw ValidationError(rs.field("points"), "must be >= 1");
    if (spacing == "linear")
        return linear_grid(start, stop, points);
    if (spacing == "log") {
        if (!(start > 0.0 && stop > 0.0))
            throw ValidationError(rs.field("spacing"), "log spacing needs positive bounds");
        return log_grid(start, stop, points);
    }
    throw ValidationError(rs.field("spacing"), "must be \"linear\" or \"log\"");
}

inline void read_sweep(Section s, ScenarioConfig& c)
{
    SweepSpec& w = c.sweep;
    const std::string name = s.string("variable");
    auto v = parse_sweep_variable(name);
    if (!v)
        throw ValidationError(s.field("variable"), "unknown sweep variable \"" + name + "\"");
    w.variable = *v;
    w.direction = RadialDirection::Diagonal;
    w.radial_unit = RadialUnit::Metre;

    switch (w.variable) {
    case SweepVariable::Distance:
    case SweepVariable::Sigma0:
        w.grid = read_grid(s, length_units);
        break;
    case SweepVariable::Zenith:
        w.grid = read_grid(s, angle_units);
        break;
    case SweepVariable::Order:
        if (const json* vals = s.take("values")) {
            w.grid = read_numbers(s, "values", *vals);
        } else {
            const json* r = s.take("range");
            if (!r)
                throw ValidationError(s.field("values"), "missing (give values or range)");
            Section rs(*r, s.field("range"));
            const unsigned lo = rs.integer("start");
            const unsigned hi = rs.integer("stop");
            rs.finish();
            if (hi < lo)
                throw ValidationError(rs.field("stop"), "must be >= start");
            for (unsigned i = lo; i <= hi; ++i)
                w.grid.push_back(i);
        }
        break;
    case SweepVariable::RadialProfile: {
        static constexpr Unit radial_units[] = {{"m", 1.0},   {"km", 1e3},  {"cm", 1e-2},
                                                {"mm", 1e-3}, {"um", 1e-6}, {"beam_width", 1.0}};
        bool beam_width = s.has("values_beam_width");
        if (const json* r = s.peek("range"); r && r->is_object())
            beam_width = beam_width || r->contains("start_beam_width") || r->contains("stop_beam_width");
        w.radial_unit = beam_width ? RadialUnit::BeamWidth : RadialUnit::Metre;
        w.grid = read_grid(s, radial_units);
        const std::string dir = s.string("direction", std::string("diagonal"));
        if (dir == "x")
            w.direction = RadialDirection::X;
        else if (dir == "y")
            w.direction = RadialDirection::Y;
        else if (dir == "diagonal")
            w.direction = RadialDirection::Diagonal;
        else
            throw ValidationError(s.field("direction"), "must be \"x\", \"y\" or \"diagonal\"");
        break;
    }
    }
    s.finish();
}

inline void read_output(Section s, ScenarioConfig& c)
{
    c.output.directory = s.string("directory", std::string());
    const std::string fmt = s.string("format", std::string("csv"));
    if (fmt == "csv")
        c.output.svg = false;
    else if (fmt == "csv+svg")
        c.output.svg = true;
    else
        throw ValidationError(s.field("format"), "must be \"csv\" or \"csv+svg\"");
    s.finish();
}

/// 1-based line and column of a byte offset.
inline std::pair<std::size_t, std::size_t> locate(std::string_view text, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace config_detail

inline void ScenarioConfig::validate() const
{
    auto wrap = [](const char* field, auto&& check) {
        try {
            check();
        } catch (const ValidationError&) {
            throw;
        } catch (const Error& e) {
            throw ValidationError(field, e.what());
        }
    };
    if (label.empty())
        throw ValidationError("label", "must not be empty");
    wrap("beam", [&] { beam.validate(); });
    if (std::norm(source.gamma_xy) > source.gamma_xx * source.gamma_yy * (1.0 + 1e-12))
        throw ValidationError("source.gamma_xy",
                              "realizability requires |gamma_xy|^2 <= gamma_xx * gamma_yy");
    wrap("source", [&] { source.validate(); });
    wrap("turbulence", [&] { profile.validate(); });

    if (paths.empty())
        throw ValidationError("paths", "at least one path kind is required");
    for (std::size_t i = 0; i < paths.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (paths[i] == paths[j])
                throw ValidationError("paths", "duplicate path kind " + std::string(to_string(paths[i])));

    if (!(distance > 0.0))
        throw ValidationError("observation.distance", "must be > 0");
    if (!(zenith >= 0.0 && zenith < std::numbers::pi / 2))
        throw ValidationError("observation.zenith", "must lie in [0, pi/2)");
    if (!std::isfinite(rho_x) || !std::isfinite(rho_y))
        throw ValidationError("observation.rho", "must be finite");

    const auto& g = sweep.grid;
    if (g.empty())
        throw ValidationError("sweep.values", "grid must not be empty");
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!std::isfinite(g[i]))
            throw ValidationError("sweep.values", "grid values must be finite");
        if (i > 0 && !(g[i] > g[i - 1]))
            throw ValidationError("sweep.values", "grid must be strictly increasing");
    }
    switch (sweep.variable) {
    case SweepVariable::Distance:
        if (!(g.front() > 0.0))
            throw ValidationError("sweep.values", "distances must be > 0");
        break;
    case SweepVariable::Sigma0:
        if (!(g.front() > 0.0))
            throw ValidationError("sweep.values", "coherence lengths must be > 0");
        break;
    case SweepVariable::Zenith:
        if (!(g.front() >= 0.0 && g.back() < std::numbers::pi / 2))
            throw ValidationError("sweep.values", "zenith angles must lie in [0, pi/2)");
        break;
    case SweepVariable::Order:
        for (double x : g)
            if (!(x >= 0.0 && x <= max_beam_order && x == std::floor(x)))
                throw ValidationError("sweep.values", "orders must be integers in [0, " +
                                                          std::to_string(max_beam_order) + "]");
        break;
    case SweepVariable::RadialProfile:
        break;
    }
}

/// Parses configuration text. `origin` names the source in messages.
inline ScenarioConfig parse_config(std::string_view text, const std::string& origin = "<config>")
{
    using namespace config_detail;
    json doc;
    try {
        doc = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/false);
    } catch (const json::parse_error& e) {
        const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
        auto [line, col] = locate(text, byte);
        std::string msg = e.what();
        if (auto p = msg.find("parse error"); p != std::string::npos)
            msg = msg.substr(p);
        throw ParseError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg, line,
                         col);
    }

    ScenarioConfig c;
    Section root(doc, "");
    c.label = root.string("label", std::string("scenario"));
    if (const json* b = root.take("beam"))
        read_beam(Section(*b, "beam"), c);
    else
        throw ValidationError("beam", "missing");
    if (const json* s = root.take("source"))
        read_source(Section(*s, "source"), c);
    else
        throw ValidationError("source", "missing");
    if (const json* t = root.take("turbulence"))
        read_turbulence(Section(*t, "turbulence"), c);
    if (const json* p = root.take("paths")) {
        if (!p->is_array())
            throw ValidationError("paths", "must be an array of path kinds");
        c.paths.clear();
        for (const json& e : *p) {
            auto kind = e.is_string() ? parse_path_kind(e.get<std::string>()) : std::nullopt;
            if (!kind)
                throw ValidationError("paths", "unknown path kind " + e.dump() +
                                                   " (expected free_space, horizontal, slant_up, slant_down)");
            c.paths.push_back(*kind);
        }
    }
    if (const json* o = root.take("observation"))
        read_observation(Section(*o, "observation"), c);
    if (const json* s = root.take("sweep"))
        read_sweep(Section(*s, "sweep"), c);
    else
        throw ValidationError("sweep", "missing");
    if (const json* o = root.take("output"))
        read_output(Section(*o, "output"), c);
    root.finish();

    c.validate();
    return c;
}

inline ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError(path + ": cannot open file", 0, 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

/// Canonical JSON form in SI keys. Parsing it yields an equal config.
inline nlohmann::json to_json(const ScenarioConfig& c)
{
    using nlohmann::json;
    json j;
    j["label"] = c.label;
    j["beam"] = {{"wavelength_m", c.beam.wavelength},
                 {"waist_m", c.beam.waist},
                 {"m", c.beam.order_x},
                 {"n", c.beam.order_y}};
    j["source"] = {{"gamma_xx", c.source.gamma_xx},
                   {"gamma_yy", c.source.gamma_yy},
                   {"gamma_xy", {c.source.gamma_xy.real(), c.source.gamma_xy.imag()}},
                   {"sigma0_xx_m", c.source.sigma0_xx},
                   {"sigma0_yy_m", c.source.sigma0_yy},
                   {"sigma0_xy_m", c.source.sigma0_xy}};
    j["turbulence"] = {{"cn2_ground_m-2/3", c.profile.cn2_ground},
                       {"wind_rms_m_per_s", c.profile.wind_rms},
                       {"inner_scale_m", c.profile.inner_scale},
                       {"ground_altitude_m", c.profile.ground_altitude}};
    json paths = json::array();
    for (PathKind k : c.paths)
        paths.push_back(std::string(to_string(k)));
    j["paths"] = paths;
    j["observation"] = {{"distance_m", c.distance},
                        {"zenith_rad", c.zenith},
                        {"rho_x_m", c.rho_x},
                        {"rho_y_m", c.rho_y}};

    json sweep;
    sweep["variable"] = std::string(to_string(c.sweep.variable));
    std::string key = "values_m";
    switch (c.sweep.variable) {
    case SweepVariable::Order: key = "values"; break;
    case SweepVariable::Zenith: key = "values_rad"; break;
    case SweepVariable::RadialProfile:
        if (c.sweep.radial_unit == RadialUnit::BeamWidth)
            key = "values_beam_width";
        sweep["direction"] = std::string(to_string(c.sweep.direction));
        break;
    default: break;
    }
    if (c.sweep.variable == SweepVariable::Order) {
        json orders = json::array();
        for (double x : c.sweep.grid)
            orders.push_back(static_cast<unsigned>(x));
        sweep[key] = orders;
    } else {
        sweep[key] = c.sweep.grid;
    }
    j["sweep"] = sweep;
    j["output"] = {{"directory", c.output.directory}, {"format", c.output.svg ? "csv+svg" : "csv"}};
    return j;
}

inline std::string serialize(const ScenarioConfig& c) { return to_json(c).dump(2) + "\n"; }

/// FNV-1a over the canonical JSON of everything that affects results (the
/// output section is excluded), as 16 hex digits.
inline std::string config_hash(const ScenarioConfig& c)
{
    nlohmann::json j = to_json(c);
    j.erase("output");
    const std::string text = j.dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// The reference parameter set: 800 nm, 3 cm waist, m = n = 2, sigma0 of
/// 1/1/2 cm, gamma 0.5/0.5/0.1, C_n^2(0) = 1e-14, v = 2.1 m/s, l0 = 10 mm,
/// swept over 50 log-spaced distances from 10 m to 100 km on all four paths.
inline ScenarioConfig default_config()
{
    ScenarioConfig c;
    c.label = "default";
    c.beam = BeamParams{800e-9, 0.03, 2, 2};
    c.source = PolarizationSource{0.5, 0.5, {0.1, 0.0}, 0.01, 0.01, 0.02};
    c.profile = TurbulenceProfile{1e-14, 2.1, 0.01, 0.0};
    c.distance = 10000.0;
    c.zenith = std::numbers::pi / 3;
    c.sweep.variable = SweepVariable::Distance;
    c.sweep.grid = log_grid(10.0, 1e5, 50);
    return c;
}

} // namespace hgpol
