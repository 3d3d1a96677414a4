// hgpol: run polarization sweeps, regenerate figure datasets, check configs.
//
// Exit status: 0 success, 1 some rows failed numerically, 2 bad config or
// usage, 3 I/O failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hgpol/hgpol.hpp"

namespace {

enum Exit { ok = 0, numeric = 1, config = 2, io = 3 };

int report_rows(const std::vector<hgpol::SweepRow>& rows, const std::vector<std::filesystem::path>& files)
{
    for (const auto& f : files)
        std::cout << "wrote " << f.string() << '\n';
    const std::size_t bad = hgpol::count_errors(rows);
    std::cout << rows.size() << " rows, " << bad << " errors\n";
    if (bad == 0)
        return ok;
    for (const auto& r : rows)
        if (!r.ok()) {
            std::cerr << "first failing row: " << hgpol::to_string(r.path) << " z=" << r.z << ": " << r.status
                      << '\n';
            break;
        }
    return numeric;
}

int cmd_run(const std::string& path, const std::string& out, const std::string& format, unsigned threads)
{
    hgpol::ScenarioConfig cfg = hgpol::load_config(path);
    bool svg = cfg.output.svg;
    if (!format.empty())
        svg = format == "csv+svg";
    const auto dir = hgpol::resolve_output_dir(out, cfg.output.directory);
    auto res = hgpol::run_and_write(cfg, dir, svg, threads);
    return report_rows(res.rows, res.files);
}

int cmd_figure(const std::string& id, const std::string& out, bool svg, unsigned threads)
{
    const auto dir = hgpol::resolve_output_dir(out);
    auto res = hgpol::reproduce_figure(id, dir, svg, threads);
    if (id == "table1") {
        for (const auto& f : res.files)
            std::cout << "wrote " << f.string() << '\n';
        std::cout << res.table.size() << " rows, 0 errors\n";
        return ok;
    }
    return report_rows(res.rows, res.files);
}

int cmd_validate(const std::string& path)
{
    hgpol::ScenarioConfig cfg = hgpol::load_config(path);
    std::cout << path << ": ok (" << cfg.paths.size() << " paths x " << cfg.sweep.grid.size() << " "
              << hgpol::to_string(cfg.sweep.variable) << " points, hash " << hgpol::config_hash(cfg) << ")\n";
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Polarization of partially coherent Hermite-Gaussian beams in turbulence"};
    app.set_version_flag("--version", std::string("hgpol ") + hgpol::software_version);
    app.require_subcommand(1);

    std::string config_path, out_dir, format;
    unsigned threads = 1;
    auto* run = app.add_subcommand("run", "Run the sweep described by a config file");
    run->add_option("--config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, std::string("Output directory (default: $") + hgpol::output_dir_env + ")");
    run->add_option("--format", format, "csv or csv+svg")->check(CLI::IsMember({"csv", "csv+svg"}));
    run->add_option("--threads", threads, "Worker threads, 0 for all cores");

    std::string figure_id;
    bool svg = false;
    auto* fig = app.add_subcommand("figure", "Regenerate a figure or table dataset");
    fig->add_option("id", figure_id, "fig1..fig5 or table1")
        ->required()
        ->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4", "fig5", "table1"}));
    fig->add_option("--out", out_dir, std::string("Output directory (default: $") + hgpol::output_dir_env + ")");
    fig->add_flag("--svg", svg, "Also write SVG plots");
    fig->add_option("--threads", threads, "Worker threads, 0 for all cores");

    auto* val = app.add_subcommand("validate", "Parse and check a config file");
    val->add_option("--config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config;
    }

    try {
        if (*run)
            return cmd_run(config_path, out_dir, format, threads);
        if (*fig)
            return cmd_figure(figure_id, out_dir, svg, threads);
        return cmd_validate(config_path);
    } catch (const hgpol::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return config;
    } catch (const hgpol::ValidationError& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return config;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return io;
    } catch (const hgpol::NumericFailure& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return io;
    }
}
