// sltrace: eigenvalues, omega scans, trace reports and verification for the
// two-interface Sturm-Liouville problem described by a YAML config.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sltrace/commands.hpp"

namespace {

bool write_atomically(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) return false;
        out << text;
        if (!out.flush()) return false;
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) std::filesystem::remove(tmp, ec);
    return !ec;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral solver and trace checker for a Sturm-Liouville problem with two interfaces"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    app.add_option("--config", config_path, "YAML run configuration")->required();
    app.add_option("--out", out_path, "write output here instead of stdout");

    long count = 0;
    auto* eig = app.add_subcommand("eig", "lowest eigenvalues as CSV");
    eig->add_option("--count", count, "number of eigenvalues")->required();

    double lmin = 0.0, lmax = 0.0;
    long points = 0;
    auto* scan = app.add_subcommand("scan", "omega and Pruefer angle on a grid as CSV");
    scan->add_option("--min", lmin, "lower lambda")->required();
    scan->add_option("--max", lmax, "upper lambda")->required();
    scan->add_option("--points", points, "number of grid points")->required();

    std::optional<double> assert_tol;
    auto* trace = app.add_subcommand("trace", "regularized trace report as JSON");
    trace->add_option("--assert-tol", assert_tol, "fail with exit 4 when |deviation| exceeds this");

    auto* verify = app.add_subcommand("verify", "oracle and property suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return sltrace::exit_code::config;
    }

    sltrace::RunConfig cfg;
    try {
        cfg = sltrace::load_config(config_path);
    } catch (const sltrace::Error& e) {
        std::cerr << e.what() << '\n';
        return sltrace::exit_code::config;
    }

    sltrace::CommandResult res;
    if (eig->parsed()) res = sltrace::cmd_eig(cfg, count);
    else if (scan->parsed()) res = sltrace::cmd_scan(cfg, lmin, lmax, points);
    else if (trace->parsed()) res = sltrace::cmd_trace(cfg, assert_tol);
    else if (verify->parsed()) res = sltrace::cmd_verify(cfg);

    if (!res.error.empty()) std::cerr << res.error << '\n';
    if (!res.output.empty()) {
        if (out_path.empty()) {
            std::cout << res.output << std::flush;
        } else if (!write_atomically(out_path, res.output)) {
            std::cerr << "cannot write " << out_path << '\n';
            return sltrace::exit_code::numerical;
        }
    }
    return res.exit_code;
}
