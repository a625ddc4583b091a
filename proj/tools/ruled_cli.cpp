// Command-line front end: ruled {analyze|classify|reconstruct|verify}.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ruled/commands.hpp"

namespace {

std::pair<std::size_t, std::size_t> parse_grid(const std::string& text)
{
    const auto x = text.find('x');
    std::size_t nu = 0, nv = 0;
    if (x == std::string::npos || std::sscanf(text.c_str(), "%zux%zu", &nu, &nv) != 2 || nu < 2 || nv < 2) {
        throw ruled::SpecError("--grid", "expected NUxNV with both counts at least 2, got '" + text + "'");
    }
    return {nu, nv};
}

void print_summary(const ruled::cli::CommandResult& result)
{
    const auto& r = result.report;
    if (r.contains("classification")) {
        std::cout << "class: " << r["classification"]["label"].get<std::string>() << '\n';
    }
    if (r.contains("results")) {
        for (const auto& entry : r["results"]) {
            for (const auto& c : entry["checks"]) {
                std::cout << (c["passed"].get<bool>() ? "PASS " : "FAIL ") << entry["surface"].get<std::string>()
                          << ' ' << c["name"].get<std::string>() << '\n';
            }
        }
    }
    for (const auto& f : result.files) {
        std::cout << "wrote " << f << '\n';
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Curvature analysis and classification of skew ruled surfaces"};
    app.require_subcommand(1);

    std::string spec_path;
    std::string out_dir = ".";
    std::optional<double> tol;
    std::string grid;
    bool all_builtins = false;

    auto add_common = [&](CLI::App* sub, bool spec_required) {
        auto* spec = sub->add_option("--spec", spec_path, "Surface description (JSON)");
        if (spec_required) {
            spec->required();
        }
        sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
        sub->add_option("--tol", tol, "Override the fit and predicate tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--grid", grid, "Sample grid as NUxNV");
    };
    auto* analyze = app.add_subcommand("analyze", "Write the curvature grid as CSV");
    auto* classify = app.add_subcommand("classify", "Classify the surface from its normal-curvature shapes");
    auto* reconstruct = app.add_subcommand("reconstruct", "Integrate the surface and write an OBJ mesh");
    auto* verify = app.add_subcommand("verify", "Run the identity and classification checks");
    add_common(analyze, true);
    add_common(classify, true);
    add_common(reconstruct, true);
    add_common(verify, false);
    verify->add_flag("--all-builtins", all_builtins, "Check every built-in surface class");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ruled::cli::exit_spec_error;
    }

    using namespace ruled::cli;
    try {
        CommandOptions opts;
        opts.out_dir = out_dir;
        opts.tol = tol;
        if (!grid.empty()) {
            opts.grid = parse_grid(grid);
        }
        CommandResult result;
        if (verify->parsed() && all_builtins) {
            result = cmd_verify_builtins(opts);
        } else {
            if (spec_path.empty()) {
                throw ruled::SpecError("--spec", "a surface description file is required");
            }
            const auto spec = ruled::io::load_spec(spec_path);
            if (analyze->parsed()) result = cmd_analyze(spec, opts);
            else if (classify->parsed()) result = cmd_classify(spec, opts);
            else if (reconstruct->parsed()) result = cmd_reconstruct(spec, opts);
            else result = cmd_verify(spec, opts);
        }
        print_summary(result);
        return result.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}
