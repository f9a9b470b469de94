#include "evostab/builtins.hpp"
#include "evostab/errors.hpp"
#include "evostab/harness.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot read {}", path));
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evolution operators, stability certificates and parallel transport"};
    app.set_version_flag("--version", std::string(evostab::kVersion));

    std::string kind;
    std::string config;
    std::string builtin;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;

    std::string kinds;
    for (const auto& k : evostab::scenario_kinds()) kinds += (kinds.empty() ? "" : ", ") + k;
    std::string names;
    for (const auto& n : evostab::builtins::scenario_names()) names += (names.empty() ? "" : ", ") + n;

    app.add_option("kind", kind, "Scenario kind: " + kinds)->required();
    auto* cfg = app.add_option("--config", config, "Scenario JSON file")->check(CLI::ExistingFile);
    app.add_option("--builtin", builtin, "Built-in scenario: " + names)->excludes(cfg);
    app.add_option("--out", out, "Output directory for summary.json and rows.csv")->required();
    app.add_option("--seed", seed, "Seed for randomized sampling");
    app.add_option("--tol", tol, "Solver tolerance");

    CLI11_PARSE(app, argc, argv);

    if (config.empty() && builtin.empty()) {
        std::cerr << "one of --config or --builtin is required\n";
        return 2;
    }

    evostab::Report report;
    try {
        const std::string text =
            builtin.empty() ? read_file(config) : evostab::builtins::scenario(builtin);
        report = evostab::run_scenario_text(text, {kind, seed, tol});
    } catch (const evostab::ValidationError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }

    try {
        evostab::emit_report(report, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }

    const auto failing = std::count(report.row_passed.begin(), report.row_passed.end(), false);
    std::cout << fmt::format("{}: {} rows, {} failing, {:.2f} s -> {}\n", report.kind,
                             report.rows.size(), failing, report.runtime_seconds,
                             report.passed ? "PASS" : "FAIL");
    if (report.error) std::cout << "error: " << *report.error << '\n';
    return evostab::exit_code(report);
}
