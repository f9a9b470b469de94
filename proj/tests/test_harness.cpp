#include "evostab/builtins.hpp"
#include "evostab/errors.hpp"
#include "evostab/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace evostab;
using nlohmann::json;

namespace {

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("every builtin scenario runs and passes") {
    for (const auto& name : builtins::scenario_names()) {
        CAPTURE(name);
        const auto r = run_scenario_text(builtins::scenario(name));
        CHECK(!r.error);
        CHECK(r.passed);
        CHECK(exit_code(r) == 0);
        CHECK(!r.rows.empty());
    }
}

TEST_CASE("csv headers follow the kind") {
    const auto r = run_scenario_text(builtins::scenario("intro-cos"));
    CHECK(first_line(csv_text(r)) == "s,t,norm_X,norm_Xinv,C,ratio");
    CHECK(r.rows.size() == 200);
    for (const auto& kind : scenario_kinds()) CHECK(!csv_columns(kind).empty());
}

TEST_CASE("validation lists every offending field") {
    const json bad = {{"kind", "verify"},
                      {"seed", -3},
                      {"parameters", {{"system", {{"builtin", "nope"}}}, {"window", {5, 1}}}}};
    try {
        run_scenario(bad);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.fields().size() >= 3);
    }
    CHECK_THROWS_AS(run_scenario_text("{not json"), ValidationError);
    CHECK_THROWS_AS(run_scenario(json{{"kind", "teleport"}}), ValidationError);
}

TEST_CASE("seed override changes sampled pairs") {
    const auto text = builtins::scenario("intro-cos");
    const auto a = run_scenario_text(text);
    RunOverrides o;
    o.seed = 2;
    const auto b = run_scenario_text(text, o);
    CHECK(csv_text(a) != csv_text(b));
    CHECK(csv_text(a) == csv_text(run_scenario_text(text)));
}

TEST_CASE("evolve scenario with a closed form") {
    const json cfg = {
        {"kind", "evolve"},
        {"seed", 4},
        {"parameters",
         {{"coefficient", {{"system", {{"G", {{"1"}}}, {"J", {-1, 1}}, {"f", "sin(t)"}}}}},
          {"closed_form", {{"exp(sin(t) - sin(s))"}}},
          {"pairs", 20},
          {"window", {0, 10}}}}};
    const auto r = run_scenario(cfg);
    CHECK(!r.error);
    CHECK(r.passed);
    CHECK(r.rows.size() == 20);
}

TEST_CASE("f leaving J is reported before computation") {
    const json cfg = {{"kind", "certify"},
                      {"seed", 1},
                      {"parameters",
                       {{"system", {{"G", {{"1"}}}, {"J", {-1, 1}}, {"f", "2*sin(t)"}}},
                        {"window", {0, 10}}}}};
    CHECK_THROWS_AS(run_scenario(cfg), ValidationError);
}

TEST_CASE("emit writes both files") {
    const auto dir = std::filesystem::temp_directory_path() / "evostab_emit_test";
    std::filesystem::remove_all(dir);
    const auto r = run_scenario_text(builtins::scenario("sine-curve"));
    emit_report(r, dir);
    CHECK(slurp(dir / "rows.csv") == csv_text(r));
    const auto summary = json::parse(slurp(dir / "summary.json"));
    CHECK(summary.at("pass").get<bool>());
    CHECK(summary.at("provenance").at("version") == std::string(kVersion));
    std::filesystem::remove_all(dir);
}

}
