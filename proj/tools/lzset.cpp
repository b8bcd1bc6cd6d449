// lzset: runs a JSON scenario file (state estimation, separating-input design,
// diagnosis verification or set-operation demos) and writes CSV/JSON results.
#include <cstdint>
#include <string>

#include <CLI11.hpp>

#include "lzsetkit/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "Set-based estimation and active fault diagnosis for descriptor systems"};
    std::string scenario_file;
    std::string out_dir = "out";
    std::string method;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 1;

    app.add_option("-s,--scenario", scenario_file, "Scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("-o,--out", out_dir, "Output directory (created if missing)");
    app.add_option("--method", method, "Restrict to one method: lz or cz")
        ->check(CLI::IsMember({"lz", "cz"}));
    auto* seed_opt =
        app.add_option("--seed", seed, "Override the scenario noise/sample seed");
    app.add_option("-j,--jobs", jobs, "Worker threads for sampling/reduction")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : lzsetkit::kExitBadInput;
    }
    seed_set = seed_opt->count() > 0;

    lzsetkit::RunOverrides ov;
    if (seed_set) ov.seed = seed;
    if (!method.empty()) ov.method = method;
    ov.jobs = jobs;
    return lzsetkit::run_scenario(scenario_file, out_dir, ov);
}
