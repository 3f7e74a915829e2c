// psqm: run phase-space quantum mechanics experiments from TOML configs.
//
// Exit codes: 0 ok, 2 config/schema error, 3 truncation guard, 4 solver
// failure, 5 an embedded check failed, 1 anything else.

#include "psqm/config.hpp"
#include "psqm/errors.hpp"
#include "psqm/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

enum Exit { kOk = 0, kOther = 1, kSchema = 2, kTruncation = 3, kSolver = 4, kThreshold = 5 };

struct Args {
    std::string config;
    std::string out;
    int jobs = 1;
    std::optional<unsigned long> seed;
    bool no_plots = false;
};

void add_common(CLI::App* sub, Args& args, bool require_config) {
    auto* c = sub->add_option("--config", args.config, "TOML experiment config");
    if (require_config) c->required();
    sub->add_option("--out", args.out, "output directory (default: out/<name>)");
    sub->add_option("--jobs", args.jobs, "worker threads for per-hbar runs")->check(CLI::Range(1, 256));
    sub->add_option("--seed", args.seed, "reserved; every computation is deterministic");
    sub->add_flag("--no-plots", args.no_plots, "skip SVG output");
}

int run_config(const Args& args, std::optional<psqm::ExperimentKind> expected, const char* bundled) {
    const auto path = args.config.empty() ? psqm::bundled_config_dir() / bundled : std::filesystem::path(args.config);
    const auto config = psqm::load_config(path);
    if (expected && config.experiment != *expected)
        throw psqm::SchemaError("config: experiment is '" + std::string(psqm::to_string(config.experiment)) +
                                "', this subcommand runs '" + std::string(psqm::to_string(*expected)) + "'");
    psqm::RunOptions opts;
    opts.out_dir = args.out.empty() ? std::filesystem::path("out") / config.name : std::filesystem::path(args.out);
    opts.jobs = args.jobs;
    opts.plots = !args.no_plots;

    const auto manifest = psqm::run(config, opts);
    for (const auto& c : manifest.checks)
        std::printf("%-4s %-32s %.6e %s %.6e  %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value,
                    c.comparison.c_str(), c.threshold, c.detail.c_str());
    std::printf("wrote %zu files to %s (%.1f s)\n", manifest.artifacts.size(), opts.out_dir.string().c_str(),
                manifest.wall_seconds);
    return manifest.all_passed() ? kOk : kThreshold;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phase-space quantum mechanics experiments"};
    app.require_subcommand(1);
    Args args;

    auto* run = app.add_subcommand("run", "run any experiment config");
    add_common(run, args, true);
    auto* osc = app.add_subcommand("oscillator-demo", "harmonic oscillator over its classical curve");
    add_common(osc, args, false);
    auto* coh = app.add_subcommand("coherent-check", "compare with closed-form coherent states");
    add_common(coh, args, false);
    auto* sweep = app.add_subcommand("theorem-sweep", "hbar scaling of moments over a curve and a fixed base point");
    add_common(sweep, args, false);
    auto* validate = app.add_subcommand("validate-config", "parse and validate a config without running it");
    validate->add_option("--config", args.config, "TOML experiment config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kSchema;
    }

    try {
        if (*validate) {
            const auto config = psqm::load_config(args.config);
            std::printf("ok: %s (%s, schema %d)\n", config.name.c_str(), std::string(psqm::to_string(config.experiment)).c_str(),
                        config.schema_version);
            return kOk;
        }
        if (*run) return run_config(args, std::nullopt, "");
        if (*osc) return run_config(args, psqm::ExperimentKind::OscillatorDemo, "oscillator_demo.toml");
        if (*coh) return run_config(args, psqm::ExperimentKind::CoherentCheck, "coherent_check.toml");
        return run_config(args, psqm::ExperimentKind::TheoremSweep, "theorem_sweep.toml");
    } catch (const psqm::SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSchema;
    } catch (const psqm::TruncationError& e) {
        std::cerr << "truncation: " << e.what() << "\n";
        return kTruncation;
    } catch (const psqm::SolverError& e) {
        std::cerr << "solver: " << e.what() << "\n";
        return kSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
}
