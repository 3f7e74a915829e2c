#include "psqm/config.hpp"
#include "psqm/errors.hpp"
#include "psqm/experiments.hpp"
#include "psqm/output.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace psqm;
namespace fs = std::filesystem;

namespace {

const std::string kSmall = R"(
schema_version = 1
name = "small"
experiment = "evolution"

[basis]
modes = 1
cutoff = 24
hbar = 0.5

[hamiltonian]
terms = [{ exponents = [2, 0], coefficient = 0.5 }, { exponents = [0, 2], coefficient = 0.5 }]

[[observables]]
name = "q"
terms = [{ exponents = [1, 0], coefficient = 1.0 }]

[curve]
kind = "hamiltonian"
start = [0.5, 0.0]

[initial_state]
fock = [0]

[time]
t1 = 0.5
dt = 0.01

[output]
record_every = 5
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("psqm_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunManifest run_in(const std::string& toml, const fs::path& dir, int jobs = 1) {
    RunOptions opts;
    opts.out_dir = dir;
    opts.jobs = jobs;
    opts.plots = false;
    return run(parse_config(toml), opts);
}

int cli(const std::string& args) {
    const std::string cmd = std::string(PSQM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

fs::path write_config(const fs::path& dir, const std::string& toml) {
    const auto p = dir / "config.toml";
    std::ofstream(p) << toml;
    return p;
}

}  // namespace

TEST_CASE("evolution output is deterministic") {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    const auto ma = run_in(kSmall, a);
    run_in(kSmall, b);
    const auto csv = slurp(a / "series.csv");
    CHECK(csv == slurp(b / "series.csv"));
    CHECK(csv.rfind("t,hbar,quantity,real,imag\n", 0) == 0);
    CHECK(csv.find(",observable:q,") != std::string::npos);
    CHECK(ma.all_passed());
    CHECK(ma.config_hash == content_hash(parse_config(kSmall).source_text));

    const auto summary = nlohmann::json::parse(slurp(a / "summary.json"));
    CHECK(summary["runs"][0].contains("tail_mass_max"));
    const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(manifest["versions"]["psqm"] == kVersion);
    CHECK(manifest["experiment"] == "evolution");
}

TEST_CASE("empty observable list is valid") {
    auto toml = kSmall;
    const auto start = toml.find("[[observables]]");
    toml.erase(start, toml.find("[curve]") - start);
    const auto cfg = parse_config(toml);
    CHECK(cfg.observables.empty());
    const auto series = run_evolution(cfg, 0.5, 5);
    CHECK(series.observables.front().empty());
    CHECK(series.moments.size() == series.times.size());
    CHECK(series.times.size() == 11);
}

TEST_CASE("parallel hbar runs reproduce the serial output") {
    const auto toml = replace(kSmall, "hbar = 0.5", "hbar_grid = [0.3, 0.1, 0.03, 0.01, 0.003]");
    const auto a = scratch("jobs1");
    const auto b = scratch("jobs3");
    run_in(toml, a, 1);
    run_in(toml, b, 3);
    CHECK(slurp(a / "series.csv") == slurp(b / "series.csv"));
}

TEST_CASE("Richardson ratio of the second-order stepper") {
    const auto cfg = parse_config(replace(kSmall, "dt = 0.01", "dt = 0.02"));
    CHECK(std::abs(richardson_ratio(cfg, 0.5) - 4.0) < 0.1);
}

TEST_CASE("oscillator demo on a small basis") {
    auto toml = replace(kSmall, "experiment = \"evolution\"", "experiment = \"oscillator-demo\"");
    toml += "\n[checks]\nreduction_tolerance = 1e-10\ncenter_of_mass_tolerance = 1e-3\nrichardson = true\n";
    const auto dir = scratch("demo");
    const auto m = run_in(toml, dir);
    CHECK(m.all_passed());
    CHECK(fs::exists(dir / "series.csv"));
    CHECK(m.checks.size() == 3);
}

TEST_CASE("CLI exit codes") {
    const auto dir = scratch("cli");
    const auto good = write_config(dir, kSmall);
    const auto out = (dir / "out").string();
    CHECK(cli("validate-config --config " + good.string()) == 0);
    CHECK(cli("run --config " + good.string() + " --out " + out) == 0);
    CHECK(fs::exists(dir / "out" / "manifest.json"));

    CHECK(cli("run --config " + write_config(dir, kSmall + "\nbogus = 1\n").string() + " --out " + out) == 2);
    CHECK(cli("validate-config --config " + (dir / "missing.toml").string()) == 2);
    CHECK(cli("no-such-subcommand") == 2);
    CHECK(cli("oscillator-demo --config " + write_config(dir, kSmall).string() + " --out " + out) == 2);

    // Linear drift off a frozen base point pushes the state past a tiny basis.
    auto trunc = replace(kSmall, "cutoff = 24", "cutoff = 8");
    trunc = replace(trunc, "hbar = 0.5", "hbar = 0.05");
    trunc = replace(trunc, "kind = \"hamiltonian\"\nstart = [0.5, 0.0]", "kind = \"constant\"\nstart = [0.0, 0.0]");
    trunc = replace(trunc, "{ exponents = [0, 2], coefficient = 0.5 }]",
                    "{ exponents = [0, 2], coefficient = 0.5 }, { exponents = [1, 0], coefficient = 1.0 }]");
    CHECK(cli("run --config " + write_config(dir, trunc).string() + " --out " + out) == 3);

    CHECK(cli("run --config " + write_config(dir, kSmall + "\n[checks]\nmax_norm_drift = 1e-300\n").string() +
              " --out " + out) == 5);
}
