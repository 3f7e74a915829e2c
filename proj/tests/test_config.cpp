#include "psqm/config.hpp"
#include "psqm/errors.hpp"

#include <doctest.h>

#include <string>

using namespace psqm;

namespace {

const std::string kBase = R"(
schema_version = 1
name = "small"
experiment = "evolution"

[basis]
modes = 1
cutoff = 24
hbar = 0.5

[hamiltonian]
terms = [{ exponents = [2, 0], coefficient = 0.5 }, { exponents = [0, 2], coefficient = 0.5 }]

[curve]
kind = "hamiltonian"
start = [0.5, 0.0]

[initial_state]
fock = [0]

[time]
t1 = 0.5
dt = 0.01
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

// Message of the SchemaError thrown while parsing, or "" when parsing succeeds.
std::string schema_message(const std::string& text) {
    try {
        parse_config(text);
    } catch (const SchemaError& e) {
        return e.what();
    }
    return "";
}

bool mentions(const std::string& text, const std::string& needle) {
    const auto msg = schema_message(text);
    INFO(msg);
    return msg.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("bundled configs parse") {
    const auto osc = load_config(bundled_config_dir() / "oscillator_demo.toml");
    CHECK(osc.experiment == ExperimentKind::OscillatorDemo);
    CHECK(osc.checks.richardson);
    CHECK(osc.observables.size() == 2);

    const auto coh = load_config(bundled_config_dir() / "coherent_check.toml");
    CHECK(coh.experiment == ExperimentKind::CoherentCheck);
    CHECK(coh.coherent.z_values.size() >= 3);

    const auto sweep = load_config(bundled_config_dir() / "theorem_sweep.toml");
    CHECK(sweep.experiment == ExperimentKind::TheoremSweep);
    CHECK(sweep.hbar_grid.size() >= 4);
    CHECK(std::is_sorted(sweep.hbar_grid.rbegin(), sweep.hbar_grid.rend()));
}

TEST_CASE("minimal evolution config") {
    const auto cfg = parse_config(kBase);
    CHECK(cfg.name == "small");
    CHECK(cfg.hbar_grid == std::vector<double>{0.5});
    CHECK(cfg.observables.empty());
    CHECK(cfg.output.record_every == 10);
    CHECK(cfg.grid().steps() == 50);
    CHECK(cfg.theta.is_standard());
    CHECK(cfg.initial(cfg.basis(0.5))[0] == Complex(1.0, 0.0));
}

TEST_CASE("schema errors name the offending key") {
    CHECK(mentions(kBase + "\nbogus = 1\n", "bogus"));
    CHECK(mentions(replace(kBase, "cutoff = 24", "cutoff = 24\ncutof = 3"), "basis.cutof"));
    CHECK(mentions(replace(kBase, "cutoff = 24\n", ""), "basis.cutoff"));
    CHECK(mentions(replace(kBase, "cutoff = 24", "cutoff = \"big\""), "basis.cutoff"));
    CHECK(mentions(replace(kBase, "cutoff = 24", "cutoff = 1"), "basis.cutoff"));
    CHECK(mentions(replace(kBase, "schema_version = 1", "schema_version = 7"), "schema_version"));
    CHECK(mentions(replace(kBase, "hbar = 0.5", "hbar = -0.5"), "positive"));
    CHECK(mentions(replace(kBase, "hbar = 0.5", "hbar = 0.5\nhbar_grid = [0.1, 0.2]"), "basis"));
    CHECK(mentions(replace(kBase, "exponents = [2, 0]", "exponents = [2, 0, 1]"), "hamiltonian"));
    CHECK(mentions(replace(kBase, "kind = \"hamiltonian\"", "kind = \"spiral\""), "curve.kind"));
    CHECK(mentions(replace(kBase, "dt = 0.01", "dt = 0.0"), "time.dt"));
    CHECK(mentions(replace(kBase, "t1 = 0.5", "t1 = -0.5"), "time"));
    CHECK(mentions(replace(kBase, "fock = [0]", "fock = [30]"), "initial_state"));
    CHECK(mentions(replace(kBase, "fock = [0]", "coefficients = [[0.0, 0.0]]"), "initial_state"));
    CHECK(mentions(replace(kBase, "experiment = \"evolution\"", "experiment = \"nope\""), "experiment"));
}

TEST_CASE("TOML syntax errors are schema errors") {
    CHECK(mentions(kBase + "\n[basis\n", "TOML syntax"));
}

TEST_CASE("hbar sweeps") {
    const auto grid = replace(kBase, "hbar = 0.5", "hbar_grid = [0.001, 0.1, 0.01, 0.03]");
    CHECK(parse_config(grid).hbar_grid == std::vector<double>{0.1, 0.03, 0.01, 0.001});
    CHECK(mentions(replace(kBase, "hbar = 0.5", "hbar_grid = [0.1, 0.01]"), "basis.hbar_grid"));
    CHECK(mentions(replace(kBase, "hbar = 0.5", "hbar_grid = [0.1, 0.1, 0.01, 0.001]"), "basis.hbar_grid"));

    auto sweep = replace(kBase, "experiment = \"evolution\"", "experiment = \"theorem-sweep\"");
    CHECK(mentions(sweep, "hbar"));
    CHECK(schema_message(replace(sweep, "hbar = 0.5", "hbar_grid = [0.1, 0.03, 0.01, 0.003, 0.001]")).empty());
    CHECK(!schema_message(replace(sweep, "hbar = 0.5", "hbar_grid = [0.1, 0.08, 0.05, 0.02]")).empty());
}

TEST_CASE("sampled curves") {
    const auto sampled = replace(kBase, "kind = \"hamiltonian\"\nstart = [0.5, 0.0]",
                                 "kind = \"sampled\"\nsamples = [[0.0, 0.0], [0.1, 0.0], [0.2, 0.1]]");
    const auto two_steps = replace(sampled, "dt = 0.01", "dt = 0.25");
    const auto cfg = parse_config(two_steps);
    CHECK(cfg.curve.kind == CurveSpec::Kind::Sampled);
    CHECK(mentions(sampled, "curve.samples"));
    CHECK(mentions(replace(two_steps, "[time]", "[checks]\nrichardson = true\n\n[time]"), "richardson"));
}

TEST_CASE("kind-specific requirements") {
    auto demo = replace(kBase, "experiment = \"evolution\"", "experiment = \"oscillator-demo\"");
    CHECK(schema_message(demo).empty());
    CHECK(!schema_message(replace(demo, "coefficient = 0.5 }, {", "coefficient = 0.7 }, {")).empty());

    auto coh = replace(kBase, "experiment = \"evolution\"", "experiment = \"coherent-check\"");
    CHECK(mentions(coh, "coherent"));
    CHECK(schema_message(coh + "\n[coherent]\nz_values = [[0.0, 0.0], [1.0, 0.5]]\n").empty());
    CHECK(mentions(kBase + "\n[coherent]\nz_values = [[0.0, 0.0]]\n", "coherent"));
}

TEST_CASE("explicit symplectic potentials are validated") {
    const auto good = kBase + R"(
[theta]
kind = "explicit"
components = [[{ exponents = [0, 1], coefficient = 1.0 }], []]
)";
    const auto cfg = parse_config(good);
    CHECK(!cfg.theta.is_standard());
    const auto bad = replace(good, "coefficient = 1.0 }], []", "coefficient = -1.0 }], []");
    CHECK(mentions(bad, "theta.components"));
}

TEST_CASE("missing files") {
    CHECK_THROWS_AS(load_config("/nonexistent/psqm.toml"), SchemaError);
}
