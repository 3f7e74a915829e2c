#include "psqm/config.hpp"

#include "psqm/errors.hpp"

#define TOML_HEADER_ONLY 1
#include <toml.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace psqm {

std::string_view to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::Evolution: return "evolution";
    case ExperimentKind::OscillatorDemo: return "oscillator-demo";
    case ExperimentKind::CoherentCheck: return "coherent-check";
    case ExperimentKind::TheoremSweep: return "theorem-sweep";
    }
    return "unknown";
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw SchemaError("config: " + (path.empty() ? std::string("<root>") : path) + ": " + msg);
}

std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void reject_unknown(const toml::table& t, const std::string& path, std::initializer_list<std::string_view> allowed) {
    for (const auto& [k, v] : t) {
        if (std::find(allowed.begin(), allowed.end(), k.str()) == allowed.end())
            fail(join(path, k.str()), "unknown key");
    }
}

const toml::table& require_table(const toml::table& t, std::string_view key, const std::string& path) {
    const auto* node = t.get(key);
    if (!node) fail(join(path, key), "missing required table");
    const auto* tbl = node->as_table();
    if (!tbl) fail(join(path, key), "expected a table");
    return *tbl;
}

const toml::table* optional_table(const toml::table& t, std::string_view key, const std::string& path) {
    const auto* node = t.get(key);
    if (!node) return nullptr;
    const auto* tbl = node->as_table();
    if (!tbl) fail(join(path, key), "expected a table");
    return tbl;
}

double as_double(const toml::node& n, const std::string& path) {
    if (auto v = n.value<double>()) {
        if (!std::isfinite(*v)) fail(path, "must be finite");
        return *v;
    }
    fail(path, "expected a number");
}

std::int64_t as_int(const toml::node& n, const std::string& path) {
    if (!n.is_integer()) fail(path, "expected an integer");
    return *n.value<std::int64_t>();
}

std::optional<double> optional_double(const toml::table& t, std::string_view key, const std::string& path) {
    const auto* n = t.get(key);
    if (!n) return std::nullopt;
    return as_double(*n, join(path, key));
}

double required_double(const toml::table& t, std::string_view key, const std::string& path) {
    const auto* n = t.get(key);
    if (!n) fail(join(path, key), "missing required key");
    return as_double(*n, join(path, key));
}

std::optional<std::int64_t> optional_int(const toml::table& t, std::string_view key, const std::string& path) {
    const auto* n = t.get(key);
    if (!n) return std::nullopt;
    return as_int(*n, join(path, key));
}

std::optional<bool> optional_bool(const toml::table& t, std::string_view key, const std::string& path) {
    const auto* n = t.get(key);
    if (!n) return std::nullopt;
    if (!n->is_boolean()) fail(join(path, key), "expected a boolean");
    return *n->value<bool>();
}

std::optional<std::string> optional_string(const toml::table& t, std::string_view key, const std::string& path) {
    const auto* n = t.get(key);
    if (!n) return std::nullopt;
    if (!n->is_string()) fail(join(path, key), "expected a string");
    return *n->value<std::string>();
}

const toml::array& require_array(const toml::node& n, const std::string& path) {
    const auto* a = n.as_array();
    if (!a) fail(path, "expected an array");
    return *a;
}

std::vector<double> double_list(const toml::node& n, const std::string& path) {
    std::vector<double> out;
    const auto& arr = require_array(n, path);
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(as_double(arr[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<int> int_list(const toml::node& n, const std::string& path) {
    std::vector<int> out;
    const auto& arr = require_array(n, path);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto v = as_int(arr[i], path + "[" + std::to_string(i) + "]");
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
            fail(path + "[" + std::to_string(i) + "]", "integer out of range");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

Complex complex_pair(const toml::node& n, const std::string& path) {
    const auto v = double_list(n, path);
    if (v.size() != 2) fail(path, "expected [re, im]");
    return {v[0], v[1]};
}

PhasePoint phase_point(const toml::node& n, const std::string& path, int modes) {
    auto v = double_list(n, path);
    if (v.size() != 2 * static_cast<std::size_t>(modes))
        fail(path, "expected " + std::to_string(2 * modes) + " coordinates (q..., p...)");
    return PhasePoint(std::move(v));
}

// A polynomial is an array of { exponents = [...], coefficient = x } records.
PhasePolynomial polynomial(const toml::node& n, const std::string& path, int modes) {
    PhasePolynomial f(modes);
    const auto& arr = require_array(n, path);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        const auto* rec = arr[i].as_table();
        if (!rec) fail(p, "expected { exponents = [...], coefficient = x }");
        reject_unknown(*rec, p, {"exponents", "coefficient"});
        const auto* e = rec->get("exponents");
        if (!e) fail(join(p, "exponents"), "missing required key");
        auto exps = int_list(*e, join(p, "exponents"));
        if (exps.size() != 2 * static_cast<std::size_t>(modes))
            fail(join(p, "exponents"), "expected " + std::to_string(2 * modes) + " exponents");
        for (int x : exps)
            if (x < 0) fail(join(p, "exponents"), "exponents must be non-negative");
        const double c = required_double(*rec, "coefficient", p);
        f.add_term(MultiIndex(std::move(exps)), c);
    }
    if (f.degree() > kMaxQuantizedDegree)
        fail(path, "degree " + std::to_string(f.degree()) + " exceeds cap " + std::to_string(kMaxQuantizedDegree));
    return f;
}

ExperimentKind parse_kind(const std::string& s, const std::string& path) {
    if (s == "evolution") return ExperimentKind::Evolution;
    if (s == "oscillator-demo") return ExperimentKind::OscillatorDemo;
    if (s == "coherent-check") return ExperimentKind::CoherentCheck;
    if (s == "theorem-sweep") return ExperimentKind::TheoremSweep;
    fail(path, "unknown experiment '" + s + "' (evolution, oscillator-demo, coherent-check, theorem-sweep)");
}

void parse_basis(const toml::table& root, ExperimentConfig& cfg) {
    const auto& b = require_table(root, "basis", "");
    reject_unknown(b, "basis", {"modes", "cutoff", "hbar", "hbar_grid"});
    const auto modes = optional_int(b, "modes", "basis").value_or(1);
    if (modes < 1 || modes > 4) fail("basis.modes", "must be in [1, 4]");
    const auto cutoff = optional_int(b, "cutoff", "basis");
    if (!cutoff) fail("basis.cutoff", "missing required key");
    if (*cutoff < 2) fail("basis.cutoff", "must be >= 2 (ladder operators undefined)");
    if (std::pow(static_cast<double>(*cutoff), static_cast<double>(modes)) > 4096.0)
        fail("basis", "cutoff^modes exceeds 4096");
    cfg.modes = static_cast<int>(modes);
    cfg.cutoff = static_cast<int>(*cutoff);

    const auto* h = b.get("hbar");
    const auto* grid = b.get("hbar_grid");
    if (h && grid) fail("basis", "give either hbar or hbar_grid, not both");
    if (!h && !grid) fail("basis", "missing hbar or hbar_grid");
    if (h) cfg.hbar_grid = {as_double(*h, "basis.hbar")};
    if (grid) {
        cfg.hbar_grid = double_list(*grid, "basis.hbar_grid");
        if (cfg.hbar_grid.empty()) fail("basis.hbar_grid", "must not be empty");
    }
    for (double v : cfg.hbar_grid)
        if (!(v > 0.0)) fail("basis", "hbar values must be positive");
    std::sort(cfg.hbar_grid.begin(), cfg.hbar_grid.end(), std::greater<>());
    if (std::adjacent_find(cfg.hbar_grid.begin(), cfg.hbar_grid.end()) != cfg.hbar_grid.end())
        fail("basis.hbar_grid", "duplicate hbar values");
}

void parse_curve(const toml::table& root, ExperimentConfig& cfg) {
    if (!root.get("curve") && cfg.experiment == ExperimentKind::CoherentCheck) {
        cfg.curve = CurveSpec::hamiltonian_from(PhasePoint::zero(cfg.modes));
        return;
    }
    const auto& c = require_table(root, "curve", "");
    reject_unknown(c, "curve", {"kind", "start", "samples"});
    const auto kind = optional_string(c, "kind", "curve");
    if (!kind) fail("curve.kind", "missing required key");
    if (*kind == "constant" || *kind == "hamiltonian") {
        if (c.get("samples")) fail("curve.samples", "only allowed for kind = \"sampled\"");
        const auto* s = c.get("start");
        if (!s) fail("curve.start", "missing required key");
        const PhasePoint start = phase_point(*s, "curve.start", cfg.modes);
        cfg.curve = *kind == "constant" ? CurveSpec::constant_at(start) : CurveSpec::hamiltonian_from(start);
    } else if (*kind == "sampled") {
        if (c.get("start")) fail("curve.start", "not allowed for kind = \"sampled\" (first sample is the start)");
        const auto* s = c.get("samples");
        if (!s) fail("curve.samples", "missing required key");
        const auto& arr = require_array(*s, "curve.samples");
        std::vector<PhasePoint> pts;
        for (std::size_t i = 0; i < arr.size(); ++i)
            pts.push_back(phase_point(arr[i], "curve.samples[" + std::to_string(i) + "]", cfg.modes));
        if (pts.size() < 3) fail("curve.samples", "need at least 3 samples");
        cfg.curve = CurveSpec::sampled(std::move(pts));
    } else {
        fail("curve.kind", "unknown kind '" + *kind + "' (constant, hamiltonian, sampled)");
    }
}

void parse_initial_state(const toml::table& root, ExperimentConfig& cfg) {
    const auto* t = optional_table(root, "initial_state", "");
    if (!t) {
        cfg.initial_state.fock.assign(static_cast<std::size_t>(cfg.modes), 0);
        return;
    }
    reject_unknown(*t, "initial_state", {"fock", "coefficients"});
    const auto* f = t->get("fock");
    const auto* c = t->get("coefficients");
    if (f && c) fail("initial_state", "give either fock or coefficients, not both");
    if (f) {
        cfg.initial_state.fock = int_list(*f, "initial_state.fock");
        if (cfg.initial_state.fock.size() != static_cast<std::size_t>(cfg.modes))
            fail("initial_state.fock", "expected one occupation per mode");
        for (int k : cfg.initial_state.fock)
            if (k < 0 || k >= cfg.cutoff) fail("initial_state.fock", "occupation outside [0, cutoff)");
    } else if (c) {
        const auto& arr = require_array(*c, "initial_state.coefficients");
        double norm2 = 0.0;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const Complex z = complex_pair(arr[i], "initial_state.coefficients[" + std::to_string(i) + "]");
            norm2 += std::norm(z);
            cfg.initial_state.coefficients.push_back(z);
        }
        const auto dim = static_cast<std::size_t>(std::llround(std::pow(cfg.cutoff, cfg.modes)));
        if (cfg.initial_state.coefficients.size() != dim)
            fail("initial_state.coefficients", "expected cutoff^modes = " + std::to_string(dim) + " entries");
        if (std::abs(norm2 - 1.0) > 1e-10) fail("initial_state.coefficients", "state is not normalized");
    } else {
        cfg.initial_state.fock.assign(static_cast<std::size_t>(cfg.modes), 0);
    }
}

void parse_theta(const toml::table& root, ExperimentConfig& cfg) {
    cfg.theta = SymplecticPotential::standard(cfg.modes);
    const auto* t = optional_table(root, "theta", "");
    if (!t) return;
    reject_unknown(*t, "theta", {"kind", "components"});
    const auto kind = optional_string(*t, "kind", "theta").value_or("default");
    if (kind == "default") {
        if (t->get("components")) fail("theta.components", "only allowed for kind = \"explicit\"");
        return;
    }
    if (kind != "explicit") fail("theta.kind", "unknown kind '" + kind + "' (default, explicit)");
    const auto* comps = t->get("components");
    if (!comps) fail("theta.components", "missing required key");
    const auto& arr = require_array(*comps, "theta.components");
    if (arr.size() != 2 * static_cast<std::size_t>(cfg.modes)) fail("theta.components", "expected 2n polynomials");
    std::vector<PhasePolynomial> polys;
    for (std::size_t i = 0; i < arr.size(); ++i)
        polys.push_back(polynomial(arr[i], "theta.components[" + std::to_string(i) + "]", cfg.modes));
    try {
        cfg.theta = SymplecticPotential::from_components(std::move(polys));
    } catch (const DomainError&) {
        fail("theta.components", "d(theta) must equal the symplectic form dp ^ dq");
    }
}

void parse_output(const toml::table& root, ExperimentConfig& cfg) {
    const auto* t = optional_table(root, "output", "");
    if (!t) return;
    reject_unknown(*t, "output", {"record_every", "moment_orders", "plots"});
    if (auto v = optional_int(*t, "record_every", "output")) {
        if (*v < 1) fail("output.record_every", "must be >= 1");
        cfg.output.record_every = static_cast<std::size_t>(*v);
    }
    if (const auto* m = t->get("moment_orders")) {
        cfg.output.moment_orders = int_list(*m, "output.moment_orders");
        for (int k : cfg.output.moment_orders)
            if (k < 1 || k > 6) fail("output.moment_orders", "orders must lie in [1, 6]");
    }
    if (auto v = optional_bool(*t, "plots", "output")) cfg.output.plots = *v;
}

void parse_checks(const toml::table& root, ExperimentConfig& cfg) {
    const auto* t = optional_table(root, "checks", "");
    if (!t) return;
    reject_unknown(*t, "checks",
                   {"max_norm_drift", "max_tail_mass", "richardson", "richardson_target", "richardson_tolerance",
                    "reduction_tolerance", "center_of_mass_tolerance", "fidelity_tolerance", "phase_tolerance",
                    "fidelity_drift_tolerance", "preservation_margin", "breakdown_max_slope",
                    "center_error_min_slope"});
    auto& c = cfg.checks;
    auto positive = [&](std::string_view key) {
        auto v = optional_double(*t, key, "checks");
        if (v && !(*v > 0.0)) fail(join("checks", key), "must be positive");
        return v;
    };
    c.max_norm_drift = positive("max_norm_drift");
    c.max_tail_mass = positive("max_tail_mass");
    c.richardson = optional_bool(*t, "richardson", "checks").value_or(false);
    c.richardson_target = positive("richardson_target").value_or(4.0);
    c.richardson_tolerance = positive("richardson_tolerance").value_or(0.5);
    c.reduction_tolerance = positive("reduction_tolerance");
    c.center_of_mass_tolerance = positive("center_of_mass_tolerance");
    c.fidelity_tolerance = positive("fidelity_tolerance");
    c.phase_tolerance = positive("phase_tolerance");
    c.fidelity_drift_tolerance = positive("fidelity_drift_tolerance");
    c.preservation_margin = positive("preservation_margin");
    c.breakdown_max_slope = optional_double(*t, "breakdown_max_slope", "checks");
    c.center_error_min_slope = optional_double(*t, "center_error_min_slope", "checks");
}

void validate_kind_specific(const toml::table& root, ExperimentConfig& cfg) {
    const auto* coh = optional_table(root, "coherent", "");
    const auto* sweep = optional_table(root, "sweep", "");
    if (coh && cfg.experiment != ExperimentKind::CoherentCheck)
        fail("coherent", "only allowed for experiment = \"coherent-check\"");
    if (sweep && cfg.experiment != ExperimentKind::TheoremSweep)
        fail("sweep", "only allowed for experiment = \"theorem-sweep\"");

    const bool oscillator = cfg.hamiltonian == PhasePolynomial::harmonic_oscillator(cfg.modes);
    switch (cfg.experiment) {
    case ExperimentKind::Evolution:
        if (cfg.hbar_grid.size() > 1 && cfg.hbar_grid.size() < 4)
            fail("basis.hbar_grid", "an hbar sweep needs at least 4 values");
        break;
    case ExperimentKind::OscillatorDemo:
        if (!oscillator) fail("hamiltonian", "oscillator-demo requires H = (q^2 + p^2)/2");
        if (cfg.curve.kind != CurveSpec::Kind::Hamiltonian) fail("curve.kind", "oscillator-demo requires \"hamiltonian\"");
        if (!cfg.theta.is_standard()) fail("theta", "oscillator-demo requires the default potential");
        break;
    case ExperimentKind::CoherentCheck: {
        if (cfg.modes != 1) fail("basis.modes", "coherent-check requires modes = 1");
        if (!oscillator) fail("hamiltonian", "coherent-check requires H = (q^2 + p^2)/2");
        if (!cfg.theta.is_standard()) fail("theta", "coherent-check requires the default potential");
        if (cfg.hbar_grid.size() != 1) fail("basis", "coherent-check takes a single hbar");
        if (cfg.curve.kind != CurveSpec::Kind::Hamiltonian) fail("curve.kind", "coherent-check requires \"hamiltonian\"");
        if (!cfg.initial_state.fock.empty() && cfg.initial_state.fock[0] != 0)
            fail("initial_state", "coherent-check starts from the ground state");
        if (!cfg.initial_state.coefficients.empty()) fail("initial_state", "coherent-check starts from the ground state");
        if (!coh) fail("coherent", "missing required table");
        reject_unknown(*coh, "coherent", {"z_values"});
        const auto* z = coh->get("z_values");
        if (!z) fail("coherent.z_values", "missing required key");
        const auto& arr = require_array(*z, "coherent.z_values");
        for (std::size_t i = 0; i < arr.size(); ++i)
            cfg.coherent.z_values.push_back(complex_pair(arr[i], "coherent.z_values[" + std::to_string(i) + "]"));
        if (cfg.coherent.z_values.empty()) fail("coherent.z_values", "must not be empty");
        break;
    }
    case ExperimentKind::TheoremSweep: {
        if (cfg.modes != 1) fail("basis.modes", "theorem-sweep requires modes = 1");
        if (cfg.curve.kind != CurveSpec::Kind::Hamiltonian) fail("curve.kind", "theorem-sweep requires \"hamiltonian\"");
        if (!cfg.theta.is_standard()) fail("theta", "theorem-sweep requires the default potential");
        if (cfg.hbar_grid.size() < 4) fail("basis.hbar_grid", "theorem-sweep needs at least 4 hbar values");
        if (cfg.hbar_grid.front() / cfg.hbar_grid.back() < 100.0 * (1.0 - 1e-9))
            fail("basis.hbar_grid", "hbar grid must span at least two decades");
        cfg.sweep.fixed_base = PhasePoint::zero(cfg.modes);
        if (sweep) {
            reject_unknown(*sweep, "sweep", {"moment_orders", "fixed_base"});
            if (const auto* m = sweep->get("moment_orders")) {
                cfg.sweep.moment_orders = int_list(*m, "sweep.moment_orders");
                for (int k : cfg.sweep.moment_orders)
                    if (k < 1 || k > 6) fail("sweep.moment_orders", "orders must lie in [1, 6]");
            }
            if (const auto* b = sweep->get("fixed_base"))
                cfg.sweep.fixed_base = phase_point(*b, "sweep.fixed_base", cfg.modes);
        }
        break;
    }
    }
}

}  // namespace

ExperimentConfig parse_config(std::string_view toml_text, std::string_view source_name) {
    toml::table root;
    try {
        root = toml::parse(toml_text, source_name);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "config: TOML syntax error: " << e.description() << " at " << e.source().begin;
        throw SchemaError(os.str());
    }
    reject_unknown(root, "", {"schema_version", "name", "experiment", "basis", "hamiltonian", "observables", "curve",
                              "initial_state", "time", "theta", "output", "checks", "coherent", "sweep"});

    ExperimentConfig cfg;
    cfg.source_text = std::string(toml_text);
    const auto version = optional_int(root, "schema_version", "");
    if (!version) fail("schema_version", "missing required key");
    if (*version != kConfigSchemaVersion)
        fail("schema_version", "unsupported version " + std::to_string(*version) + " (expected " +
                                   std::to_string(kConfigSchemaVersion) + ")");
    cfg.name = optional_string(root, "name", "").value_or("experiment");
    if (cfg.name.empty() || cfg.name.find_first_of("/\\ ") != std::string::npos)
        fail("name", "must be a non-empty identifier without spaces or slashes");
    cfg.experiment = parse_kind(optional_string(root, "experiment", "").value_or("evolution"), "experiment");

    parse_basis(root, cfg);

    const auto& ham = require_table(root, "hamiltonian", "");
    reject_unknown(ham, "hamiltonian", {"terms"});
    const auto* terms = ham.get("terms");
    if (!terms) fail("hamiltonian.terms", "missing required key");
    cfg.hamiltonian = polynomial(*terms, "hamiltonian.terms", cfg.modes);

    if (const auto* obs = root.get("observables")) {
        const auto& arr = require_array(*obs, "observables");
        std::set<std::string> seen;
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string p = "observables[" + std::to_string(i) + "]";
            const auto* t = arr[i].as_table();
            if (!t) fail(p, "expected a table");
            reject_unknown(*t, p, {"name", "terms"});
            const auto name = optional_string(*t, "name", p);
            if (!name || name->empty()) fail(join(p, "name"), "missing required key");
            if (!seen.insert(*name).second) fail(join(p, "name"), "duplicate observable name");
            const auto* tt = t->get("terms");
            if (!tt) fail(join(p, "terms"), "missing required key");
            cfg.observables.push_back({*name, polynomial(*tt, join(p, "terms"), cfg.modes)});
        }
    }

    parse_curve(root, cfg);
    parse_initial_state(root, cfg);

    const auto& time = require_table(root, "time", "");
    reject_unknown(time, "time", {"t0", "t1", "dt"});
    cfg.t0 = optional_double(time, "t0", "time").value_or(0.0);
    cfg.t1 = required_double(time, "t1", "time");
    cfg.dt = required_double(time, "dt", "time");
    if (!(cfg.t1 > cfg.t0)) fail("time", "t1 must exceed t0");
    if (!(cfg.dt > 0.0)) fail("time.dt", "must be positive");
    if ((cfg.t1 - cfg.t0) / cfg.dt > 1e7) fail("time", "more than 1e7 steps");
    if (cfg.curve.kind == CurveSpec::Kind::Sampled && cfg.curve.samples.size() != cfg.grid().steps() + 1)
        fail("curve.samples", "expected one sample per grid time (" + std::to_string(cfg.grid().steps() + 1) + ")");

    parse_theta(root, cfg);
    parse_output(root, cfg);
    parse_checks(root, cfg);
    if (cfg.checks.richardson && cfg.curve.kind == CurveSpec::Kind::Sampled)
        fail("checks.richardson", "step halving needs a constant or Hamiltonian curve, not samples");
    validate_kind_specific(root, cfg);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("config: cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str(), path.string());
}

std::filesystem::path bundled_config_dir() { return PSQM_CONFIG_DIR; }

StateVector ExperimentConfig::initial(const BasisConfig& basis) const {
    if (!initial_state.fock.empty()) return StateVector::fock(basis, initial_state.fock);
    Vector v(static_cast<Eigen::Index>(initial_state.coefficients.size()));
    for (std::size_t i = 0; i < initial_state.coefficients.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = initial_state.coefficients[i];
    return {basis, std::move(v)};
}

}  // namespace psqm
