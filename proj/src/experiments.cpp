#include "psqm/experiments.hpp"

#include "psqm/errors.hpp"
#include "psqm/output.hpp"
#include "psqm/parallel.hpp"
#include "psqm/transport.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

namespace psqm {

bool RunManifest::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

MultiIndex tuple_index(const std::vector<int>& tuple, int modes) {
    std::vector<int> e(2 * static_cast<std::size_t>(modes), 0);
    for (int mu : tuple) ++e[static_cast<std::size_t>(mu)];
    return MultiIndex(std::move(e));
}

std::vector<std::vector<int>> tuples_for_orders(int modes, const std::vector<int>& orders) {
    std::vector<int> sorted = orders;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<std::vector<int>> out;
    for (int k : sorted)
        for (auto& t : moment_index_tuples(modes, k)) out.push_back(std::move(t));
    return out;
}

std::vector<OperatorMatrix> tuple_operators(const std::vector<std::vector<int>>& tuples, const Quantizer& quantizer) {
    std::vector<OperatorMatrix> out;
    out.reserve(tuples.size());
    for (const auto& t : tuples) out.push_back(quantizer.symmetrized(tuple_index(t, quantizer.ops().modes())));
    return out;
}

std::string coordinate_label(int mu, int modes) {
    const int one[] = {mu};
    return moment_label(one, modes);
}

std::vector<PhasePolynomial> support_of(const ExperimentConfig& config) {
    std::vector<PhasePolynomial> support{config.hamiltonian};
    for (const auto& o : config.observables) support.push_back(o.polynomial);
    return support;
}

EvolveOptions options_with_stride(std::size_t stride) {
    EvolveOptions o;
    o.record_stride = std::max<std::size_t>(1, stride);
    return o;
}

CheckResult make_check(std::string name, double value, std::string comparison, double threshold,
                       std::string detail = {}) {
    bool ok = false;
    if (comparison == "<") ok = value < threshold;
    else if (comparison == "<=") ok = value <= threshold;
    else if (comparison == ">=") ok = value >= threshold;
    else if (comparison == ">") ok = value > threshold;
    return {std::move(name), ok, value, threshold, std::move(comparison), std::move(detail)};
}

}  // namespace

EvolutionSeries run_evolution(const ExperimentConfig& config, double hbar, std::size_t record_every) {
    return run_evolution(config, hbar, config.grid(), record_every);
}

EvolutionSeries run_evolution(const ExperimentConfig& config, double hbar, const TimeGrid& grid,
                              std::size_t record_every) {
    const BasisConfig basis = config.basis(hbar);
    const CanonicalOps ops = build_canonical_ops(basis);
    const auto support = support_of(config);
    const Quantizer quantizer(ops, support);
    const ConnectionForm A(config.theta, ops);
    const auto tuples = tuples_for_orders(config.modes, config.output.moment_orders);
    const auto moment_ops = tuple_operators(tuples, quantizer);

    const Trajectory traj = build_trajectory(config.curve, config.hamiltonian, grid);
    const auto evo = evolve(config.initial(basis), traj, config.hamiltonian, A, quantizer,
                            options_with_stride(record_every));

    EvolutionSeries s;
    s.hbar = hbar;
    s.tail_mass_max = evo.tail_mass_max;
    s.norm_drift_max = evo.norm_drift_max;
    for (const auto& t : tuples) s.moment_labels.push_back(moment_label(t, config.modes));
    for (std::size_t r = 0; r < evo.states.size(); ++r) {
        const auto& state = evo.states[r];
        const PhasePoint& c = traj.points[evo.state_steps[r]];
        s.times.push_back(evo.time_of(r));
        s.curve.push_back(c);
        std::vector<double> obs;
        for (const auto& o : config.observables)
            obs.push_back(observable_expectation(state, o.polynomial, c, quantizer).total);
        s.observables.push_back(std::move(obs));
        std::vector<Complex> mom;
        for (const auto& m : moment_ops) mom.push_back(expectation(state, m).value);
        s.moments.push_back(std::move(mom));
    }
    return s;
}

double richardson_ratio(const ExperimentConfig& config, double hbar) {
    const TimeGrid coarse = config.grid();
    const std::size_t r = config.output.record_every;
    EvolutionSeries runs[3];
    for (std::size_t level = 0; level < 3; ++level) {
        const std::size_t factor = std::size_t{1} << level;
        runs[level] = run_evolution(config, hbar, TimeGrid(coarse.t0(), coarse.t1(), coarse.steps() * factor),
                                    r * factor);
    }
    auto values = [&](const EvolutionSeries& s, std::size_t rec) {
        std::vector<Complex> v;
        if (!config.observables.empty())
            for (double x : s.observables[rec]) v.emplace_back(x, 0.0);
        else
            v = s.moments[rec];
        return v;
    };
    const std::size_t n = runs[0].times.size();
    if (runs[1].times.size() != n || runs[2].times.size() != n)
        throw DomainError("richardson_ratio: record times do not line up across step sizes");
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t rec = 0; rec < n; ++rec) {
        const auto a = values(runs[0], rec), b = values(runs[1], rec), c = values(runs[2], rec);
        for (std::size_t i = 0; i < a.size(); ++i) {
            d1 = std::max(d1, std::abs(a[i] - b[i]));
            d2 = std::max(d2, std::abs(b[i] - c[i]));
        }
    }
    if (d2 == 0.0) return d1 == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return d1 / d2;
}

OscillatorDemoReport oscillator_demo(const ExperimentConfig& config) {
    if (config.hamiltonian != PhasePolynomial::harmonic_oscillator(config.modes) ||
        config.curve.kind != CurveSpec::Kind::Hamiltonian)
        throw DomainError("oscillator_demo: needs the oscillator Hamiltonian over its Hamiltonian curve");
    const double hbar = config.hbar_grid.front();
    const BasisConfig basis = config.basis(hbar);
    const CanonicalOps ops = build_canonical_ops(basis);
    const Quantizer quantizer(ops, std::span<const PhasePolynomial>(&config.hamiltonian, 1));
    const ConnectionForm A(config.theta, ops);
    const TimeGrid grid = config.grid();
    const Trajectory traj = integrate_hamilton(config.hamiltonian, config.curve.start, grid);

    OperatorMatrix target = OperatorMatrix::zero(basis);
    for (const auto& y : ops.y) target += (y * y) * Complex(0.5, 0.0);

    OscillatorDemoReport report;
    auto reduction = [&](const PhasePoint& c, const TangentVector& v) {
        const OperatorMatrix K = modified_hamiltonian(config.hamiltonian, c, v, A, quantizer);
        return (K.entries() - target.entries()).cwiseAbs().maxCoeff();
    };
    for (std::size_t n = 0; n < traj.size(); ++n) {
        report.reduction_error = std::max(report.reduction_error, reduction(traj.points[n], traj.velocities[n]));
        if (n + 1 < traj.size())
            report.chord_reduction_error = std::max(
                report.chord_reduction_error,
                reduction(0.5 * (traj.points[n] + traj.points[n + 1]),
                          (traj.points[n + 1] - traj.points[n]) * (1.0 / (traj.times[n + 1] - traj.times[n]))));
    }

    ExperimentConfig full = config;
    full.output.moment_orders.push_back(1);
    report.series = run_evolution(full, hbar, grid, 1);
    const auto& s = report.series;
    const std::size_t first = [&] {
        auto it = std::find(s.moment_labels.begin(), s.moment_labels.end(), coordinate_label(0, config.modes));
        return static_cast<std::size_t>(it - s.moment_labels.begin());
    }();
    const PhasePoint& c0 = config.curve.start;
    for (std::size_t r = 0; r < s.times.size(); ++r) {
        const double tau = s.times[r] - grid.t0();
        for (int j = 0; j < config.modes; ++j) {
            const double exact = std::cos(tau) * c0.q(j) + std::sin(tau) * c0.p(j);
            const double q = s.curve[r].q(j) + s.moments[r][first + static_cast<std::size_t>(j)].real();
            report.center_of_mass_error = std::max(report.center_of_mass_error, std::abs(q - exact));
        }
    }
    return report;
}

CoherentReport coherent_state_check(const ExperimentConfig& config) {
    if (config.modes != 1 || config.hamiltonian != PhasePolynomial::harmonic_oscillator(1) ||
        !config.theta.is_standard())
        throw DomainError("coherent_state_check: needs one mode, the oscillator Hamiltonian and the default potential");
    CoherentReport report;
    report.hbar = config.hbar_grid.front();
    const BasisConfig basis = config.basis(report.hbar);
    const CanonicalOps ops = build_canonical_ops(basis);
    const Quantizer quantizer(ops, std::span<const PhasePolynomial>(&config.hamiltonian, 1));
    const ConnectionForm A(config.theta, ops);
    const TimeGrid grid = config.grid();
    const Matrix a = lowering_matrix(basis.cutoff());
    const StateVector vacuum = StateVector::fock(basis, 0);
    const PhasePoint origin = PhasePoint::zero(1);

    for (const Complex z : config.coherent.z_values) {
        const Trajectory traj = integrate_hamilton(config.hamiltonian, PhasePoint{z.real(), z.imag()}, grid);
        const auto evo = evolve(vacuum, traj, config.hamiltonian, A, quantizer,
                                options_with_stride(config.output.record_every));
        double fmin = 1.0, fmax = 0.0;
        for (std::size_t r = 0; r < evo.states.size(); ++r) {
            const double tau = evo.time_of(r) - grid.t0();
            const StateVector psi =
                equivalence_map(evo.states[r], traj.points[evo.state_steps[r]], origin, ops);
            const Complex alpha = z * std::exp(Complex(0.0, -tau)) / std::sqrt(2.0 * report.hbar);
            const OperatorMatrix gen(basis, alpha * a.adjoint() - std::conj(alpha) * a);
            const StateVector closed(basis, std::exp(Complex(0.0, -tau / 2.0)) *
                                                (expm_antihermitian(gen) * vacuum).entries());
            const Complex overlap = closed.inner(psi);
            CoherentSample sample{z, evo.time_of(r), std::abs(overlap), std::arg(overlap)};
            report.min_fidelity = std::min(report.min_fidelity, sample.fidelity);
            report.max_phase_error = std::max(report.max_phase_error, std::abs(sample.phase));
            fmin = std::min(fmin, sample.fidelity);
            fmax = std::max(fmax, sample.fidelity);
            report.samples.push_back(sample);
        }
        report.fidelity_drift = std::max(report.fidelity_drift, fmax - fmin);
    }
    return report;
}

int fixed_base_cutoff(const ExperimentConfig& config, double hbar) {
    const double shift = (config.curve.start - config.sweep.fixed_base).norm() / std::sqrt(2.0 * hbar);
    int level = 0;
    for (int k : config.initial_state.fock) level = std::max(level, k);
    const double width = shift + std::sqrt(static_cast<double>(level)) + 7.0;
    return std::max(config.cutoff, static_cast<int>(std::ceil(1.15 * width * width)));
}

TheoremSweepReport theorem_sweep(const ExperimentConfig& config, int jobs) {
    if (config.hbar_grid.size() < 4) throw DomainError("theorem_sweep: need at least 4 hbar values");
    if (config.modes != 1 || config.initial_state.fock.empty())
        throw DomainError("theorem_sweep: needs one mode and a Fock initial state");
    TheoremSweepReport report;
    report.tuples = tuples_for_orders(config.modes, config.sweep.moment_orders);
    for (const auto& t : report.tuples) report.labels.push_back(moment_label(t, config.modes));
    const auto first_order = moment_index_tuples(config.modes, 1);
    const TimeGrid grid = config.grid();
    const Trajectory traj = integrate_hamilton(config.hamiltonian, config.curve.start, grid);
    const std::size_t G = config.hbar_grid.size();
    const auto opts = options_with_stride(config.output.record_every);

    auto run_one = [&](std::size_t job) {
        const bool curve = job < G;
        const double hbar = config.hbar_grid[curve ? job : job - G];
        SweepRun run;
        run.hbar = hbar;
        run.cutoff = curve ? config.cutoff : fixed_base_cutoff(config, hbar);
        const BasisConfig basis(config.modes, run.cutoff, hbar);
        const CanonicalOps ops = build_canonical_ops(basis);
        const Quantizer quantizer(ops, std::span<const PhasePolynomial>(&config.hamiltonian, 1));
        const ConnectionForm A(config.theta, ops);
        const auto& tuples = curve ? report.tuples : first_order;
        const auto moment_ops = tuple_operators(tuples, quantizer);
        const StateVector psi0 = config.initial(basis);

        EvolutionResult evo;
        if (curve) {
            evo = evolve(psi0, traj, config.hamiltonian, A, quantizer, opts);
        } else {
            const StateVector start = equivalence_map(psi0, config.curve.start, config.sweep.fixed_base, ops);
            const Trajectory fixed = build_trajectory(CurveSpec::constant_at(config.sweep.fixed_base),
                                                      config.hamiltonian, grid);
            evo = evolve(start, fixed, config.hamiltonian, A, quantizer, opts);
        }
        run.tail_mass_max = evo.tail_mass_max;
        run.norm_drift_max = evo.norm_drift_max;
        for (std::size_t r = 0; r < evo.states.size(); ++r) {
            run.times.push_back(evo.time_of(r));
            std::vector<Complex> mom;
            for (const auto& m : moment_ops) mom.push_back(expectation(evo.states[r], m).value);
            run.moments.push_back(std::move(mom));
            if (curve) {
                std::vector<double> err;
                for (int j = 0; j < config.modes; ++j)
                    err.push_back(expectation(evo.states[r], ops.q(j)).value.real());
                run.center_error.push_back(std::move(err));
            }
        }
        return run;
    };
    auto runs = parallel_map<SweepRun>(2 * G, jobs, run_one);
    report.curve_runs.assign(runs.begin(), runs.begin() + static_cast<std::ptrdiff_t>(G));
    report.base_runs.assign(runs.begin() + static_cast<std::ptrdiff_t>(G), runs.end());

    const double margin = config.checks.preservation_margin.value_or(0.15);
    auto fit_of = [&](std::string quantity, const std::vector<double>& values, double threshold, bool lower) {
        FitCheck f;
        f.quantity = std::move(quantity);
        f.fit = scaling_fit(config.hbar_grid, values);
        f.threshold = threshold;
        f.lower_bound = lower;
        f.passed = f.fit.identically_zero ? lower : (lower ? f.fit.slope >= threshold : f.fit.slope < threshold);
        return f;
    };
    for (std::size_t i = 0; i < report.tuples.size(); ++i) {
        std::vector<double> v;
        for (const auto& run : report.curve_runs) v.push_back(std::abs(run.moments.back()[i]));
        const double k = static_cast<double>(report.tuples[i].size());
        report.fits.push_back(fit_of("curve:moment:" + report.labels[i], v, k / 2.0 - margin, true));
    }
    for (int j = 0; j < config.modes; ++j) {
        std::vector<double> v;
        for (const auto& run : report.curve_runs) {
            double m = 0.0;
            for (const auto& e : run.center_error) m = std::max(m, std::abs(e[static_cast<std::size_t>(j)]));
            v.push_back(m);
        }
        report.fits.push_back(fit_of("curve:center_error:" + coordinate_label(j, config.modes), v,
                                     config.checks.center_error_min_slope.value_or(0.4), true));
    }
    for (int j = 0; j < config.modes; ++j) {
        std::vector<double> v;
        for (const auto& run : report.base_runs) v.push_back(std::abs(run.moments.back()[static_cast<std::size_t>(j)]));
        report.fits.push_back(fit_of("base:moment:" + coordinate_label(j, config.modes), v,
                                     config.checks.breakdown_max_slope.value_or(0.25), false));
    }
    return report;
}

namespace {

using Json = nlohmann::ordered_json;

Json to_json(const CheckResult& c) {
    return Json{{"name", c.name},           {"passed", c.passed}, {"value", c.value},
                {"comparison", c.comparison}, {"threshold", c.threshold}, {"detail", c.detail}};
}

Json to_json(const ScalingFit& f) {
    return Json{{"hbar_grid", f.hbar_grid}, {"values", f.values},          {"slope", f.slope},
                {"intercept", f.intercept}, {"r2", f.r2},                  {"points_used", f.points_used},
                {"identically_zero", f.identically_zero}};
}

struct Outputs {
    const RunOptions& options;
    RunManifest& manifest;

    void text(const std::string& file, std::string_view content) {
        const auto path = options.out_dir / file;
        write_text_file(path, content);
        manifest.artifacts.push_back(path);
    }
    void plot(const std::string& file, const PlotSpec& spec, const std::vector<PlotSeries>& series) {
        if (!options.plots) return;
        const auto path = options.out_dir / file;
        if (try_write_plot(path, spec, series)) manifest.artifacts.push_back(path);
    }
};

void add_guard_checks(const ExperimentConfig& config, double norm_drift, double tail_mass,
                      std::vector<CheckResult>& checks) {
    if (config.checks.max_norm_drift)
        checks.push_back(make_check("norm_drift", norm_drift, "<=", *config.checks.max_norm_drift));
    if (config.checks.max_tail_mass)
        checks.push_back(make_check("tail_mass", tail_mass, "<=", *config.checks.max_tail_mass));
}

void add_richardson(const ExperimentConfig& config, std::vector<CheckResult>& checks, Json& summary) {
    if (!config.checks.richardson) return;
    const double ratio = richardson_ratio(config, config.hbar_grid.front());
    summary["richardson_ratio"] = ratio;
    const double err = std::isfinite(ratio) ? std::abs(ratio - config.checks.richardson_target)
                                            : std::numeric_limits<double>::infinity();
    checks.push_back(make_check("richardson_ratio", err, "<=", config.checks.richardson_tolerance,
                                "|ratio - " + format_number(config.checks.richardson_target) + "|, ratio = " +
                                    format_number(ratio)));
}

void write_series(const ExperimentConfig& config, const EvolutionSeries& s, std::size_t every, CsvTable& csv) {
    for (std::size_t r = 0; r < s.times.size(); ++r) {
        if (r % every != 0 && r + 1 != s.times.size()) continue;
        const double t = s.times[r];
        for (int mu = 0; mu < 2 * config.modes; ++mu)
            csv.add(t, s.hbar, "curve:" + coordinate_label(mu, config.modes), s.curve[r][static_cast<std::size_t>(mu)]);
        for (std::size_t i = 0; i < config.observables.size(); ++i)
            csv.add(t, s.hbar, "observable:" + config.observables[i].name, s.observables[r][i]);
        for (std::size_t i = 0; i < s.moment_labels.size(); ++i)
            csv.add(t, s.hbar, "moment:" + s.moment_labels[i], s.moments[r][i]);
    }
}

Json series_summary(const EvolutionSeries& s) {
    return Json{{"hbar", s.hbar},
                {"final_time", s.times.back()},
                {"tail_mass_max", s.tail_mass_max},
                {"norm_drift_max", s.norm_drift_max}};
}

void run_evolution_experiment(const ExperimentConfig& config, const RunOptions& options, Outputs& out,
                              std::vector<CheckResult>& checks, Json& summary) {
    auto series = parallel_map<EvolutionSeries>(config.hbar_grid.size(), options.jobs, [&](std::size_t i) {
        return run_evolution(config, config.hbar_grid[i], config.output.record_every);
    });
    CsvTable csv;
    double drift = 0.0, tail = 0.0;
    Json runs = Json::array();
    for (const auto& s : series) {
        write_series(config, s, 1, csv);
        drift = std::max(drift, s.norm_drift_max);
        tail = std::max(tail, s.tail_mass_max);
        runs.push_back(series_summary(s));
    }
    summary["runs"] = runs;
    out.text("series.csv", csv.str());
    add_guard_checks(config, drift, tail, checks);
    add_richardson(config, checks, summary);

    std::vector<PlotSeries> plot;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < config.observables.size(); ++i) {
            PlotSeries p{config.observables[i].name + " hbar=" + format_number(s.hbar).substr(0, 7), s.times, {}};
            for (const auto& v : s.observables) p.y.push_back(v[i]);
            plot.push_back(std::move(p));
        }
    }
    if (!plot.empty()) out.plot("observables.svg", {"Observables", "t", "expectation"}, plot);
}

void run_oscillator_demo(const ExperimentConfig& config, Outputs& out, std::vector<CheckResult>& checks,
                         Json& summary) {
    const auto report = oscillator_demo(config);
    CsvTable csv;
    write_series(config, report.series, config.output.record_every, csv);
    out.text("series.csv", csv.str());
    summary["reduction_error"] = report.reduction_error;
    summary["chord_reduction_error"] = report.chord_reduction_error;
    summary["center_of_mass_error"] = report.center_of_mass_error;
    summary["runs"] = Json::array({series_summary(report.series)});
    if (config.checks.reduction_tolerance)
        checks.push_back(make_check("oscillator_reduction", report.reduction_error, "<",
                                    *config.checks.reduction_tolerance,
                                    "max entry of modified Hamiltonian minus (q^2 + p^2)/2"));
    if (config.checks.center_of_mass_tolerance)
        checks.push_back(make_check("center_of_mass", report.center_of_mass_error, "<",
                                    *config.checks.center_of_mass_tolerance,
                                    "max_t |<q> - (cos t q0 + sin t p0)|"));
    add_guard_checks(config, report.series.norm_drift_max, report.series.tail_mass_max, checks);
    add_richardson(config, checks, summary);

    const auto& s = report.series;
    const std::size_t q_index = static_cast<std::size_t>(
        std::find(s.moment_labels.begin(), s.moment_labels.end(), coordinate_label(0, config.modes)) -
        s.moment_labels.begin());
    PlotSeries quantum{"<q> computed", {}, {}}, classical{"cos t q0 + sin t p0", {}, {}};
    const PhasePoint& c0 = config.curve.start;
    for (std::size_t r = 0; r < s.times.size(); r += std::max<std::size_t>(1, config.output.record_every)) {
        const double tau = s.times[r] - config.t0;
        quantum.x.push_back(s.times[r]);
        quantum.y.push_back(s.curve[r].q(0) + s.moments[r][q_index].real());
        classical.x.push_back(s.times[r]);
        classical.y.push_back(std::cos(tau) * c0.q(0) + std::sin(tau) * c0.p(0));
    }
    out.plot("center_of_mass.svg", {"Center of mass", "t", "<q>"}, {classical, quantum});
}

void run_coherent_check(const ExperimentConfig& config, Outputs& out, std::vector<CheckResult>& checks,
                        Json& summary) {
    const auto report = coherent_state_check(config);
    CsvTable csv;
    std::vector<PlotSeries> plot;
    std::size_t zi = 0;
    for (std::size_t i = 0; i < report.samples.size(); ++i) {
        const auto& s = report.samples[i];
        if (i > 0 && s.z != report.samples[i - 1].z) ++zi;
        const std::string tag = "z" + std::to_string(zi);
        csv.add(s.t, report.hbar, tag + ":fidelity", s.fidelity);
        csv.add(s.t, report.hbar, tag + ":phase", s.phase);
        if (plot.size() <= zi)
            plot.push_back({"z=" + format_number(s.z.real()).substr(0, 6) + (s.z.imag() < 0 ? "" : "+") +
                                format_number(s.z.imag()).substr(0, 6) + "i",
                            {}, {}});
        plot[zi].x.push_back(s.t);
        plot[zi].y.push_back(1.0 - s.fidelity);
    }
    out.text("coherent.csv", csv.str());
    summary["min_fidelity"] = report.min_fidelity;
    summary["max_phase_error"] = report.max_phase_error;
    summary["fidelity_drift"] = report.fidelity_drift;
    if (config.checks.fidelity_tolerance)
        checks.push_back(make_check("coherent_fidelity", report.min_fidelity, ">=",
                                    1.0 - *config.checks.fidelity_tolerance, "min over z and t"));
    if (config.checks.phase_tolerance)
        checks.push_back(make_check("coherent_phase", report.max_phase_error, "<=", *config.checks.phase_tolerance,
                                    "max |arg <closed form, computed>|"));
    if (config.checks.fidelity_drift_tolerance)
        checks.push_back(make_check("coherent_fidelity_drift", report.fidelity_drift, "<=",
                                    *config.checks.fidelity_drift_tolerance, "max over z of the spread in t"));
    out.plot("coherent_infidelity.svg", {"Coherent state infidelity", "t", "1 - fidelity"}, plot);
}

void run_theorem_sweep(const ExperimentConfig& config, const RunOptions& options, Outputs& out,
                       std::vector<CheckResult>& checks, Json& summary) {
    const auto report = theorem_sweep(config, options.jobs);
    CsvTable csv;
    for (const auto& run : report.curve_runs)
        for (std::size_t r = 0; r < run.times.size(); ++r) {
            for (std::size_t i = 0; i < report.labels.size(); ++i)
                csv.add(run.times[r], run.hbar, "curve:moment:" + report.labels[i], run.moments[r][i]);
            for (int j = 0; j < config.modes; ++j)
                csv.add(run.times[r], run.hbar, "curve:center_error:" + coordinate_label(j, config.modes),
                        run.center_error[r][static_cast<std::size_t>(j)]);
        }
    for (const auto& run : report.base_runs)
        for (std::size_t r = 0; r < run.times.size(); ++r)
            for (int mu = 0; mu < 2 * config.modes; ++mu)
                csv.add(run.times[r], run.hbar, "base:moment:" + coordinate_label(mu, config.modes),
                        run.moments[r][static_cast<std::size_t>(mu)]);
    out.text("sweep.csv", csv.str());

    std::string fits = "quantity,slope,intercept,r2,points_used,identically_zero,bound,threshold,passed\n";
    Json jfits = Json::array();
    for (const auto& f : report.fits) {
        fits += f.quantity + "," + format_number(f.fit.slope) + "," + format_number(f.fit.intercept) + "," +
                format_number(f.fit.r2) + "," + std::to_string(f.fit.points_used) + "," +
                (f.fit.identically_zero ? "true" : "false") + "," + (f.lower_bound ? ">=" : "<") + "," +
                format_number(f.threshold) + "," + (f.passed ? "true" : "false") + "\n";
        Json j = to_json(f.fit);
        j["quantity"] = f.quantity;
        jfits.push_back(j);
        checks.push_back({"slope " + f.quantity, f.passed, f.fit.slope, f.threshold, f.lower_bound ? ">=" : "<",
                          f.fit.identically_zero ? "identically zero" : "r2 = " + format_number(f.fit.r2)});
    }
    out.text("scaling_fits.csv", fits);
    summary["fits"] = jfits;

    Json runs = Json::array();
    double drift = 0.0, tail = 0.0;
    for (const auto* group : {&report.curve_runs, &report.base_runs})
        for (const auto& run : *group) {
            runs.push_back({{"frame", group == &report.curve_runs ? "curve" : "base"},
                            {"hbar", run.hbar},
                            {"cutoff", run.cutoff},
                            {"tail_mass_max", run.tail_mass_max},
                            {"norm_drift_max", run.norm_drift_max}});
            drift = std::max(drift, run.norm_drift_max);
            tail = std::max(tail, run.tail_mass_max);
        }
    summary["runs"] = runs;
    add_guard_checks(config, drift, tail, checks);

    std::vector<PlotSeries> plot;
    for (const auto& f : report.fits) {
        PlotSeries p{f.quantity, f.fit.hbar_grid, {}};
        for (double v : f.fit.values) p.y.push_back(std::abs(v));
        plot.push_back(std::move(p));
    }
    out.plot("scaling.svg", {"hbar scaling", "hbar", "|value|", true, true}, plot);
}

}  // namespace

RunManifest run(const ExperimentConfig& config, const RunOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    RunManifest manifest;
    manifest.name = config.name;
    manifest.experiment = std::string(to_string(config.experiment));
    manifest.config_hash = content_hash(config.source_text);
    manifest.version = kVersion;
    manifest.eigen_version = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                             std::to_string(EIGEN_MINOR_VERSION);
    manifest.compiler = __VERSION__;

    RunOptions opts = options;
    opts.plots = options.plots && config.output.plots;
    Outputs out{opts, manifest};
    Json summary{{"name", config.name}, {"experiment", manifest.experiment}, {"config_hash", manifest.config_hash}};

    switch (config.experiment) {
    case ExperimentKind::Evolution: run_evolution_experiment(config, opts, out, manifest.checks, summary); break;
    case ExperimentKind::OscillatorDemo: run_oscillator_demo(config, out, manifest.checks, summary); break;
    case ExperimentKind::CoherentCheck: run_coherent_check(config, out, manifest.checks, summary); break;
    case ExperimentKind::TheoremSweep: run_theorem_sweep(config, opts, out, manifest.checks, summary); break;
    }

    Json jchecks = Json::array();
    for (const auto& c : manifest.checks) jchecks.push_back(to_json(c));
    summary["checks"] = jchecks;
    summary["all_passed"] = manifest.all_passed();
    out.text("summary.json", summary.dump(2) + "\n");

    manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Json jm{{"name", manifest.name},
            {"experiment", manifest.experiment},
            {"config_hash", manifest.config_hash},
            {"versions", {{"psqm", manifest.version}, {"eigen", manifest.eigen_version}, {"compiler", manifest.compiler}}},
            {"wall_seconds", manifest.wall_seconds},
            {"checks", jchecks},
            {"all_passed", manifest.all_passed()}};
    Json arts = Json::array();
    for (const auto& a : manifest.artifacts) arts.push_back(a.filename().string());
    arts.push_back("manifest.json");
    jm["artifacts"] = arts;
    out.text("manifest.json", jm.dump(2) + "\n");
    return manifest;
}

}  // namespace psqm
