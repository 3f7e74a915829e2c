#pragma once

// Config-driven experiments. Each entry point returns a plain report; run()
// adds file output and the pass/fail checks embedded in the config.

#include "psqm/config.hpp"
#include "psqm/diagnostics.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace psqm {

inline constexpr const char* kVersion = "0.1.0";

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    /// "<", "<=", ">=" or ">" as applied to value against threshold.
    std::string comparison;
    std::string detail;
};

struct RunOptions {
    std::filesystem::path out_dir;
    int jobs = 1;
    bool plots = true;
};

struct RunManifest {
    std::string name;
    std::string experiment;
    std::string config_hash;
    std::string version;
    std::string eigen_version;
    std::string compiler;
    double wall_seconds = 0.0;
    std::vector<CheckResult> checks;
    std::vector<std::filesystem::path> artifacts;

    bool all_passed() const;
};

/// Expectation of every named observable and every moment of the requested
/// orders at each recorded time, for one hbar.
struct EvolutionSeries {
    double hbar = 0.0;
    std::vector<double> times;
    std::vector<PhasePoint> curve;
    /// [record][observable]
    std::vector<std::vector<double>> observables;
    /// [record][moment]
    std::vector<std::vector<Complex>> moments;
    std::vector<std::string> moment_labels;
    double tail_mass_max = 0.0;
    double norm_drift_max = 0.0;
};

EvolutionSeries run_evolution(const ExperimentConfig& config, double hbar, std::size_t record_every);
EvolutionSeries run_evolution(const ExperimentConfig& config, double hbar, const TimeGrid& grid, std::size_t record_every);

/// max|X(dt) - X(dt/2)| / max|X(dt/2) - X(dt/4)| over the coarse record times,
/// with X the observables (or the moments when there are none).
double richardson_ratio(const ExperimentConfig& config, double hbar);

struct OscillatorDemoReport {
    /// max over trajectory points of max |K - (q^2 + p^2)/2| entrywise, with
    /// K assembled from c(t) and the Hamiltonian vector field c'(t).
    double reduction_error = 0.0;
    /// The same at the chord midpoints the propagator uses. The chord velocity
    /// divides round-off by dt, so this sits near 1e-12 rather than 1e-15.
    double chord_reduction_error = 0.0;
    /// max over all grid times of |<q^j> - c^q_j(t) closed form|.
    double center_of_mass_error = 0.0;
    EvolutionSeries series;
};

OscillatorDemoReport oscillator_demo(const ExperimentConfig& config);

struct CoherentSample {
    Complex z;
    double t = 0.0;
    double fidelity = 0.0;
    /// arg <closed form, computed>.
    double phase = 0.0;
};

struct CoherentReport {
    double hbar = 0.0;
    std::vector<CoherentSample> samples;
    double min_fidelity = 1.0;
    double max_phase_error = 0.0;
    /// max over z of (max_t fidelity - min_t fidelity).
    double fidelity_drift = 0.0;
};

/// Compares U(c(t), 0) phi(t) with exp(-it/2) D(z e^{-it} / sqrt(2 hbar)) |0>.
CoherentReport coherent_state_check(const ExperimentConfig& config);

struct SweepRun {
    double hbar = 0.0;
    int cutoff = 0;
    std::vector<double> times;
    /// [record][tuple] moments in the fiber the state lives in.
    std::vector<std::vector<Complex>> moments;
    /// Curve runs only: <q^j> - c^q_j(t) for each mode, per record.
    std::vector<std::vector<double>> center_error;
    double tail_mass_max = 0.0;
    double norm_drift_max = 0.0;
};

struct FitCheck {
    std::string quantity;
    ScalingFit fit;
    double threshold = 0.0;
    /// true: slope >= threshold; false: slope < threshold.
    bool lower_bound = true;
    bool passed = false;
};

struct TheoremSweepReport {
    std::vector<std::vector<int>> tuples;
    std::vector<std::string> labels;
    std::vector<SweepRun> curve_runs;  // decreasing hbar
    std::vector<SweepRun> base_runs;   // decreasing hbar
    std::vector<FitCheck> fits;
};

/// Cutoff for the fixed-base run: wide enough to hold |0> displaced by
/// |start - base| / sqrt(2 hbar) with negligible tail.
int fixed_base_cutoff(const ExperimentConfig& config, double hbar);

/// Over-curve evolution (moments of each order at the final time, plus the
/// center-of-mass error) and fixed-base evolution from matched initial data
/// (first moments at the final time), each fitted against hbar.
TheoremSweepReport theorem_sweep(const ExperimentConfig& config, int jobs = 1);

/// Runs the configured experiment, writes CSV/JSON/SVG/manifest into
/// options.out_dir and evaluates the embedded checks.
RunManifest run(const ExperimentConfig& config, const RunOptions& options);

}  // namespace psqm
