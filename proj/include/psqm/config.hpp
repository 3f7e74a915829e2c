#pragma once

// Experiment configuration: a versioned TOML schema. Everything is validated
// before any computation starts; unknown keys are rejected. See
// docs/config_schema.md for the full key reference.

#include "psqm/dynamics.hpp"
#include "psqm/observables.hpp"
#include "psqm/transport.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace psqm {

inline constexpr int kConfigSchemaVersion = 1;

enum class ExperimentKind { Evolution, OscillatorDemo, CoherentCheck, TheoremSweep };

std::string_view to_string(ExperimentKind kind);

struct NamedObservable {
    std::string name;
    PhasePolynomial polynomial;
};

struct InitialStateSpec {
    /// Per-mode Fock occupations; empty when explicit coefficients are given.
    std::vector<int> fock;
    std::vector<Complex> coefficients;
};

struct OutputSpec {
    std::size_t record_every = 10;
    std::vector<int> moment_orders{1, 2};
    bool plots = true;
};

/// Embedded pass/fail thresholds. Unset entries are not checked.
struct CheckSpec {
    std::optional<double> max_norm_drift;
    std::optional<double> max_tail_mass;
    bool richardson = false;
    double richardson_target = 4.0;
    double richardson_tolerance = 0.5;
    std::optional<double> reduction_tolerance;
    std::optional<double> center_of_mass_tolerance;
    std::optional<double> fidelity_tolerance;
    std::optional<double> phase_tolerance;
    std::optional<double> fidelity_drift_tolerance;
    std::optional<double> preservation_margin;
    std::optional<double> breakdown_max_slope;
    std::optional<double> center_error_min_slope;
};

struct CoherentSpec {
    /// z = c^q(0) + i c^p(0) per run.
    std::vector<Complex> z_values;
};

struct SweepSpec {
    std::vector<int> moment_orders{1, 2, 3, 4};
    PhasePoint fixed_base;
};

struct ExperimentConfig {
    int schema_version = kConfigSchemaVersion;
    std::string name;
    ExperimentKind experiment = ExperimentKind::Evolution;
    int modes = 1;
    int cutoff = 64;
    /// Single hbar or a sweep; sorted by decreasing value after validation.
    std::vector<double> hbar_grid;
    PhasePolynomial hamiltonian{1};
    std::vector<NamedObservable> observables;
    CurveSpec curve;
    InitialStateSpec initial_state;
    double t0 = 0.0;
    double t1 = 1.0;
    double dt = 1e-3;
    SymplecticPotential theta = SymplecticPotential::standard(1);
    OutputSpec output;
    CheckSpec checks;
    CoherentSpec coherent;
    SweepSpec sweep;
    /// Raw bytes the config was parsed from (hashed into the manifest).
    std::string source_text;

    TimeGrid grid() const { return TimeGrid::from_step(t0, t1, dt); }
    BasisConfig basis(double hbar) const { return {modes, cutoff, hbar}; }
    StateVector initial(const BasisConfig& basis) const;
};

/// Parses and validates; throws SchemaError with a path-qualified message.
ExperimentConfig parse_config(std::string_view toml_text, std::string_view source_name = "<string>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Directory holding the bundled example configs.
std::filesystem::path bundled_config_dir();

}  // namespace psqm
