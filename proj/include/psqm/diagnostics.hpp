#pragma once

// Moments, expectation values and hbar-scaling fits.
//
// A moment of order k is <phi, Sym(y^{mu_1} ... y^{mu_k}) phi> taken in the
// fiber the state lives in (the over-curve frame for states evolved along a
// curve). If the initial state respects the hbar-filtration these scale like
// hbar^{k/2}; scaling_fit measures the exponent over an hbar sweep.

#include "psqm/core_algebra.hpp"
#include "psqm/dynamics.hpp"
#include "psqm/observables.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace psqm {

/// Values below this magnitude count as numerically zero in scaling fits.
inline constexpr double kScalingFloor = 1e-13;

struct MomentReport {
    int order = 0;
    std::vector<int> indices;
    Complex value;
    double hbar = 0.0;
    double time = 0.0;
};

Complex moment(const StateVector& state, std::span<const int> indices, const CanonicalOps& ops);

/// Every ascending index tuple of the given order over 2n coordinates.
std::vector<std::vector<int>> moment_index_tuples(int modes, int order);

/// Moments for every ascending index tuple of the given order.
std::vector<MomentReport> moments_of_order(const StateVector& state, int order, const Quantizer& quantizer,
                                           double time);

/// Human-readable label such as "qqp" (n = 1) or "q1p2" (n > 1).
std::string moment_label(std::span<const int> indices, int modes);

/// <f> = <psi, rho(f)_xi psi> and its split into f(xi) plus the remainder.
struct ExpectationSplit {
    double total = 0.0;
    double classical = 0.0;
    double quantum = 0.0;
    double imag = 0.0;
};

ExpectationSplit observable_expectation(const StateVector& state, const PhasePolynomial& f, const PhasePoint& xi,
                                        const Quantizer& quantizer);

struct ScalingFit {
    std::vector<double> hbar_grid;
    std::vector<double> values;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t points_used = 0;
    /// Every value at or below the floor; slope is meaningless.
    bool identically_zero = false;
};

/// Least-squares slope of log|value| against log hbar. Needs at least four
/// positive hbar values spanning two decades.
ScalingFit scaling_fit(std::span<const double> hbar_grid, std::span<const double> values,
                       double floor = kScalingFloor);

/// d<y^mu>/dt under a fixed base point, assembled two ways.
struct MomentRate {
    /// (i/hbar) <[rho(H)_xi, y^mu]>.
    double from_commutator = 0.0;
    /// omega^{mu a} d_a H(xi) + omega^{mu a} d_a d_b H(xi) <y^b>.
    double leading_terms = 0.0;
};

MomentRate moment_rate(const StateVector& state, int mu, const PhasePolynomial& H, const PhasePoint& xi,
                       const Quantizer& quantizer);

struct ClassicalLimitSetup {
    PhasePolynomial hamiltonian;
    PhasePolynomial observable;
    PhasePoint start;
    /// Fock label of the hbar-independent initial state.
    int fock_level = 0;
    TimeGrid grid;
    std::vector<double> hbar_grid;
    int cutoff = 64;
    EvolveOptions evolve_options{};
};

struct ClassicalLimitSeries {
    double hbar = 0.0;
    std::vector<double> times;
    std::vector<double> quantum;    // <f>_{phi(t)}
    std::vector<double> classical;  // f(c(t))
    std::vector<double> error;      // quantum - classical
    double max_abs_error = 0.0;
    double max_imag = 0.0;
    double tail_mass_max = 0.0;
    double norm_drift_max = 0.0;
};

struct ClassicalLimitReport {
    std::vector<ClassicalLimitSeries> runs;  // sorted by decreasing hbar
    ScalingFit fit;                          // max_t |error| against hbar
};

/// Runs the Hamiltonian-curve evolution once per hbar (optionally on `jobs`
/// threads) and fits the scaling of the worst-case classical-limit error.
ClassicalLimitReport classical_limit_report(const ClassicalLimitSetup& setup, int jobs = 1);

}  // namespace psqm
