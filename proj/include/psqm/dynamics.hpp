#pragma once

// Classical trajectories and Schroedinger evolution over a curve.
//
// Over a curve c the state phi(t) lives in the fiber at c(t) and obeys
//   i hbar d phi/dt = (rho(H)_{c(t)} - i hbar A_{c(t)}(c'(t))) phi.
// A constant curve reduces this to the ordinary equation with rho(H)_xi.

#include "psqm/core_algebra.hpp"
#include "psqm/observables.hpp"
#include "psqm/transport.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace psqm {

/// Uniform grid t0 = t_0 < ... < t_steps = t1.
class TimeGrid {
public:
    TimeGrid(double t0, double t1, std::size_t steps);
    /// steps = round((t1 - t0) / dt); the step is then adjusted to land on t1.
    static TimeGrid from_step(double t0, double t1, double dt);

    double t0() const noexcept { return t0_; }
    double t1() const noexcept { return t1_; }
    std::size_t steps() const noexcept { return steps_; }
    double dt() const noexcept { return (t1_ - t0_) / static_cast<double>(steps_); }
    double time(std::size_t i) const;

private:
    double t0_;
    double t1_;
    std::size_t steps_;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<PhasePoint> points;
    std::vector<TangentVector> velocities;

    std::size_t size() const noexcept { return times.size(); }
    bool is_constant() const;
};

struct CurveSpec {
    enum class Kind { Constant, Hamiltonian, Sampled };

    Kind kind = Kind::Constant;
    PhasePoint start;
    /// Kind::Sampled only: one point per grid time.
    std::vector<PhasePoint> samples;

    static CurveSpec constant_at(PhasePoint xi) { return {Kind::Constant, std::move(xi), {}}; }
    static CurveSpec hamiltonian_from(PhasePoint xi) { return {Kind::Hamiltonian, std::move(xi), {}}; }
    static CurveSpec sampled(std::vector<PhasePoint> points);
};

/// Implicit-midpoint integration of dc/dt = omega^{mu nu} d_nu H(c). Each step
/// solves the midpoint equation by fixed-point iteration to a residual of
/// 1e-13 (relative to max(1, |c|)); more than 50 iterations is a SolverError.
Trajectory integrate_hamilton(const PhasePolynomial& H, const PhasePoint& start, const TimeGrid& grid);

/// Central differences inside, one-sided second order at both ends.
std::vector<TangentVector> finite_difference_velocities(const std::vector<PhasePoint>& points, double dt);

Trajectory build_trajectory(const CurveSpec& spec, const PhasePolynomial& H, const TimeGrid& grid);

/// rho(H)_c - i hbar A_c(c'). Hermitian.
OperatorMatrix modified_hamiltonian(const PhasePolynomial& H, const PhasePoint& c, const TangentVector& c_dot,
                                    const ConnectionForm& A, const Quantizer& quantizer);

struct EvolveOptions {
    /// Record every k-th state; the final state is always recorded.
    std::size_t record_stride = 1;
    double tail_mass_limit = kDefaultTailMassLimit;
    double solver_tolerance = 1e-12;
};

struct EvolutionResult {
    std::vector<StateVector> states;
    /// Grid index of each recorded state.
    std::vector<std::size_t> state_steps;
    Trajectory trajectory;
    double tail_mass_max = 0.0;
    double norm_drift_max = 0.0;

    const StateVector& final_state() const { return states.back(); }
    double time_of(std::size_t record) const { return trajectory.times[state_steps[record]]; }
};

/// Cayley propagation, one step per grid interval, with the modified
/// Hamiltonian evaluated at the chord midpoint (c_n + c_{n+1})/2 and the chord
/// velocity (c_{n+1} - c_n)/dt. For the implicit-midpoint trajectory that
/// chord velocity is exactly the Hamiltonian vector field at the midpoint.
///
/// Each step propagates K - E with E = <psi_n, K psi_n> by
/// (1 + i(K-E)dt/2hbar)^{-1} (1 - i(K-E)dt/2hbar) and multiplies by
/// exp(-i E dt / hbar); the step stays exactly unitary and second order.
EvolutionResult evolve(const StateVector& psi0, const Trajectory& trajectory, const PhasePolynomial& H,
                       const ConnectionForm& A, const Quantizer& quantizer, const EvolveOptions& options = {});

EvolutionResult evolve(const StateVector& psi0, const CurveSpec& spec, const PhasePolynomial& H,
                       const SymplecticPotential& theta, const TimeGrid& grid, const EvolveOptions& options = {});

}  // namespace psqm
