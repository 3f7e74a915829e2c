#include "psqm/dynamics.hpp"

#include "psqm/errors.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <string>

namespace psqm {

TimeGrid::TimeGrid(double t0, double t1, std::size_t steps) : t0_(t0), t1_(t1), steps_(steps) {
    if (!(t1 > t0)) throw DomainError("TimeGrid: t1 must exceed t0");
    if (steps == 0) throw DomainError("TimeGrid: need at least one step");
}

TimeGrid TimeGrid::from_step(double t0, double t1, double dt) {
    if (!(dt > 0.0)) throw DomainError("TimeGrid: dt must be positive");
    if (!(t1 > t0)) throw DomainError("TimeGrid: t1 must exceed t0");
    const double n = std::round((t1 - t0) / dt);
    return {t0, t1, static_cast<std::size_t>(std::max(1.0, n))};
}

double TimeGrid::time(std::size_t i) const {
    if (i > steps_) throw DomainError("TimeGrid::time: index past end");
    if (i == steps_) return t1_;
    return t0_ + static_cast<double>(i) * dt();
}

bool Trajectory::is_constant() const {
    for (std::size_t i = 1; i < points.size(); ++i)
        if (!(points[i] == points.front())) return false;
    return true;
}

CurveSpec CurveSpec::sampled(std::vector<PhasePoint> points) {
    if (points.empty()) throw DomainError("CurveSpec::sampled: no points");
    PhasePoint start = points.front();
    return {Kind::Sampled, std::move(start), std::move(points)};
}

namespace {

// NaN-propagating, so a diverging iteration never looks converged.
double max_abs(const PhasePoint& x) {
    double m = 0.0;
    for (double c : x.coords()) {
        if (std::isnan(c)) return c;
        m = std::max(m, std::abs(c));
    }
    return m;
}

}  // namespace

Trajectory integrate_hamilton(const PhasePolynomial& H, const PhasePoint& start, const TimeGrid& grid) {
    if (start.size() != 2 * static_cast<std::size_t>(H.modes()))
        throw DimensionError("integrate_hamilton: start point dimension mismatch");
    const double dt = grid.dt();
    Trajectory traj;
    traj.times.reserve(grid.steps() + 1);
    traj.points.reserve(grid.steps() + 1);
    traj.times.push_back(grid.time(0));
    traj.points.push_back(start);

    PhasePoint c = start;
    for (std::size_t n = 0; n < grid.steps(); ++n) {
        PhasePoint next = c + dt * hamiltonian_vector_field(H, c);
        bool converged = false;
        for (int it = 0; it < 50; ++it) {
            const PhasePoint mid = 0.5 * (c + next);
            const PhasePoint update = c + dt * hamiltonian_vector_field(H, mid);
            const double change = max_abs(update - next);
            next = update;
            if (!std::isfinite(change)) break;
            if (change <= 1e-13 * std::max(1.0, max_abs(next))) {
                converged = true;
                break;
            }
        }
        // A converged iterate still carries about 1e-13 of solve error, which the
        // chord velocity (c_{n+1} - c_n)/dt amplifies; polish to round-off.
        for (int it = 0; converged && it < 3; ++it) {
            const PhasePoint update = c + dt * hamiltonian_vector_field(H, 0.5 * (c + next));
            const double change = max_abs(update - next);
            next = update;
            if (change == 0.0) break;
        }
        if (!converged)
            throw SolverError("integrate_hamilton: implicit midpoint did not converge in 50 iterations at step " +
                              std::to_string(n));
        c = next;
        traj.times.push_back(grid.time(n + 1));
        traj.points.push_back(c);
    }
    traj.velocities.reserve(traj.points.size());
    for (const auto& x : traj.points) traj.velocities.push_back(hamiltonian_vector_field(H, x));
    return traj;
}

std::vector<TangentVector> finite_difference_velocities(const std::vector<PhasePoint>& points, double dt) {
    const std::size_t n = points.size();
    if (n < 3) throw DomainError("finite_difference_velocities: need at least 3 samples");
    std::vector<TangentVector> v;
    v.reserve(n);
    v.push_back((-3.0 * points[0] + 4.0 * points[1] - points[2]) * (1.0 / (2.0 * dt)));
    for (std::size_t i = 1; i + 1 < n; ++i) v.push_back((points[i + 1] - points[i - 1]) * (1.0 / (2.0 * dt)));
    v.push_back((3.0 * points[n - 1] - 4.0 * points[n - 2] + points[n - 3]) * (1.0 / (2.0 * dt)));
    return v;
}

Trajectory build_trajectory(const CurveSpec& spec, const PhasePolynomial& H, const TimeGrid& grid) {
    switch (spec.kind) {
    case CurveSpec::Kind::Hamiltonian:
        return integrate_hamilton(H, spec.start, grid);
    case CurveSpec::Kind::Constant: {
        Trajectory t;
        for (std::size_t i = 0; i <= grid.steps(); ++i) {
            t.times.push_back(grid.time(i));
            t.points.push_back(spec.start);
            t.velocities.push_back(PhasePoint::zero(spec.start.modes()));
        }
        return t;
    }
    case CurveSpec::Kind::Sampled: {
        if (spec.samples.size() != grid.steps() + 1)
            throw DimensionError("build_trajectory: " + std::to_string(spec.samples.size()) +
                                 " samples for a grid of " + std::to_string(grid.steps() + 1) + " times");
        Trajectory t;
        for (std::size_t i = 0; i <= grid.steps(); ++i) t.times.push_back(grid.time(i));
        t.points = spec.samples;
        t.velocities = finite_difference_velocities(t.points, grid.dt());
        return t;
    }
    }
    throw DomainError("build_trajectory: unknown curve kind");
}

OperatorMatrix modified_hamiltonian(const PhasePolynomial& H, const PhasePoint& c, const TangentVector& c_dot,
                                    const ConnectionForm& A, const Quantizer& quantizer) {
    require_same_basis(A.basis(), quantizer.basis(), "modified_hamiltonian");
    const double hbar = A.basis().hbar();
    return quantizer.quantize(H, c) - A.apply(c, c_dot) * Complex(0.0, hbar);
}

namespace {

struct CayleyStep {
    Eigen::PartialPivLU<Matrix> lu;
    Matrix minus;  // I - i (K - E) dt / 2 hbar
    Matrix plus;   // I + i (K - E) dt / 2 hbar
    double energy;
};

CayleyStep make_step(const OperatorMatrix& K, double energy, double dt) {
    const double hbar = K.basis().hbar();
    const auto d = static_cast<Eigen::Index>(K.dim());
    Matrix shifted = K.entries();
    shifted.diagonal().array() -= energy;
    const Matrix half = Complex(0.0, dt / (2.0 * hbar)) * shifted;
    const Matrix id = Matrix::Identity(d, d);
    CayleyStep s{Eigen::PartialPivLU<Matrix>(), id - half, id + half, energy};
    s.lu.compute(s.plus);
    return s;
}

double state_energy(const OperatorMatrix& K, const Vector& psi) {
    return psi.dot(K.entries() * psi).real() / psi.squaredNorm();
}

void check_residual(const Matrix& plus, const Vector& x, const Vector& rhs, double tol, std::size_t step) {
    const double scale = std::max(rhs.norm(), 1e-300);
    const double res = (plus * x - rhs).norm() / scale;
    if (!(res <= tol))
        throw SolverError("evolve: Cayley linear solve residual " + std::to_string(res) + " at step " +
                          std::to_string(step));
}

}  // namespace

EvolutionResult evolve(const StateVector& psi0, const Trajectory& trajectory, const PhasePolynomial& H,
                       const ConnectionForm& A, const Quantizer& quantizer, const EvolveOptions& options) {
    require_same_basis(psi0.basis(), A.basis(), "evolve");
    require_same_basis(psi0.basis(), quantizer.basis(), "evolve");
    if (trajectory.size() < 2) throw DomainError("evolve: trajectory needs at least two points");
    const double n0 = psi0.norm();
    if (std::abs(n0 - 1.0) > 1e-10) throw NormalizationError("evolve: initial state not normalized");
    const std::size_t stride = std::max<std::size_t>(1, options.record_stride);
    const BasisConfig& basis = psi0.basis();
    const double hbar = basis.hbar();
    const int modes = basis.modes();

    EvolutionResult result;
    result.trajectory = trajectory;
    result.states.push_back(psi0);
    result.state_steps.push_back(0);
    result.tail_mass_max = psi0.tail_mass();
    check_tail_mass(psi0, options.tail_mass_limit, "evolve (initial state)");

    const bool constant = trajectory.is_constant();
    std::optional<CayleyStep> fixed;
    Matrix fixed_propagator;
    double fixed_dt = 0.0;
    Vector psi = psi0.entries();
    const std::size_t steps = trajectory.size() - 1;

    for (std::size_t n = 0; n < steps; ++n) {
        const double dt = trajectory.times[n + 1] - trajectory.times[n];
        if (!(dt > 0.0)) throw DomainError("evolve: trajectory times must increase");
        Vector next;
        double energy = 0.0;
        if (constant) {
            if (!fixed || std::abs(dt - fixed_dt) > 1e-12 * dt) {
                fixed_dt = dt;
                const OperatorMatrix K = modified_hamiltonian(H, trajectory.points.front(), PhasePoint::zero(modes),
                                                              A, quantizer);
                fixed = make_step(K, state_energy(K, psi), dt);
                fixed_propagator = fixed->lu.solve(fixed->minus);
                const double res = (fixed->plus * fixed_propagator - fixed->minus).norm() /
                                   std::max(fixed->minus.norm(), 1e-300);
                if (!(res <= options.solver_tolerance))
                    throw SolverError("evolve: Cayley propagator residual " + std::to_string(res));
            }
            next = fixed_propagator * psi;
            energy = fixed->energy;
        } else {
            const PhasePoint mid = 0.5 * (trajectory.points[n] + trajectory.points[n + 1]);
            const TangentVector vel = (trajectory.points[n + 1] - trajectory.points[n]) * (1.0 / dt);
            const OperatorMatrix K = modified_hamiltonian(H, mid, vel, A, quantizer);
            const CayleyStep step = make_step(K, state_energy(K, psi), dt);
            const Vector rhs = step.minus * psi;
            next = step.lu.solve(rhs);
            check_residual(step.plus, next, rhs, options.solver_tolerance, n);
            energy = step.energy;
        }
        psi = std::exp(Complex(0.0, -energy * dt / hbar)) * next;

        StateVector current(basis, psi);
        const double tail = current.tail_mass();
        result.tail_mass_max = std::max(result.tail_mass_max, tail);
        if (tail > options.tail_mass_limit) {
            throw TruncationError("evolve: tail mass " + std::to_string(tail) + " exceeds " +
                                      std::to_string(options.tail_mass_limit) + " at t = " +
                                      std::to_string(trajectory.times[n + 1]) + " (cutoff " +
                                      std::to_string(basis.cutoff()) + ")",
                                  tail);
        }
        result.norm_drift_max = std::max(result.norm_drift_max, std::abs(psi.norm() - n0));
        if ((n + 1) % stride == 0 || n + 1 == steps) {
            result.states.push_back(std::move(current));
            result.state_steps.push_back(n + 1);
        }
    }
    return result;
}

EvolutionResult evolve(const StateVector& psi0, const CurveSpec& spec, const PhasePolynomial& H,
                       const SymplecticPotential& theta, const TimeGrid& grid, const EvolveOptions& options) {
    const CanonicalOps ops = build_canonical_ops(psi0.basis());
    const Quantizer quantizer(ops, std::span<const PhasePolynomial>(&H, 1));
    const ConnectionForm A(theta, ops);
    return evolve(psi0, build_trajectory(spec, H, grid), H, A, quantizer, options);
}

}  // namespace psqm
