#include "helpers.hpp"

#include "psqm/dynamics.hpp"
#include "psqm/errors.hpp"

#include <doctest.h>

#include <numbers>

using namespace psqm;
using psqm::testing::max_abs;

namespace {

PhasePolynomial quartic() {
    return PhasePolynomial::monomial(MultiIndex{0, 2}, 0.5) + PhasePolynomial::monomial(MultiIndex{4, 0}, 0.25);
}

double energy_drift(const PhasePolynomial& H, const Trajectory& t) {
    const double e0 = eval(H, t.points.front());
    double worst = 0.0;
    for (const auto& c : t.points) worst = std::max(worst, std::abs(eval(H, c) - e0));
    return worst;
}

/// exp(-i K t / hbar) psi by eigendecomposition.
Vector exact_propagate(const OperatorMatrix& K, const Vector& psi, double t) {
    const Eigen::SelfAdjointEigenSolver<Matrix> es(K.entries());
    const Vector phases = (es.eigenvalues().cast<Complex>() * Complex(0.0, -t / K.basis().hbar())).array().exp();
    return es.eigenvectors() * phases.asDiagonal() * (es.eigenvectors().adjoint() * psi);
}

}  // namespace

TEST_CASE("time grids") {
    const auto g = TimeGrid::from_step(0.0, 1.0, 0.3);
    CHECK(g.steps() == 3);
    CHECK(g.dt() == doctest::Approx(1.0 / 3.0));
    CHECK(g.time(0) == 0.0);
    CHECK(g.time(3) == 1.0);
    CHECK(TimeGrid::from_step(0.0, 2.0 * std::numbers::pi, 1e-3).steps() == 6283);
    CHECK_THROWS_AS(TimeGrid::from_step(0.0, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(TimeGrid(1.0, 0.0, 10), DomainError);
    CHECK_THROWS_AS(g.time(4), DomainError);
}

TEST_CASE("oscillator trajectory") {
    const auto H = PhasePolynomial::harmonic_oscillator(1);
    const auto t = integrate_hamilton(H, PhasePoint{1.0, 0.0}, TimeGrid::from_step(0.0, std::numbers::pi / 2, 1e-3));
    CHECK(std::abs(t.points.back()[0]) < 1e-6);
    CHECK(std::abs(t.points.back()[1] + 1.0) < 1e-6);
    CHECK(t.size() == t.velocities.size());
    for (std::size_t i = 0; i < t.size(); i += 100) {
        CHECK(t.velocities[i][0] == t.points[i][1]);
        CHECK(t.velocities[i][1] == -t.points[i][0]);
    }
}

TEST_CASE("implicit midpoint conserves the oscillator energy without drift") {
    const auto H = PhasePolynomial::harmonic_oscillator(1);
    const auto t = integrate_hamilton(H, PhasePoint{0.6, -1.2}, TimeGrid::from_step(0.0, 100.0, 1e-2));
    CHECK(energy_drift(H, t) < 1e-12);
}

TEST_CASE("constant Hamiltonian leaves the point fixed") {
    const auto t = integrate_hamilton(PhasePolynomial::constant(1, 2.0), PhasePoint{0.3, 0.7}, TimeGrid(0.0, 1.0, 50));
    for (const auto& c : t.points) CHECK(c == PhasePoint{0.3, 0.7});
    CHECK(t.is_constant());
}

TEST_CASE("quartic energy error is second order in dt") {
    // The implicit midpoint energy error oscillates with amplitude about
    // dt^2/24 here (4.2e-8 at dt = 1e-3), so the bound is 5e-8.
    const auto H = quartic();
    const double d1 = energy_drift(H, integrate_hamilton(H, PhasePoint{1.0, 0.0}, TimeGrid::from_step(0.0, 10.0, 1e-3)));
    const double d2 = energy_drift(H, integrate_hamilton(H, PhasePoint{1.0, 0.0}, TimeGrid::from_step(0.0, 10.0, 2e-3)));
    CHECK(d1 < 5e-8);
    CHECK(d2 / d1 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("implicit midpoint reports non-convergence") {
    CHECK_THROWS_AS(integrate_hamilton(quartic(), PhasePoint{10.0, 0.0}, TimeGrid(0.0, 10.0, 10)), SolverError);
}

TEST_CASE("finite-difference velocities") {
    std::vector<PhasePoint> pts;
    const double dt = 0.1;
    for (int i = 0; i <= 10; ++i) {
        const double t = i * dt;
        pts.push_back(PhasePoint{t * t, 3.0 * t - 1.0});
    }
    const auto v = finite_difference_velocities(pts, dt);
    for (int i = 0; i <= 10; ++i) {
        CHECK(v[i][0] == doctest::Approx(2.0 * i * dt));
        CHECK(v[i][1] == doctest::Approx(3.0));
    }
    CHECK_THROWS_AS(finite_difference_velocities({pts[0], pts[1]}, dt), DomainError);
    CHECK_THROWS_AS(build_trajectory(CurveSpec::sampled(pts), quartic(), TimeGrid(0.0, 1.0, 5)), DimensionError);
    const auto c = build_trajectory(CurveSpec::constant_at(PhasePoint{1.0, 2.0}), quartic(), TimeGrid(0.0, 1.0, 5));
    for (const auto& x : c.velocities) CHECK(x == PhasePoint{0.0, 0.0});
}

TEST_CASE("modified Hamiltonian") {
    const BasisConfig basis(1, 24, 0.4);
    const auto ops = build_canonical_ops(basis);
    const Quantizer quantizer(ops, 4);
    const ConnectionForm A(SymplecticPotential::standard(1), ops);

    SUBCASE("oscillator over its curve is the plain oscillator") {
        const auto H = PhasePolynomial::harmonic_oscillator(1);
        const Matrix target = 0.5 * (ops.q(0).entries() * ops.q(0).entries() + ops.p(0).entries() * ops.p(0).entries());
        const auto t = integrate_hamilton(H, PhasePoint{1.0, 0.5}, TimeGrid(0.0, 3.0, 300));
        for (std::size_t i = 0; i < t.size(); i += 37) {
            const auto K = modified_hamiltonian(H, t.points[i], t.velocities[i], A, quantizer);
            CHECK(max_abs(K.entries() - target) < 1e-12);
        }
    }
    SUBCASE("constant curve gives rho(H)") {
        const auto H = quartic();
        const PhasePoint c{0.3, -0.2};
        const auto K = modified_hamiltonian(H, c, PhasePoint{0.0, 0.0}, A, quantizer);
        CHECK(max_abs(K.entries() - quantizer.quantize(H, c).entries()) == 0.0);
    }
    SUBCASE("linear coefficients vanish on the Hamiltonian curve and not on a wrong one") {
        const auto H = quartic();
        const auto omega = SymplecticForm::standard(1);
        const PhasePoint c{0.8, 0.3};
        const PhasePoint v = hamiltonian_vector_field(H, c);
        auto linear = [&](const PhasePoint& vel) {
            const auto coeffs = taylor_coefficients(H, c);
            Eigen::Vector2d out;
            for (int a = 0; a < 2; ++a) {
                const auto it = coeffs.find(MultiIndex::unit(1, a));
                out(a) = (it == coeffs.end() ? 0.0 : it->second) - (omega.lower()(a, 0) * vel[0] + omega.lower()(a, 1) * vel[1]);
            }
            return out;
        };
        CHECK(linear(v).cwiseAbs().maxCoeff() < 1e-12);
        const Eigen::Vector2d wrong = linear(1.5 * v);
        const Eigen::Vector2d expected = -0.5 * omega.lower() * Eigen::Vector2d(v[0], v[1]);
        CHECK((wrong - expected).cwiseAbs().maxCoeff() < 1e-12);

        // The matrix difference between the two velocities is that linear term.
        const Matrix diff = modified_hamiltonian(H, c, 1.5 * v, A, quantizer).entries() -
                            modified_hamiltonian(H, c, v, A, quantizer).entries();
        const Matrix from_coeffs = (-0.5 * SymplecticPotential::standard(1).evaluate(c, v)) * Matrix::Identity(24, 24) +
                                   expected(0) * ops.q(0).entries() + expected(1) * ops.p(0).entries();
        CHECK(max_abs(diff - from_coeffs) < 1e-12);
        CHECK(modified_hamiltonian(H, c, 1.5 * v, A, quantizer).hermiticity_defect() < 1e-12);
    }
}

TEST_CASE("oscillator ground state over its curve only picks up a phase") {
    const BasisConfig basis(1, 64, 1.0);
    const auto H = PhasePolynomial::harmonic_oscillator(1);
    const auto grid = TimeGrid::from_step(0.0, 2.0 * std::numbers::pi, 1e-3);
    EvolveOptions opts;
    opts.record_stride = 50;
    const auto res = evolve(StateVector::fock(basis, 0), CurveSpec::hamiltonian_from(PhasePoint{1.0, 0.0}), H,
                            SymplecticPotential::standard(1), grid, opts);
    double worst_overlap = 0.0, worst_phase = 0.0;
    for (std::size_t r = 0; r < res.states.size(); ++r) {
        const Complex z = res.states[r][0];
        const double t = res.time_of(r);
        worst_overlap = std::max(worst_overlap, std::abs(std::abs(z) - 1.0));
        worst_phase = std::max(worst_phase, std::abs(std::arg(z * std::exp(Complex(0.0, t / 2.0)))));
    }
    CHECK(worst_overlap < 1e-8);
    CHECK(worst_phase < 1e-6);
    CHECK(res.norm_drift_max < 1e-8);
    CHECK(res.states.back().basis() == basis);
    CHECK(res.state_steps.back() == grid.steps());
}

TEST_CASE("zero Hamiltonian leaves the state unchanged") {
    const BasisConfig basis(1, 10, 1.0);
    Vector v = Vector::Zero(10);
    v(0) = Complex(0.6, 0.0);
    v(3) = Complex(0.0, 0.8);
    const StateVector psi(basis, v);
    const auto res = evolve(psi, CurveSpec::constant_at(PhasePoint{0.0, 0.0}), PhasePolynomial(1),
                            SymplecticPotential::standard(1), TimeGrid(0.0, 1.0, 100));
    CHECK((res.final_state().entries() - v).norm() == 0.0);
}

TEST_CASE("fixed-base evolution matches eigendecomposition propagation") {
    SUBCASE("first excited oscillator state") {
        const BasisConfig basis(1, 16, 1.0);
        const auto res = evolve(StateVector::fock(basis, 1), CurveSpec::constant_at(PhasePoint{0.0, 0.0}),
                                PhasePolynomial::harmonic_oscillator(1), SymplecticPotential::standard(1),
                                TimeGrid::from_step(0.0, 1.0, 1e-3));
        CHECK(std::abs(res.final_state()[1] - std::exp(Complex(0.0, -1.5))) < 1e-12);
    }
    SUBCASE("superposition under the quartic Hamiltonian") {
        const BasisConfig basis(1, 48, 0.1);
        const auto ops = build_canonical_ops(basis);
        const Quantizer quantizer(ops, 4);
        Vector v = Vector::Zero(48);
        v(0) = 1.0 / std::sqrt(2.0);
        v(1) = Complex(0.0, 1.0 / std::sqrt(2.0));
        const StateVector psi(basis, v);
        const auto res = evolve(psi, CurveSpec::constant_at(PhasePoint{0.0, 0.0}), quartic(),
                                SymplecticPotential::standard(1), TimeGrid::from_step(0.0, 1.0, 5e-4));
        const Vector exact = exact_propagate(quantizer.quantize(quartic(), PhasePoint{0.0, 0.0}), v, 1.0);
        CHECK((res.final_state().entries() - exact).norm() < 1e-7);
    }
}

TEST_CASE("norm is conserved over many steps") {
    const BasisConfig basis(1, 64, 0.05);
    const auto res = evolve(StateVector::fock(basis, 0), CurveSpec::hamiltonian_from(PhasePoint{1.0, 0.0}), quartic(),
                            SymplecticPotential::standard(1), TimeGrid(0.0, 2.0, 10000));
    CHECK(res.norm_drift_max < 1e-8);
    CHECK(res.states.size() == 10001);
}

TEST_CASE("over-curve and fixed-base evolutions are related by transport") {
    const BasisConfig basis(1, 64, 0.2);
    const auto ops = build_canonical_ops(basis);
    const auto H = quartic();
    const Quantizer quantizer(ops, std::span<const PhasePolynomial>(&H, 1));
    const ConnectionForm A(SymplecticPotential::standard(1), ops);
    const TimeGrid grid = TimeGrid::from_step(0.0, 0.5, 1e-3);
    std::vector<PhasePoint> samples;
    for (std::size_t i = 0; i <= grid.steps(); ++i) {
        const double t = grid.time(i);
        samples.push_back(PhasePoint{0.2 + 0.3 * std::sin(1.1 * t), -0.1 + 0.2 * t * t});
    }
    const PhasePoint base{0.0, 0.0};
    const auto curve = evolve(StateVector::fock(basis, 0), build_trajectory(CurveSpec::sampled(samples), H, grid), H, A,
                              quantizer);
    const auto start = equivalence_map(StateVector::fock(basis, 0), samples.front(), base, ops);
    const auto fixed = evolve(start, build_trajectory(CurveSpec::constant_at(base), H, grid), H, A, quantizer);
    const auto mapped = equivalence_map(curve.final_state(), samples.back(), base, ops);
    CHECK((mapped.entries() - fixed.final_state().entries()).norm() < 1e-6);
}

TEST_CASE("evolution guards") {
    const BasisConfig basis(1, 12, 1.0);
    Vector v = Vector::Zero(12);
    v(0) = 2.0;
    CHECK_THROWS_AS(evolve(StateVector(basis, v), CurveSpec::constant_at(PhasePoint{0.0, 0.0}), quartic(),
                           SymplecticPotential::standard(1), TimeGrid(0.0, 1.0, 10)),
                    NormalizationError);
    // A wide quartic well at a small cutoff leaks into the top levels.
    CHECK_THROWS_AS(evolve(StateVector::fock(basis, 0), CurveSpec::constant_at(PhasePoint{2.0, 0.0}), quartic(),
                           SymplecticPotential::standard(1), TimeGrid(0.0, 2.0, 200)),
                    TruncationError);
}
