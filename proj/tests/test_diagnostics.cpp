#include "helpers.hpp"

#include "psqm/diagnostics.hpp"
#include "psqm/errors.hpp"
#include "psqm/transport.hpp"

#include <doctest.h>

using namespace psqm;

namespace {

PhasePolynomial quartic() {
    return PhasePolynomial::monomial(MultiIndex{0, 2}, 0.5) + PhasePolynomial::monomial(MultiIndex{4, 0}, 0.25);
}

const std::vector<double> kGrid{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};

}  // namespace

TEST_CASE("moments of the ground state") {
    const BasisConfig basis(1, 16, 0.2);
    const auto ops = build_canonical_ops(basis);
    const auto vac = StateVector::fock(basis, 0);
    const int q[] = {0};
    const int qq[] = {0, 0};
    CHECK(std::abs(moment(vac, q, ops)) == 0.0);
    CHECK(std::abs(moment(vac, qq, ops) - 0.1) < 1e-15);
    const int bad[] = {2};
    CHECK_THROWS_AS(moment(vac, bad, ops), DomainError);
}

TEST_CASE("displaced ground state has no first moment over its own base point") {
    const BasisConfig basis(1, 64, 0.5);
    const auto ops = build_canonical_ops(basis);
    const PhasePoint xi{0.8, -0.3};
    const auto chi = StateVector::fock(basis, 0);
    const auto at_xi = parallel_section_value(chi, xi, ops);
    const int q[] = {0};
    CHECK(std::abs(moment(at_xi, q, ops) + xi[0]) < 1e-12);
    const auto back = equivalence_map(at_xi, xi, PhasePoint{0.0, 0.0}, ops);
    CHECK(std::abs(moment(back, q, ops)) < 1e-12);
}

TEST_CASE("moment tuples and labels") {
    CHECK(moment_index_tuples(1, 2) == std::vector<std::vector<int>>{{0, 0}, {0, 1}, {1, 1}});
    CHECK(moment_index_tuples(1, 4).size() == 5);
    CHECK(moment_index_tuples(2, 2).size() == 10);
    const int a[] = {0, 0, 1};
    CHECK(moment_label(a, 1) == "qqp");
    const int b[] = {0, 3};
    CHECK(moment_label(b, 2) == "q1p2");

    const BasisConfig basis(1, 12, 0.3);
    const Quantizer quantizer(build_canonical_ops(basis), 3);
    const auto reports = moments_of_order(StateVector::fock(basis, 1), 2, quantizer, 0.5);
    REQUIRE(reports.size() == 3);
    CHECK(reports[0].value.real() == doctest::Approx(1.5 * 0.3));
    CHECK(reports[1].value.real() == doctest::Approx(0.0));
    CHECK(reports[2].time == 0.5);
    CHECK(reports[2].hbar == 0.3);
}

TEST_CASE("observable expectations split into classical and quantum parts") {
    const BasisConfig basis(1, 16, 0.4);
    const Quantizer quantizer(build_canonical_ops(basis), 4);
    const auto vac = StateVector::fock(basis, 0);
    const auto q = PhasePolynomial::coordinate(1, 0);

    CHECK(observable_expectation(vac, q, PhasePoint{0.7, 2.0}, quantizer).total == doctest::Approx(0.7));
    CHECK(observable_expectation(vac, PhasePolynomial::constant(1, -2.5), PhasePoint{0.1, 0.2}, quantizer).total ==
          doctest::Approx(-2.5));
    const auto split = observable_expectation(vac, q * q, PhasePoint{1.2, 0.0}, quantizer);
    CHECK(split.total == doctest::Approx(1.44 + 0.2));
    CHECK(split.classical == doctest::Approx(1.44));
    CHECK(split.quantum == doctest::Approx(0.2));

    std::mt19937 rng(31);
    Vector v = Vector::Zero(16);
    for (int i = 0; i < 4; ++i) v(i) = Complex(std::normal_distribution<double>()(rng), std::normal_distribution<double>()(rng));
    const StateVector s(basis, v / v.norm());
    for (int trial = 0; trial < 10; ++trial) {
        const auto f = psqm::testing::random_polynomial(rng, 1, 4, 5);
        const auto e = observable_expectation(s, f, psqm::testing::random_point(rng, 1, 1.0), quantizer);
        CHECK(std::abs(e.classical + e.quantum - e.total) < 1e-10);
        CHECK(std::abs(e.imag) < 1e-10);
    }
}

TEST_CASE("scaling fits") {
    std::vector<double> v;
    for (double h : kGrid) v.push_back(3.0 * h);
    const auto fit = scaling_fit(kGrid, v);
    CHECK(std::abs(fit.slope - 1.0) < 1e-10);
    CHECK(std::exp(fit.intercept) == doctest::Approx(3.0));
    CHECK(fit.r2 == doctest::Approx(1.0));
    CHECK(fit.points_used == 5);

    std::vector<double> half;
    for (double h : kGrid) half.push_back(std::sqrt(h));
    CHECK(scaling_fit(kGrid, half).slope == doctest::Approx(0.5));

    const auto zero = scaling_fit(kGrid, std::vector<double>(5, 1e-15));
    CHECK(zero.identically_zero);
    CHECK(zero.points_used == 0);

    const std::vector<double> three{1e-1, 1e-2, 1e-3};
    CHECK_THROWS_AS(scaling_fit(three, std::vector<double>{1, 2, 3}), DomainError);
    const std::vector<double> narrow{1e-1, 8e-2, 5e-2, 2e-2};
    CHECK_THROWS_AS(scaling_fit(narrow, std::vector<double>{1, 2, 3, 4}), DomainError);
    CHECK_THROWS_AS(scaling_fit(kGrid, std::vector<double>{1, 2}), DimensionError);
}

TEST_CASE("moment rate from the commutator matches a finite difference") {
    const BasisConfig basis(1, 64, 0.1);
    const auto ops = build_canonical_ops(basis);
    const auto H = quartic();
    const Quantizer quantizer(ops, std::span<const PhasePolynomial>(&H, 1));
    const ConnectionForm A(SymplecticPotential::standard(1), ops);
    const PhasePoint xi{0.5, 0.2};
    const auto psi0 = equivalence_map(StateVector::fock(basis, 0), PhasePoint{0.8, 0.0}, xi, ops);
    const double dt = 1e-4;
    const auto res = evolve(psi0, build_trajectory(CurveSpec::constant_at(xi), H, TimeGrid(0.0, 2 * dt, 2)), H, A,
                            quantizer);
    for (int mu = 0; mu < 2; ++mu) {
        const int idx[] = {mu};
        const double fd = (moment(res.states[2], idx, ops) - moment(res.states[0], idx, ops)).real() / (2 * dt);
        const auto rate = moment_rate(res.states[1], mu, H, xi, quantizer);
        CHECK(std::abs(fd - rate.from_commutator) < 1e-5);
        // dq/dt = p exactly; the quartic term only corrects dp/dt.
        if (mu == 1) CHECK(std::abs(rate.from_commutator - rate.leading_terms) > 1e-3);
    }

    // For the oscillator the leading terms are the whole rate.
    const auto Hosc = PhasePolynomial::harmonic_oscillator(1);
    const Quantizer qosc(ops, 2);
    for (int mu = 0; mu < 2; ++mu) {
        const auto rate = moment_rate(psi0, mu, Hosc, xi, qosc);
        CHECK(std::abs(rate.from_commutator - rate.leading_terms) < 1e-10);
    }
}

TEST_CASE("classical limit for the oscillator") {
    ClassicalLimitSetup setup{PhasePolynomial::harmonic_oscillator(1), PhasePolynomial::coordinate(1, 0),
                              PhasePoint{1.0, 0.5}, 1, TimeGrid::from_step(0.0, 1.0, 1e-3), kGrid};
    setup.evolve_options.record_stride = 20;
    SUBCASE("center of mass has no quantum correction") {
        const auto report = classical_limit_report(setup, 2);
        REQUIRE(report.runs.size() == 5);
        for (const auto& r : report.runs) CHECK(r.max_abs_error < 1e-8);
        CHECK(report.runs.front().hbar == 1e-1);
    }
    SUBCASE("q squared is off by exactly hbar / 2 in the ground state") {
        setup.fock_level = 0;
        setup.observable = PhasePolynomial::monomial(MultiIndex{2, 0}, 1.0);
        const auto report = classical_limit_report(setup);
        for (const auto& r : report.runs) {
            for (double e : r.error) CHECK(std::abs(e - r.hbar / 2) < 1e-10);
            CHECK(r.max_imag < 1e-9);
        }
        CHECK(std::abs(report.fit.slope - 1.0) < 0.05);
    }
}

TEST_CASE("classical limit for the quartic oscillator") {
    ClassicalLimitSetup setup{quartic(), PhasePolynomial::coordinate(1, 0), PhasePoint{1.0, 0.0}, 0,
                              TimeGrid::from_step(0.0, 1.0, 1e-3), kGrid};
    setup.evolve_options.record_stride = 20;
    const auto report = classical_limit_report(setup);
    CHECK(report.fit.slope >= 0.4);
    for (const auto& r : report.runs) CHECK(r.tail_mass_max < 1e-6);
}

TEST_CASE("parallel and serial sweeps agree exactly") {
    ClassicalLimitSetup setup{quartic(), PhasePolynomial::coordinate(1, 0), PhasePoint{1.0, 0.0}, 0,
                              TimeGrid::from_step(0.0, 0.2, 1e-3), kGrid};
    const auto a = classical_limit_report(setup, 1);
    const auto b = classical_limit_report(setup, 3);
    for (std::size_t i = 0; i < a.runs.size(); ++i) CHECK(a.runs[i].error == b.runs[i].error);
    CHECK(a.fit.slope == b.fit.slope);
}
