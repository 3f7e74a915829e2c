#include "psqm/diagnostics.hpp"

#include "psqm/errors.hpp"
#include "psqm/parallel.hpp"
#include "psqm/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace psqm {

namespace {

void ascending_tuples(int vars, int order, int from, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == order) {
        out.push_back(cur);
        return;
    }
    for (int mu = from; mu < vars; ++mu) {
        cur.push_back(mu);
        ascending_tuples(vars, order, mu, cur, out);
        cur.pop_back();
    }
}

MultiIndex multi_index_of(std::span<const int> indices, int modes) {
    std::vector<int> e(2 * static_cast<std::size_t>(modes), 0);
    for (int mu : indices) {
        if (mu < 0 || mu >= 2 * modes) throw DomainError("moment: index out of range");
        ++e[static_cast<std::size_t>(mu)];
    }
    return MultiIndex(std::move(e));
}

}  // namespace

Complex moment(const StateVector& state, std::span<const int> indices, const CanonicalOps& ops) {
    std::vector<OperatorMatrix> factors;
    factors.reserve(indices.size());
    for (int mu : indices) {
        if (mu < 0 || mu >= 2 * ops.modes()) throw DomainError("moment: index out of range");
        factors.push_back(ops.y[static_cast<std::size_t>(mu)]);
    }
    return expectation(state, symmetrized_product(ops.basis, factors)).value;
}

std::vector<std::vector<int>> moment_index_tuples(int modes, int order) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    ascending_tuples(2 * modes, order, 0, cur, out);
    return out;
}

std::vector<MomentReport> moments_of_order(const StateVector& state, int order, const Quantizer& quantizer,
                                           double time) {
    const int modes = quantizer.ops().modes();
    std::vector<MomentReport> out;
    for (const auto& idx : moment_index_tuples(modes, order)) {
        const OperatorMatrix sym = quantizer.symmetrized(multi_index_of(idx, modes));
        out.push_back({order, idx, expectation(state, sym).value, state.basis().hbar(), time});
    }
    return out;
}

std::string moment_label(std::span<const int> indices, int modes) {
    std::string s;
    for (int mu : indices) {
        s += mu < modes ? 'q' : 'p';
        if (modes > 1) s += std::to_string(mu % modes + 1);
    }
    return s.empty() ? "1" : s;
}

ExpectationSplit observable_expectation(const StateVector& state, const PhasePolynomial& f, const PhasePoint& xi,
                                        const Quantizer& quantizer) {
    const Complex total = expectation(state, quantizer.quantize(f, xi)).value;
    const double classical = eval(f, xi);
    return {total.real(), classical, total.real() - classical, total.imag()};
}

ScalingFit scaling_fit(std::span<const double> hbar_grid, std::span<const double> values, double floor) {
    if (hbar_grid.size() != values.size()) throw DimensionError("scaling_fit: grid and values differ in length");
    if (hbar_grid.size() < 4) throw DomainError("scaling_fit: need at least 4 hbar values");
    for (double h : hbar_grid)
        if (!(h > 0.0)) throw DomainError("scaling_fit: hbar values must be positive");
    const auto [lo, hi] = std::minmax_element(hbar_grid.begin(), hbar_grid.end());
    if (*hi / *lo < 100.0 * (1.0 - 1e-9)) throw DomainError("scaling_fit: hbar grid must span two decades");

    ScalingFit fit;
    fit.hbar_grid.assign(hbar_grid.begin(), hbar_grid.end());
    fit.values.assign(values.begin(), values.end());
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = std::abs(values[i]);
        if (v > floor) {
            xs.push_back(std::log(hbar_grid[i]));
            ys.push_back(std::log(v));
        }
    }
    fit.points_used = xs.size();
    if (xs.empty()) {
        fit.identically_zero = true;
        return fit;
    }
    if (xs.size() < 2) throw DomainError("scaling_fit: fewer than two values above the numerical floor");
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

MomentRate moment_rate(const StateVector& state, int mu, const PhasePolynomial& H, const PhasePoint& xi,
                       const Quantizer& quantizer) {
    const int modes = quantizer.ops().modes();
    if (mu < 0 || mu >= 2 * modes) throw DomainError("moment_rate: index out of range");
    const double hbar = quantizer.basis().hbar();
    const auto& y = quantizer.ops().y;
    const OperatorMatrix rhoH = quantizer.quantize(H, xi);
    const Complex rate =
        expectation(state, commutator(rhoH, y[static_cast<std::size_t>(mu)])).value * Complex(0.0, 1.0 / hbar);

    const auto omega = SymplecticForm::standard(modes);
    double leading = 0.0;
    for (int a = 0; a < 2 * modes; ++a) {
        const double w = omega.upper()(mu, a);
        if (w == 0.0) continue;
        const PhasePolynomial dH = partial_derivative(H, a);
        leading += w * eval(dH, xi);
        for (int b = 0; b < 2 * modes; ++b) {
            const double d2 = eval(partial_derivative(dH, b), xi);
            if (d2 != 0.0) leading += w * d2 * expectation(state, y[static_cast<std::size_t>(b)]).real();
        }
    }
    return {rate.real(), leading};
}

ClassicalLimitReport classical_limit_report(const ClassicalLimitSetup& setup, int jobs) {
    if (setup.hbar_grid.size() < 4) throw DomainError("classical_limit_report: need at least 4 hbar values");
    std::vector<double> grid = setup.hbar_grid;
    std::sort(grid.begin(), grid.end(), std::greater<>());
    const Trajectory traj = integrate_hamilton(setup.hamiltonian, setup.start, setup.grid);
    const int modes = setup.hamiltonian.modes();

    auto run_one = [&](std::size_t i) {
        const BasisConfig basis(modes, setup.cutoff, grid[i]);
        const CanonicalOps ops = build_canonical_ops(basis);
        const std::vector<PhasePolynomial> support{setup.hamiltonian, setup.observable};
        const Quantizer quantizer(ops, support);
        const ConnectionForm A(SymplecticPotential::standard(modes), ops);
        const auto evo = evolve(StateVector::fock(basis, setup.fock_level), traj, setup.hamiltonian, A, quantizer,
                                setup.evolve_options);
        ClassicalLimitSeries s;
        s.hbar = grid[i];
        s.tail_mass_max = evo.tail_mass_max;
        s.norm_drift_max = evo.norm_drift_max;
        for (std::size_t r = 0; r < evo.states.size(); ++r) {
            const PhasePoint& c = traj.points[evo.state_steps[r]];
            const auto split = observable_expectation(evo.states[r], setup.observable, c, quantizer);
            s.times.push_back(evo.time_of(r));
            s.quantum.push_back(split.total);
            s.classical.push_back(split.classical);
            s.error.push_back(split.total - split.classical);
            s.max_abs_error = std::max(s.max_abs_error, std::abs(split.total - split.classical));
            s.max_imag = std::max(s.max_imag, std::abs(split.imag));
        }
        return s;
    };

    ClassicalLimitReport report;
    report.runs = parallel_map<ClassicalLimitSeries>(grid.size(), jobs, run_one);
    std::vector<double> errs;
    for (const auto& r : report.runs) errs.push_back(r.max_abs_error);
    report.fit = scaling_fit(grid, errs);
    return report;
}

}  // namespace psqm
