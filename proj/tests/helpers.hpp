#pragma once

#include "psqm/core_algebra.hpp"
#include "psqm/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

namespace psqm::testing {

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Average over all k! orderings, duplicates included.
inline Matrix brute_force_symmetrized(const std::vector<OperatorMatrix>& ops) {
    const auto d = static_cast<Eigen::Index>(ops.front().dim());
    std::vector<std::size_t> perm(ops.size());
    std::iota(perm.begin(), perm.end(), 0);
    Matrix sum = Matrix::Zero(d, d);
    double count = 0;
    do {
        Matrix prod = Matrix::Identity(d, d);
        for (std::size_t i : perm) prod = prod * ops[i].entries();
        sum += prod;
        ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return sum / count;
}

inline PhasePoint random_point(std::mt19937& rng, int modes, double radius) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> c(2 * static_cast<std::size_t>(modes));
    for (auto& x : c) x = u(rng);
    PhasePoint p(c);
    const double n = p.norm();
    const double r = radius * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return n > 0 ? p * (r / n) : p;
}

/// Random polynomial of degree <= max_degree with coefficients in [-1, 1].
inline PhasePolynomial random_polynomial(std::mt19937& rng, int modes, int max_degree, int terms) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> deg(0, max_degree), var(0, 2 * modes - 1);
    PhasePolynomial f(modes);
    for (int t = 0; t < terms; ++t) {
        std::vector<int> e(2 * static_cast<std::size_t>(modes), 0);
        const int d = deg(rng);
        for (int k = 0; k < d; ++k) ++e[static_cast<std::size_t>(var(rng))];
        f.add_term(MultiIndex(e), u(rng));
    }
    return f;
}

/// Normalized Hermite functions psi_n(x) for the oscillator with mass 1,
/// frequency 1, at the given hbar: psi_0 = (pi hbar)^{-1/4} exp(-x^2 / 2 hbar).
inline std::vector<double> hermite_functions(double x, int count, double hbar) {
    std::vector<double> psi(static_cast<std::size_t>(count));
    const double s = x / std::sqrt(hbar);
    psi[0] = std::pow(std::numbers::pi * hbar, -0.25) * std::exp(-s * s / 2.0);
    if (count > 1) psi[1] = std::sqrt(2.0) * s * psi[0];
    for (int n = 1; n + 1 < count; ++n)
        psi[static_cast<std::size_t>(n + 1)] = std::sqrt(2.0 / (n + 1)) * s * psi[static_cast<std::size_t>(n)] -
                                              std::sqrt(static_cast<double>(n) / (n + 1)) * psi[static_cast<std::size_t>(n - 1)];
    return psi;
}

/// Position-space amplitude of a one-mode Fock state.
inline Complex position_amplitude(const StateVector& s, double x) {
    const auto h = hermite_functions(x, static_cast<int>(s.dim()), s.basis().hbar());
    Complex a = 0.0;
    for (std::size_t n = 0; n < s.dim(); ++n) a += s[n] * h[n];
    return a;
}

}  // namespace psqm::testing
