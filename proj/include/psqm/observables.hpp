#pragma once

// Polynomial phase-space observables and their quantization at a base point.
//
// Coordinates are ordered (q^1..q^n, p_1..p_n); index mu runs over 0..2n-1.
// The symplectic form is pinned by requiring Hamilton's equation to read
// dc^mu/dt = omega^{mu nu} d_nu H, which for H = (q^2 + p^2)/2 gives the
// rotation generator ((0, 1), (-1, 0)). Hence omega^{q p} = +1 and
// omega_{q p} = -1, and {q, p} = +1.

#include "psqm/core_algebra.hpp"

#include <Eigen/Dense>

#include <compare>
#include <initializer_list>
#include <map>
#include <span>
#include <vector>

namespace psqm {

inline constexpr int kMaxQuantizedDegree = 12;

class PhasePoint {
public:
    PhasePoint() = default;
    explicit PhasePoint(std::vector<double> coords);
    PhasePoint(std::initializer_list<double> coords) : coords_(coords) {}
    static PhasePoint zero(int modes) { return PhasePoint(std::vector<double>(2 * static_cast<std::size_t>(modes), 0.0)); }

    int modes() const noexcept { return static_cast<int>(coords_.size() / 2); }
    std::size_t size() const noexcept { return coords_.size(); }
    double operator[](std::size_t mu) const { return coords_[mu]; }
    double& operator[](std::size_t mu) { return coords_[mu]; }
    double q(int j) const { return coords_.at(static_cast<std::size_t>(j)); }
    double p(int j) const { return coords_.at(static_cast<std::size_t>(modes() + j)); }
    const std::vector<double>& coords() const noexcept { return coords_; }
    double norm() const;

    PhasePoint& operator+=(const PhasePoint& o);
    PhasePoint& operator-=(const PhasePoint& o);
    PhasePoint& operator*=(double s);
    friend PhasePoint operator+(PhasePoint a, const PhasePoint& b) { return a += b; }
    friend PhasePoint operator-(PhasePoint a, const PhasePoint& b) { return a -= b; }
    friend PhasePoint operator*(PhasePoint a, double s) { return a *= s; }
    friend PhasePoint operator*(double s, PhasePoint a) { return a *= s; }
    friend bool operator==(const PhasePoint&, const PhasePoint&) = default;

private:
    std::vector<double> coords_;
};

/// Tangent vectors share the coordinate layout of points.
using TangentVector = PhasePoint;

class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> exponents);
    MultiIndex(std::initializer_list<int> exponents) : MultiIndex(std::vector<int>(exponents)) {}
    static MultiIndex zero(int modes) { return MultiIndex(std::vector<int>(2 * static_cast<std::size_t>(modes), 0)); }
    static MultiIndex unit(int modes, int mu);

    std::size_t size() const noexcept { return exps_.size(); }
    int operator[](std::size_t mu) const { return exps_[mu]; }
    int degree() const noexcept;
    const std::vector<int>& exponents() const noexcept { return exps_; }
    /// mu repeated exponent[mu] times, ascending.
    std::vector<int> index_list() const;

    friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;

private:
    std::vector<int> exps_;
};

class PhasePolynomial {
public:
    using Terms = std::map<MultiIndex, double>;

    explicit PhasePolynomial(int modes);
    static PhasePolynomial constant(int modes, double c);
    /// The coordinate function xi^mu.
    static PhasePolynomial coordinate(int modes, int mu);
    static PhasePolynomial monomial(const MultiIndex& m, double coefficient);
    /// (p^2 + q^2) / 2 summed over modes.
    static PhasePolynomial harmonic_oscillator(int modes);

    int modes() const noexcept { return modes_; }
    const Terms& terms() const noexcept { return terms_; }
    int degree() const noexcept;
    bool is_zero() const noexcept { return terms_.empty(); }
    double coefficient(const MultiIndex& m) const;

    /// Adds `coefficient` to the term; zero results are erased.
    PhasePolynomial& add_term(const MultiIndex& m, double coefficient);

    PhasePolynomial& operator+=(const PhasePolynomial& o);
    PhasePolynomial& operator-=(const PhasePolynomial& o);
    PhasePolynomial& operator*=(double s);
    friend PhasePolynomial operator+(PhasePolynomial a, const PhasePolynomial& b) { return a += b; }
    friend PhasePolynomial operator-(PhasePolynomial a, const PhasePolynomial& b) { return a -= b; }
    friend PhasePolynomial operator*(PhasePolynomial a, double s) { return a *= s; }
    friend PhasePolynomial operator*(double s, PhasePolynomial a) { return a *= s; }
    friend PhasePolynomial operator*(const PhasePolynomial& a, const PhasePolynomial& b);
    friend bool operator==(const PhasePolynomial&, const PhasePolynomial&) = default;

private:
    int modes_;
    Terms terms_;
};

/// Constant omega_{ab} and its inverse omega^{ab} for omega = dp_j ^ dq^j.
class SymplecticForm {
public:
    static SymplecticForm standard(int modes);

    int modes() const noexcept { return static_cast<int>(lower_.rows() / 2); }
    /// omega_{ab}
    const Eigen::MatrixXd& lower() const noexcept { return lower_; }
    /// omega^{ab}
    const Eigen::MatrixXd& upper() const noexcept { return upper_; }

private:
    SymplecticForm(Eigen::MatrixXd lower, Eigen::MatrixXd upper)
        : lower_(std::move(lower)), upper_(std::move(upper)) {}
    Eigen::MatrixXd lower_;
    Eigen::MatrixXd upper_;
};

double eval(const PhasePolynomial& f, const PhasePoint& xi);

/// Exact d f / d xi^mu, mu in [0, 2n).
PhasePolynomial partial_derivative(const PhasePolynomial& f, int mu);

/// {f, g} = omega^{mu nu} d_mu f d_nu g.
PhasePolynomial poisson_bracket(const PhasePolynomial& f, const PhasePolynomial& g);

/// omega^{mu nu} d_nu H evaluated at xi.
TangentVector hamiltonian_vector_field(const PhasePolynomial& H, const PhasePoint& xi);

/// Coefficients c_M of f(xi + y) = sum_M c_M y^M, i.e. d^M f(xi) / M!.
PhasePolynomial::Terms taylor_coefficients(const PhasePolynomial& f, const PhasePoint& xi);

/// Precomputed symmetrized products Sym(y^M) for the multi-indices a set of
/// observables can need at any base point. Immutable after construction.
class Quantizer {
public:
    Quantizer(CanonicalOps ops, std::span<const PhasePolynomial> support);
    Quantizer(CanonicalOps ops, int max_degree);

    const CanonicalOps& ops() const noexcept { return ops_; }
    const BasisConfig& basis() const noexcept { return ops_.basis; }

    /// Symmetrized product of y^mu with multiplicities M.
    OperatorMatrix symmetrized(const MultiIndex& m) const;

    /// sum_M c_M Sym(y^M).
    OperatorMatrix assemble(const PhasePolynomial::Terms& coefficients) const;

    /// rho(f)_xi.
    OperatorMatrix quantize(const PhasePolynomial& f, const PhasePoint& xi) const;

private:
    Matrix compute(const MultiIndex& m) const;

    CanonicalOps ops_;
    std::map<MultiIndex, Matrix> cache_;
};

/// rho(f)_xi = sum_k (1/k!) d_{mu_1..mu_k} f(xi) Sym(y^{mu_1} ... y^{mu_k}).
OperatorMatrix quantize_at(const PhasePolynomial& f, const PhasePoint& xi, const CanonicalOps& ops);

}  // namespace psqm
