#pragma once

// Parallel transport between the fibers H_xi of the trivial Hilbert bundle
// over phase space.
//
// The connection form is A = -(i/hbar) [theta + omega_{ab} y^a dxi^b] with
// d theta = omega. For the default potential theta = (p dq - q dp)/2 the
// transport from (q0, p0) to (q, p) is the Weyl operator
//
//   U = exp[(i/hbar) ((p0 - p) q^ + (q - q0) p^ + (q p0 - p q0) / 2)],
//
// which satisfies dU(xi, c(t))/dt = -A_{c(t)}(c'(t)) U(xi, c(t)) and the
// composition law U(b, c) U(a, b) = U(a, c).

#include "psqm/core_algebra.hpp"
#include "psqm/observables.hpp"

#include <vector>

namespace psqm {

/// A 1-form theta = theta_mu(xi) dxi^mu with polynomial coefficients.
class SymplecticPotential {
public:
    /// theta = (p_j dq^j - q^j dp_j) / 2.
    static SymplecticPotential standard(int modes);
    /// Rejects potentials whose exterior derivative is not omega.
    static SymplecticPotential from_components(std::vector<PhasePolynomial> components);

    int modes() const noexcept { return static_cast<int>(components_.size() / 2); }
    const std::vector<PhasePolynomial>& components() const noexcept { return components_; }
    bool is_standard() const;

    /// theta_xi(v).
    double evaluate(const PhasePoint& xi, const TangentVector& v) const;
    /// True when d_mu theta_nu - d_nu theta_mu == omega_{mu nu} as polynomials.
    bool closes_to_symplectic_form() const;

private:
    explicit SymplecticPotential(std::vector<PhasePolynomial> components)
        : components_(std::move(components)) {}
    std::vector<PhasePolynomial> components_;
};

class ConnectionForm {
public:
    ConnectionForm(SymplecticPotential theta, CanonicalOps ops);

    const SymplecticPotential& theta() const noexcept { return theta_; }
    const SymplecticForm& omega() const noexcept { return omega_; }
    const CanonicalOps& ops() const noexcept { return ops_; }
    const BasisConfig& basis() const noexcept { return ops_.basis; }

    /// A_xi(v) = -(i/hbar) (theta_xi(v) I + omega_{ab} y^a v^b). Anti-Hermitian.
    OperatorMatrix apply(const PhasePoint& xi, const TangentVector& v) const;

private:
    SymplecticPotential theta_;
    SymplecticForm omega_;
    CanonicalOps ops_;
};

OperatorMatrix connection_apply(const ConnectionForm& A, const PhasePoint& xi, const TangentVector& v);

struct TransportPair {
    PhasePoint source;
    PhasePoint target;
};

/// exp(X) for anti-Hermitian X via the Hermitian eigendecomposition of iX.
OperatorMatrix expm_antihermitian(const OperatorMatrix& x);

/// The exponent of U(source, target) as an anti-Hermitian matrix.
OperatorMatrix displacement_exponent(const TransportPair& pair, const CanonicalOps& ops);

/// U(source, target): H_source -> H_target.
OperatorMatrix displacement(const TransportPair& pair, const CanonicalOps& ops);

/// Psi_xi = U(0, xi) chi for a state chi over the origin. Throws
/// TruncationError if the transported state leaks past the tail guard.
StateVector parallel_section_value(const StateVector& chi, const PhasePoint& xi, const CanonicalOps& ops,
                                   double tail_mass_limit = kDefaultTailMassLimit);

/// psi' = U(from, to) psi, identifying (c, psi) with (c', psi').
StateVector equivalence_map(const StateVector& psi, const PhasePoint& from, const PhasePoint& to,
                            const CanonicalOps& ops, double tail_mass_limit = kDefaultTailMassLimit);

}  // namespace psqm
