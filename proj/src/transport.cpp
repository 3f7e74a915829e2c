#include "psqm/transport.hpp"

#include "psqm/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace psqm {

namespace {

void require_points(const PhasePoint& a, const PhasePoint& b, int modes, const char* where) {
    const auto expected = 2 * static_cast<std::size_t>(modes);
    if (a.size() != expected || b.size() != expected)
        throw DimensionError(std::string(where) + ": phase-space dimension mismatch");
}

}  // namespace

SymplecticPotential SymplecticPotential::standard(int modes) {
    std::vector<PhasePolynomial> comps;
    comps.reserve(2 * static_cast<std::size_t>(modes));
    for (int j = 0; j < modes; ++j) comps.push_back(0.5 * PhasePolynomial::coordinate(modes, modes + j));
    for (int j = 0; j < modes; ++j) comps.push_back(-0.5 * PhasePolynomial::coordinate(modes, j));
    return SymplecticPotential(std::move(comps));
}

SymplecticPotential SymplecticPotential::from_components(std::vector<PhasePolynomial> components) {
    if (components.empty() || components.size() % 2 != 0)
        throw DimensionError("SymplecticPotential: need 2n components");
    const int modes = static_cast<int>(components.size() / 2);
    for (const auto& c : components)
        if (c.modes() != modes) throw DimensionError("SymplecticPotential: component over wrong phase space");
    SymplecticPotential theta(std::move(components));
    if (!theta.closes_to_symplectic_form())
        throw DomainError("SymplecticPotential: d(theta) != omega");
    return theta;
}

bool SymplecticPotential::is_standard() const { return components_ == standard(modes()).components_; }

double SymplecticPotential::evaluate(const PhasePoint& xi, const TangentVector& v) const {
    require_points(xi, v, modes(), "SymplecticPotential::evaluate");
    double s = 0.0;
    for (std::size_t mu = 0; mu < components_.size(); ++mu)
        if (v[mu] != 0.0) s += eval(components_[mu], xi) * v[mu];
    return s;
}

bool SymplecticPotential::closes_to_symplectic_form() const {
    const auto omega = SymplecticForm::standard(modes());
    const int dim = 2 * modes();
    for (int mu = 0; mu < dim; ++mu)
        for (int nu = mu + 1; nu < dim; ++nu) {
            PhasePolynomial curl = partial_derivative(components_[static_cast<std::size_t>(nu)], mu) -
                                   partial_derivative(components_[static_cast<std::size_t>(mu)], nu);
            curl -= PhasePolynomial::constant(modes(), omega.lower()(mu, nu));
            if (!curl.is_zero()) return false;
        }
    return true;
}

ConnectionForm::ConnectionForm(SymplecticPotential theta, CanonicalOps ops)
    : theta_(std::move(theta)), omega_(SymplecticForm::standard(ops.modes())), ops_(std::move(ops)) {
    if (theta_.modes() != ops_.modes()) throw DimensionError("ConnectionForm: theta and basis mode counts differ");
}

OperatorMatrix ConnectionForm::apply(const PhasePoint& xi, const TangentVector& v) const {
    require_points(xi, v, ops_.modes(), "connection_apply");
    const int dim = 2 * ops_.modes();
    OperatorMatrix inner = OperatorMatrix::identity(ops_.basis) * Complex(theta_.evaluate(xi, v));
    for (int a = 0; a < dim; ++a) {
        double coeff = 0.0;
        for (int b = 0; b < dim; ++b) coeff += omega_.lower()(a, b) * v[static_cast<std::size_t>(b)];
        if (coeff != 0.0) inner += ops_.y[static_cast<std::size_t>(a)] * Complex(coeff);
    }
    return inner * Complex(0.0, -1.0 / ops_.basis.hbar());
}

OperatorMatrix connection_apply(const ConnectionForm& A, const PhasePoint& xi, const TangentVector& v) {
    return A.apply(xi, v);
}

OperatorMatrix expm_antihermitian(const OperatorMatrix& x) {
    // iX is Hermitian; exp(X) = V exp(-i lambda) V^dagger with iX = V lambda V^dagger.
    const Matrix h = Complex(0.0, 1.0) * x.entries();
    const Matrix herm = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
    if (es.info() != Eigen::Success) throw SolverError("expm_antihermitian: eigendecomposition failed");
    const Eigen::VectorXcd phases =
        es.eigenvalues().unaryExpr([](double l) { return std::exp(Complex(0.0, -l)); });
    return {x.basis(), es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint()};
}

OperatorMatrix displacement_exponent(const TransportPair& pair, const CanonicalOps& ops) {
    const int n = ops.modes();
    require_points(pair.source, pair.target, n, "displacement");
    double scalar = 0.0;
    OperatorMatrix gen = OperatorMatrix::zero(ops.basis);
    for (int j = 0; j < n; ++j) {
        const double q0 = pair.source.q(j), p0 = pair.source.p(j);
        const double q = pair.target.q(j), p = pair.target.p(j);
        gen += ops.q(j) * Complex(p0 - p);
        gen += ops.p(j) * Complex(q - q0);
        scalar += 0.5 * (q * p0 - p * q0);
    }
    gen += OperatorMatrix::identity(ops.basis) * Complex(scalar);
    return gen * Complex(0.0, 1.0 / ops.basis.hbar());
}

OperatorMatrix displacement(const TransportPair& pair, const CanonicalOps& ops) {
    if (pair.source == pair.target) return OperatorMatrix::identity(ops.basis);
    return expm_antihermitian(displacement_exponent(pair, ops));
}

StateVector parallel_section_value(const StateVector& chi, const PhasePoint& xi, const CanonicalOps& ops,
                                   double tail_mass_limit) {
    return equivalence_map(chi, PhasePoint::zero(ops.modes()), xi, ops, tail_mass_limit);
}

StateVector equivalence_map(const StateVector& psi, const PhasePoint& from, const PhasePoint& to,
                            const CanonicalOps& ops, double tail_mass_limit) {
    require_same_basis(psi.basis(), ops.basis, "equivalence_map");
    StateVector out = displacement({from, to}, ops) * psi;
    check_tail_mass(out, tail_mass_limit, "equivalence_map");
    return out;
}

}  // namespace psqm
