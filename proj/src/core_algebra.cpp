#include "psqm/core_algebra.hpp"

#include "psqm/errors.hpp"
#include "sparse_product.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace psqm {

BasisConfig::BasisConfig(int modes, int cutoff, double hbar)
    : modes_(modes), cutoff_(cutoff), hbar_(hbar), dim_(1) {
    if (modes < 1) throw DomainError("BasisConfig: modes must be >= 1");
    if (cutoff < 2) throw DomainError("BasisConfig: cutoff must be >= 2 (ladder operators undefined)");
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw DomainError("BasisConfig: hbar must be positive");
    for (int m = 0; m < modes; ++m) {
        if (dim_ > std::numeric_limits<std::size_t>::max() / static_cast<std::size_t>(cutoff))
            throw DomainError("BasisConfig: dimension overflow");
        dim_ *= static_cast<std::size_t>(cutoff);
    }
}

int BasisConfig::tail_levels() const noexcept { return std::max(1, (cutoff_ + 9) / 10); }

std::vector<int> BasisConfig::occupations(std::size_t index) const {
    std::vector<int> occ(static_cast<std::size_t>(modes_));
    for (int m = modes_ - 1; m >= 0; --m) {
        occ[static_cast<std::size_t>(m)] = static_cast<int>(index % static_cast<std::size_t>(cutoff_));
        index /= static_cast<std::size_t>(cutoff_);
    }
    return occ;
}

std::size_t BasisConfig::index_of(std::span<const int> occupations) const {
    if (occupations.size() != static_cast<std::size_t>(modes_))
        throw DimensionError("BasisConfig::index_of: expected " + std::to_string(modes_) + " occupations");
    std::size_t idx = 0;
    for (int level : occupations) {
        if (level < 0 || level >= cutoff_) throw DomainError("BasisConfig::index_of: level out of range");
        idx = idx * static_cast<std::size_t>(cutoff_) + static_cast<std::size_t>(level);
    }
    return idx;
}

std::vector<std::size_t> BasisConfig::block_indices(int levels) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < dim_; ++i) {
        const auto occ = occupations(i);
        if (std::all_of(occ.begin(), occ.end(), [&](int k) { return k < levels; })) out.push_back(i);
    }
    return out;
}

void require_same_basis(const BasisConfig& a, const BasisConfig& b, const char* where) {
    if (!(a == b)) {
        throw DimensionError(std::string(where) + ": operands built from different bases (dim " +
                             std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
    }
}

OperatorMatrix::OperatorMatrix(BasisConfig basis, Matrix entries)
    : basis_(basis), entries_(std::move(entries)) {
    const auto d = static_cast<Eigen::Index>(basis_.dim());
    if (entries_.rows() != d || entries_.cols() != d)
        throw DimensionError("OperatorMatrix: entries are not dim x dim");
}

OperatorMatrix OperatorMatrix::identity(const BasisConfig& basis) {
    const auto d = static_cast<Eigen::Index>(basis.dim());
    return {basis, Matrix::Identity(d, d)};
}

OperatorMatrix OperatorMatrix::zero(const BasisConfig& basis) {
    const auto d = static_cast<Eigen::Index>(basis.dim());
    return {basis, Matrix::Zero(d, d)};
}

OperatorMatrix OperatorMatrix::adjoint() const { return {basis_, entries_.adjoint()}; }

double OperatorMatrix::hermiticity_defect() const {
    return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

OperatorMatrix& OperatorMatrix::operator+=(const OperatorMatrix& other) {
    require_same_basis(basis_, other.basis_, "operator+");
    entries_ += other.entries_;
    return *this;
}

OperatorMatrix& OperatorMatrix::operator-=(const OperatorMatrix& other) {
    require_same_basis(basis_, other.basis_, "operator-");
    entries_ -= other.entries_;
    return *this;
}

OperatorMatrix& OperatorMatrix::operator*=(Complex s) {
    entries_ *= s;
    return *this;
}

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
    require_same_basis(a.basis(), b.basis(), "operator*");
    return {a.basis(), a.entries() * b.entries()};
}

StateVector::StateVector(BasisConfig basis, Vector entries)
    : basis_(basis), entries_(std::move(entries)) {
    if (entries_.size() != static_cast<Eigen::Index>(basis_.dim()))
        throw DimensionError("StateVector: length does not match basis dimension");
}

StateVector StateVector::fock(const BasisConfig& basis, std::span<const int> occupations) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(basis.dim()));
    v(static_cast<Eigen::Index>(basis.index_of(occupations))) = 1.0;
    return {basis, std::move(v)};
}

StateVector StateVector::fock(const BasisConfig& basis, int level) {
    std::vector<int> occ(static_cast<std::size_t>(basis.modes()), 0);
    occ.front() = level;
    return fock(basis, occ);
}

double StateVector::tail_mass() const {
    const auto N = static_cast<std::size_t>(basis_.cutoff());
    const auto first_tail = N - static_cast<std::size_t>(basis_.tail_levels());
    double mass = 0.0;
    for (std::size_t i = 0; i < basis_.dim(); ++i) {
        bool in_tail = false;
        for (std::size_t rest = i; rest > 0 && !in_tail; rest /= N) in_tail = rest % N >= first_tail;
        if (in_tail) mass += std::norm(entries_(static_cast<Eigen::Index>(i)));
    }
    return mass;
}

Complex StateVector::inner(const StateVector& other) const {
    require_same_basis(basis_, other.basis_, "StateVector::inner");
    return entries_.dot(other.entries_);
}

StateVector operator*(const OperatorMatrix& op, const StateVector& s) {
    require_same_basis(op.basis(), s.basis(), "operator*(OperatorMatrix, StateVector)");
    return {s.basis(), op.entries() * s.entries()};
}

void check_tail_mass(const StateVector& state, double limit, const char* where) {
    const double tail = state.tail_mass();
    if (tail > limit) {
        throw TruncationError(std::string(where) + ": tail mass " + std::to_string(tail) +
                                  " exceeds limit " + std::to_string(limit) + " (cutoff " +
                                  std::to_string(state.basis().cutoff()) + " too small)",
                              tail);
    }
}

Matrix lowering_matrix(int cutoff) {
    if (cutoff < 2) throw DomainError("lowering_matrix: cutoff must be >= 2");
    Matrix a = Matrix::Zero(cutoff, cutoff);
    for (int k = 1; k < cutoff; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

namespace {

// I (x) ... (x) m (x) ... (x) I with `m` in slot `mode`.
Matrix embed_single_mode(const Matrix& m, int mode, int modes, int cutoff) {
    Matrix result = Matrix::Identity(1, 1);
    for (int k = 0; k < modes; ++k) {
        const Matrix factor = (k == mode) ? m : Matrix::Identity(cutoff, cutoff);
        Matrix next(result.rows() * factor.rows(), result.cols() * factor.cols());
        for (Eigen::Index i = 0; i < result.rows(); ++i)
            for (Eigen::Index j = 0; j < result.cols(); ++j)
                next.block(i * factor.rows(), j * factor.cols(), factor.rows(), factor.cols()) =
                    result(i, j) * factor;
        result = std::move(next);
    }
    return result;
}

}  // namespace

CanonicalOps build_canonical_ops(const BasisConfig& basis) {
    const int n = basis.modes();
    const int N = basis.cutoff();
    const Matrix a = lowering_matrix(N);
    const Matrix ad = a.adjoint();
    const double s = std::sqrt(basis.hbar() / 2.0);
    const Matrix q1 = s * (a + ad);
    const Matrix p1 = Complex(0.0, s) * (ad - a);

    CanonicalOps ops{basis, {}};
    ops.y.reserve(static_cast<std::size_t>(2 * n));
    for (int j = 0; j < n; ++j) ops.y.emplace_back(basis, embed_single_mode(q1, j, n, N));
    for (int j = 0; j < n; ++j) ops.y.emplace_back(basis, embed_single_mode(p1, j, n, N));
    return ops;
}

OperatorMatrix symmetrized_product(std::span<const OperatorMatrix> ops) {
    if (ops.empty())
        throw DomainError("symmetrized_product: empty list needs an explicit basis");
    return symmetrized_product(ops.front().basis(), ops);
}

OperatorMatrix symmetrized_product(const BasisConfig& basis, std::span<const OperatorMatrix> ops) {
    for (const auto& op : ops) require_same_basis(basis, op.basis(), "symmetrized_product");
    if (ops.empty()) return OperatorMatrix::identity(basis);

    // Equal operands get the same label so that only distinct orderings are
    // enumerated; each distinct ordering occurs equally often among the k!
    // permutations, so their plain average is the symmetrized product.
    std::vector<int> labels(ops.size());
    std::vector<const OperatorMatrix*> distinct;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        auto it = std::find_if(distinct.begin(), distinct.end(),
                               [&](const OperatorMatrix* d) { return d->entries() == ops[i].entries(); });
        if (it == distinct.end()) {
            labels[i] = static_cast<int>(distinct.size());
            distinct.push_back(&ops[i]);
        } else {
            labels[i] = static_cast<int>(it - distinct.begin());
        }
    }
    std::vector<Matrix> factors;
    factors.reserve(distinct.size());
    for (const auto* d : distinct) factors.push_back(d->entries());
    return {basis, detail::average_over_orderings(factors, labels)};
}

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
    require_same_basis(a.basis(), b.basis(), "commutator");
    return {a.basis(), a.entries() * b.entries() - b.entries() * a.entries()};
}

Expectation expectation(const StateVector& state, const OperatorMatrix& op, double norm_tolerance) {
    require_same_basis(state.basis(), op.basis(), "expectation");
    const double nrm = state.entries().squaredNorm();
    if (std::abs(nrm - 1.0) > norm_tolerance) {
        throw NormalizationError("expectation: state not normalized (|psi|^2 = " + std::to_string(nrm) + ")");
    }
    return {state.entries().dot(op.entries() * state.entries())};
}

double max_abs_diff_on(const Matrix& a, const Matrix& b, std::span<const std::size_t> indices) {
    double worst = 0.0;
    for (auto r : indices)
        for (auto c : indices)
            worst = std::max(worst, std::abs(a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) -
                                             b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))));
    return worst;
}

double max_abs_on(const Matrix& a, std::span<const std::size_t> indices) {
    double worst = 0.0;
    for (auto r : indices)
        for (auto c : indices)
            worst = std::max(worst, std::abs(a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))));
    return worst;
}

}  // namespace psqm
