#pragma once

// Truncated Fock-basis representation of the Weyl algebra.
//
// A BasisConfig fixes the number of modes n, the per-mode cutoff N and the
// numeric value of hbar. Operators are dense N^n x N^n complex matrices, states
// are length-N^n complex vectors. Multi-mode indices are row-major with mode 0
// the slowest index.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace psqm {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Guard applied to tail mass after evolution and transport.
inline constexpr double kDefaultTailMassLimit = 1e-6;

class BasisConfig {
public:
    BasisConfig(int modes, int cutoff, double hbar);

    int modes() const noexcept { return modes_; }
    int cutoff() const noexcept { return cutoff_; }
    double hbar() const noexcept { return hbar_; }
    /// N^n.
    std::size_t dim() const noexcept { return dim_; }
    /// Number of per-mode Fock levels counted as "top 10%" for tail mass.
    int tail_levels() const noexcept;

    /// Per-mode occupation numbers of a flat basis index.
    std::vector<int> occupations(std::size_t index) const;
    std::size_t index_of(std::span<const int> occupations) const;

    /// Flat indices whose every mode occupation is below `levels`. With
    /// levels = N-1 this is the block on which the truncated CCR hold exactly.
    std::vector<std::size_t> block_indices(int levels) const;
    std::vector<std::size_t> safe_block() const { return block_indices(cutoff_ - 1); }

    friend bool operator==(const BasisConfig&, const BasisConfig&) = default;

private:
    int modes_;
    int cutoff_;
    double hbar_;
    std::size_t dim_;
};

/// Throws DimensionError unless `a` and `b` describe the same basis.
void require_same_basis(const BasisConfig& a, const BasisConfig& b, const char* where);

class OperatorMatrix {
public:
    OperatorMatrix(BasisConfig basis, Matrix entries);

    static OperatorMatrix identity(const BasisConfig& basis);
    static OperatorMatrix zero(const BasisConfig& basis);

    const BasisConfig& basis() const noexcept { return basis_; }
    std::size_t dim() const noexcept { return basis_.dim(); }
    const Matrix& entries() const noexcept { return entries_; }
    Complex operator()(std::size_t r, std::size_t c) const { return entries_(r, c); }

    OperatorMatrix adjoint() const;
    /// max |A - A^dagger| over all entries.
    double hermiticity_defect() const;

    OperatorMatrix& operator+=(const OperatorMatrix& other);
    OperatorMatrix& operator-=(const OperatorMatrix& other);
    OperatorMatrix& operator*=(Complex s);

    friend OperatorMatrix operator+(OperatorMatrix a, const OperatorMatrix& b) { return a += b; }
    friend OperatorMatrix operator-(OperatorMatrix a, const OperatorMatrix& b) { return a -= b; }
    friend OperatorMatrix operator*(OperatorMatrix a, Complex s) { return a *= s; }
    friend OperatorMatrix operator*(Complex s, OperatorMatrix a) { return a *= s; }
    friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b);

private:
    BasisConfig basis_;
    Matrix entries_;
};

class StateVector {
public:
    StateVector(BasisConfig basis, Vector entries);

    /// Product state |m_1, ..., m_n>.
    static StateVector fock(const BasisConfig& basis, std::span<const int> occupations);
    static StateVector fock(const BasisConfig& basis, int level);

    const BasisConfig& basis() const noexcept { return basis_; }
    std::size_t dim() const noexcept { return basis_.dim(); }
    const Vector& entries() const noexcept { return entries_; }
    Complex operator[](std::size_t i) const { return entries_(static_cast<Eigen::Index>(i)); }

    double norm() const { return entries_.norm(); }
    /// Sum of |c_i|^2 over basis states with any mode in the top tail_levels().
    double tail_mass() const;
    Complex inner(const StateVector& other) const;  // <this, other>

    friend StateVector operator*(const OperatorMatrix& op, const StateVector& s);

private:
    BasisConfig basis_;
    Vector entries_;
};

/// Throws TruncationError when state.tail_mass() exceeds `limit`.
void check_tail_mass(const StateVector& state, double limit, const char* where);

/// Ladder operator `a` for one mode of size cutoff x cutoff.
Matrix lowering_matrix(int cutoff);

/// y^1..y^{2n} ordered (q^1..q^n, p_1..p_n).
struct CanonicalOps {
    BasisConfig basis;
    std::vector<OperatorMatrix> y;

    int modes() const noexcept { return basis.modes(); }
    const OperatorMatrix& q(int j) const { return y.at(static_cast<std::size_t>(j)); }
    const OperatorMatrix& p(int j) const {
        return y.at(static_cast<std::size_t>(basis.modes() + j));
    }
};

CanonicalOps build_canonical_ops(const BasisConfig& basis);

/// (1/k!) sum over orderings of the product; identity for an empty list.
OperatorMatrix symmetrized_product(std::span<const OperatorMatrix> ops);
OperatorMatrix symmetrized_product(const BasisConfig& basis, std::span<const OperatorMatrix> ops);

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);

struct Expectation {
    Complex value;
    double real() const { return value.real(); }
    double imag() const { return value.imag(); }
};

/// <state, op state>. Rejects states whose norm differs from 1 by more than
/// `norm_tolerance`.
Expectation expectation(const StateVector& state, const OperatorMatrix& op,
                        double norm_tolerance = 1e-10);

/// max |a_ij - b_ij| over the given row/column index set.
double max_abs_diff_on(const Matrix& a, const Matrix& b, std::span<const std::size_t> indices);
double max_abs_on(const Matrix& a, std::span<const std::size_t> indices);

}  // namespace psqm
