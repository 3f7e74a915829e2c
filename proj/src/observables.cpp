#include "psqm/observables.hpp"

#include "psqm/errors.hpp"
#include "sparse_product.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace psqm {

namespace {

void require_point_size(const PhasePoint& xi, int modes, const char* where) {
    if (xi.size() != 2 * static_cast<std::size_t>(modes))
        throw DimensionError(std::string(where) + ": phase point has " + std::to_string(xi.size()) +
                             " coordinates, expected " + std::to_string(2 * modes));
}

void require_same_modes(const PhasePolynomial& f, const PhasePolynomial& g, const char* where) {
    if (f.modes() != g.modes()) throw DimensionError(std::string(where) + ": polynomials over different phase spaces");
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Every multi-index componentwise <= e, appended to `out`.
void dominated_indices(const std::vector<int>& e, std::size_t pos, std::vector<int>& cur,
                       std::vector<MultiIndex>& out) {
    if (pos == e.size()) {
        out.emplace_back(cur);
        return;
    }
    for (int k = 0; k <= e[pos]; ++k) {
        cur[pos] = k;
        dominated_indices(e, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

void indices_up_to_degree(int vars, int max_degree, std::size_t pos, int used, std::vector<int>& cur,
                          std::vector<MultiIndex>& out) {
    if (pos == static_cast<std::size_t>(vars)) {
        out.emplace_back(cur);
        return;
    }
    for (int k = 0; used + k <= max_degree; ++k) {
        cur[pos] = k;
        indices_up_to_degree(vars, max_degree, pos + 1, used + k, cur, out);
    }
    cur[pos] = 0;
}

}  // namespace

PhasePoint::PhasePoint(std::vector<double> coords) : coords_(std::move(coords)) {
    if (coords_.size() % 2 != 0) throw DimensionError("PhasePoint: odd number of coordinates");
}

double PhasePoint::norm() const {
    return std::sqrt(std::inner_product(coords_.begin(), coords_.end(), coords_.begin(), 0.0));
}

PhasePoint& PhasePoint::operator+=(const PhasePoint& o) {
    if (o.size() != size()) throw DimensionError("PhasePoint: size mismatch");
    for (std::size_t i = 0; i < size(); ++i) coords_[i] += o.coords_[i];
    return *this;
}

PhasePoint& PhasePoint::operator-=(const PhasePoint& o) {
    if (o.size() != size()) throw DimensionError("PhasePoint: size mismatch");
    for (std::size_t i = 0; i < size(); ++i) coords_[i] -= o.coords_[i];
    return *this;
}

PhasePoint& PhasePoint::operator*=(double s) {
    for (auto& c : coords_) c *= s;
    return *this;
}

MultiIndex::MultiIndex(std::vector<int> exponents) : exps_(std::move(exponents)) {
    if (exps_.size() % 2 != 0) throw DimensionError("MultiIndex: odd number of exponents");
    for (int e : exps_)
        if (e < 0) throw DomainError("MultiIndex: negative exponent");
}

MultiIndex MultiIndex::unit(int modes, int mu) {
    if (mu < 0 || mu >= 2 * modes) throw DomainError("MultiIndex::unit: index out of range");
    std::vector<int> e(2 * static_cast<std::size_t>(modes), 0);
    e[static_cast<std::size_t>(mu)] = 1;
    return MultiIndex(std::move(e));
}

int MultiIndex::degree() const noexcept { return std::accumulate(exps_.begin(), exps_.end(), 0); }

std::vector<int> MultiIndex::index_list() const {
    std::vector<int> out;
    for (std::size_t mu = 0; mu < exps_.size(); ++mu)
        for (int k = 0; k < exps_[mu]; ++k) out.push_back(static_cast<int>(mu));
    return out;
}

PhasePolynomial::PhasePolynomial(int modes) : modes_(modes) {
    if (modes < 1) throw DomainError("PhasePolynomial: modes must be >= 1");
}

PhasePolynomial PhasePolynomial::constant(int modes, double c) {
    PhasePolynomial f(modes);
    f.add_term(MultiIndex::zero(modes), c);
    return f;
}

PhasePolynomial PhasePolynomial::coordinate(int modes, int mu) {
    PhasePolynomial f(modes);
    f.add_term(MultiIndex::unit(modes, mu), 1.0);
    return f;
}

PhasePolynomial PhasePolynomial::monomial(const MultiIndex& m, double coefficient) {
    PhasePolynomial f(static_cast<int>(m.size() / 2));
    f.add_term(m, coefficient);
    return f;
}

PhasePolynomial PhasePolynomial::harmonic_oscillator(int modes) {
    PhasePolynomial h(modes);
    for (int mu = 0; mu < 2 * modes; ++mu) {
        std::vector<int> e(2 * static_cast<std::size_t>(modes), 0);
        e[static_cast<std::size_t>(mu)] = 2;
        h.add_term(MultiIndex(std::move(e)), 0.5);
    }
    return h;
}

int PhasePolynomial::degree() const noexcept {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
}

double PhasePolynomial::coefficient(const MultiIndex& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
}

PhasePolynomial& PhasePolynomial::add_term(const MultiIndex& m, double coefficient) {
    if (m.size() != 2 * static_cast<std::size_t>(modes_))
        throw DimensionError("PhasePolynomial::add_term: multi-index length does not match 2n");
    if (coefficient == 0.0) return *this;
    auto [it, inserted] = terms_.try_emplace(m, coefficient);
    if (!inserted) {
        it->second += coefficient;
        if (it->second == 0.0) terms_.erase(it);
    }
    return *this;
}

PhasePolynomial& PhasePolynomial::operator+=(const PhasePolynomial& o) {
    require_same_modes(*this, o, "PhasePolynomial::operator+");
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

PhasePolynomial& PhasePolynomial::operator-=(const PhasePolynomial& o) {
    require_same_modes(*this, o, "PhasePolynomial::operator-");
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}

PhasePolynomial& PhasePolynomial::operator*=(double s) {
    if (s == 0.0) {
        terms_.clear();
        return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
}

PhasePolynomial operator*(const PhasePolynomial& a, const PhasePolynomial& b) {
    require_same_modes(a, b, "PhasePolynomial::operator*");
    PhasePolynomial out(a.modes());
    for (const auto& [ma, ca] : a.terms())
        for (const auto& [mb, cb] : b.terms()) {
            std::vector<int> e(ma.size());
            for (std::size_t i = 0; i < e.size(); ++i) e[i] = ma[i] + mb[i];
            out.add_term(MultiIndex(std::move(e)), ca * cb);
        }
    return out;
}

SymplecticForm SymplecticForm::standard(int modes) {
    if (modes < 1) throw DomainError("SymplecticForm: modes must be >= 1");
    const Eigen::Index n = modes;
    Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    Eigen::MatrixXd upper = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        lower(j, n + j) = -1.0;
        lower(n + j, j) = 1.0;
        upper(j, n + j) = 1.0;
        upper(n + j, j) = -1.0;
    }
    return {std::move(lower), std::move(upper)};
}

double eval(const PhasePolynomial& f, const PhasePoint& xi) {
    require_point_size(xi, f.modes(), "eval");
    double sum = 0.0;
    for (const auto& [m, c] : f.terms()) {
        double term = c;
        for (std::size_t mu = 0; mu < m.size(); ++mu)
            for (int k = 0; k < m[mu]; ++k) term *= xi[mu];
        sum += term;
    }
    return sum;
}

PhasePolynomial partial_derivative(const PhasePolynomial& f, int mu) {
    if (mu < 0 || mu >= 2 * f.modes())
        throw DomainError("partial_derivative: index " + std::to_string(mu) + " out of range");
    PhasePolynomial out(f.modes());
    for (const auto& [m, c] : f.terms()) {
        const int e = m[static_cast<std::size_t>(mu)];
        if (e == 0) continue;
        std::vector<int> exps = m.exponents();
        exps[static_cast<std::size_t>(mu)] = e - 1;
        out.add_term(MultiIndex(std::move(exps)), c * e);
    }
    return out;
}

PhasePolynomial poisson_bracket(const PhasePolynomial& f, const PhasePolynomial& g) {
    require_same_modes(f, g, "poisson_bracket");
    const auto omega = SymplecticForm::standard(f.modes());
    PhasePolynomial out(f.modes());
    const int dim = 2 * f.modes();
    for (int mu = 0; mu < dim; ++mu)
        for (int nu = 0; nu < dim; ++nu) {
            const double w = omega.upper()(mu, nu);
            if (w == 0.0) continue;
            out += w * (partial_derivative(f, mu) * partial_derivative(g, nu));
        }
    return out;
}

TangentVector hamiltonian_vector_field(const PhasePolynomial& H, const PhasePoint& xi) {
    require_point_size(xi, H.modes(), "hamiltonian_vector_field");
    const auto omega = SymplecticForm::standard(H.modes());
    const int dim = 2 * H.modes();
    std::vector<double> grad(static_cast<std::size_t>(dim));
    for (int nu = 0; nu < dim; ++nu) grad[static_cast<std::size_t>(nu)] = eval(partial_derivative(H, nu), xi);
    TangentVector v = PhasePoint::zero(H.modes());
    for (int mu = 0; mu < dim; ++mu)
        for (int nu = 0; nu < dim; ++nu) v[static_cast<std::size_t>(mu)] += omega.upper()(mu, nu) * grad[static_cast<std::size_t>(nu)];
    return v;
}

PhasePolynomial::Terms taylor_coefficients(const PhasePolynomial& f, const PhasePoint& xi) {
    require_point_size(xi, f.modes(), "taylor_coefficients");
    PhasePolynomial shifted(f.modes());
    for (const auto& [e, c] : f.terms()) {
        std::vector<MultiIndex> lower;
        std::vector<int> cur(e.size(), 0);
        dominated_indices(e.exponents(), 0, cur, lower);
        for (const auto& m : lower) {
            double coeff = c;
            for (std::size_t mu = 0; mu < e.size(); ++mu) {
                coeff *= binomial(e[mu], m[mu]);
                coeff *= std::pow(xi[mu], e[mu] - m[mu]);
            }
            shifted.add_term(m, coeff);
        }
    }
    return shifted.terms();
}

Quantizer::Quantizer(CanonicalOps ops, std::span<const PhasePolynomial> support) : ops_(std::move(ops)) {
    for (const auto& f : support) {
        if (f.modes() != ops_.modes()) throw DimensionError("Quantizer: polynomial modes differ from basis modes");
        if (f.degree() > kMaxQuantizedDegree)
            throw DomainError("Quantizer: degree " + std::to_string(f.degree()) + " exceeds cap " +
                              std::to_string(kMaxQuantizedDegree));
        for (const auto& [e, c] : f.terms()) {
            std::vector<MultiIndex> lower;
            std::vector<int> cur(e.size(), 0);
            dominated_indices(e.exponents(), 0, cur, lower);
            for (const auto& m : lower)
                if (!cache_.contains(m)) cache_.emplace(m, compute(m));
        }
    }
}

Quantizer::Quantizer(CanonicalOps ops, int max_degree) : ops_(std::move(ops)) {
    if (max_degree < 0 || max_degree > kMaxQuantizedDegree)
        throw DomainError("Quantizer: max_degree outside [0, " + std::to_string(kMaxQuantizedDegree) + "]");
    std::vector<MultiIndex> all;
    std::vector<int> cur(2 * static_cast<std::size_t>(ops_.modes()), 0);
    indices_up_to_degree(2 * ops_.modes(), max_degree, 0, 0, cur, all);
    for (const auto& m : all) cache_.emplace(m, compute(m));
}

Matrix Quantizer::compute(const MultiIndex& m) const {
    const auto d = static_cast<Eigen::Index>(ops_.basis.dim());
    if (m.degree() == 0) return Matrix::Identity(d, d);
    std::vector<Matrix> factors;
    std::vector<int> labels;
    for (std::size_t mu = 0; mu < m.size(); ++mu) {
        if (m[mu] == 0) continue;
        factors.push_back(ops_.y[mu].entries());
        labels.insert(labels.end(), static_cast<std::size_t>(m[mu]), static_cast<int>(factors.size() - 1));
    }
    return detail::average_over_orderings(factors, labels);
}

OperatorMatrix Quantizer::symmetrized(const MultiIndex& m) const {
    if (m.size() != 2 * static_cast<std::size_t>(ops_.modes()))
        throw DimensionError("Quantizer::symmetrized: multi-index length does not match 2n");
    if (m.degree() > kMaxQuantizedDegree) throw DomainError("Quantizer: degree cap exceeded");
    auto it = cache_.find(m);
    if (it != cache_.end()) return {ops_.basis, it->second};
    return {ops_.basis, compute(m)};
}

OperatorMatrix Quantizer::assemble(const PhasePolynomial::Terms& coefficients) const {
    const auto d = static_cast<Eigen::Index>(ops_.basis.dim());
    Matrix out = Matrix::Zero(d, d);
    for (const auto& [m, c] : coefficients) {
        if (m.degree() > kMaxQuantizedDegree) throw DomainError("Quantizer: degree cap exceeded");
        auto it = cache_.find(m);
        if (it != cache_.end()) {
            out += c * it->second;
        } else {
            out += c * compute(m);
        }
    }
    return {ops_.basis, std::move(out)};
}

OperatorMatrix Quantizer::quantize(const PhasePolynomial& f, const PhasePoint& xi) const {
    if (f.modes() != ops_.modes()) throw DimensionError("quantize: polynomial modes differ from basis modes");
    if (f.degree() > kMaxQuantizedDegree)
        throw DomainError("quantize: degree " + std::to_string(f.degree()) + " exceeds cap " +
                          std::to_string(kMaxQuantizedDegree));
    return assemble(taylor_coefficients(f, xi));
}

OperatorMatrix quantize_at(const PhasePolynomial& f, const PhasePoint& xi, const CanonicalOps& ops) {
    const Quantizer quantizer(ops, std::span<const PhasePolynomial>(&f, 1));
    return quantizer.quantize(f, xi);
}

}  // namespace psqm
