#pragma once

#include "psqm/core_algebra.hpp"

#include <Eigen/SparseCore>

#include <vector>

namespace psqm::detail {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

inline SparseMatrix to_sparse(const Matrix& m) {
    SparseMatrix s = m.sparseView(Complex(0.0), 0.0);
    s.makeCompressed();
    return s;
}

template <typename Mat>
void accumulate_orderings(const std::vector<Mat>& factors, std::vector<int>& remaining,
                          const Mat& prefix, bool has_prefix, int left, Matrix& sum, long& count) {
    if (left == 0) {
        sum += Matrix(prefix);
        ++count;
        return;
    }
    for (std::size_t label = 0; label < factors.size(); ++label) {
        if (remaining[label] == 0) continue;
        --remaining[label];
        if (has_prefix) {
            const Mat next = prefix * factors[label];
            accumulate_orderings(factors, remaining, next, true, left - 1, sum, count);
        } else {
            accumulate_orderings(factors, remaining, factors[label], true, left - 1, sum, count);
        }
        ++remaining[label];
    }
}

/// Average of the products over all distinct orderings of the labelled
/// multiset. Banded inputs (the canonical operators and their products) go
/// through sparse multiplication.
inline Matrix average_over_orderings(const std::vector<Matrix>& factors, const std::vector<int>& labels) {
    const Eigen::Index d = factors.front().rows();
    std::vector<int> counts(factors.size(), 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];

    bool sparse = true;
    for (const auto& f : factors) {
        const auto nnz = (f.array() != Complex(0.0)).count();
        if (nnz * 8 > d * d) sparse = false;
    }

    Matrix sum = Matrix::Zero(d, d);
    long count = 0;
    const int k = static_cast<int>(labels.size());
    if (sparse) {
        std::vector<SparseMatrix> sf;
        sf.reserve(factors.size());
        for (const auto& f : factors) sf.push_back(to_sparse(f));
        accumulate_orderings(sf, counts, SparseMatrix(d, d), false, k, sum, count);
    } else {
        accumulate_orderings(factors, counts, Matrix(), false, k, sum, count);
    }
    return sum / static_cast<double>(count);
}

}  // namespace psqm::detail
