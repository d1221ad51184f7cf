#pragma once

// Compressed-row sparse matrices sharing one immutable sparsity pattern.
//
// Every matrix built for a graph (P, C^u, the Hadamard chains) lives on the
// same pattern: the adjacency in both directions plus a diagonal entry for each
// isolated node. Only value arrays differ.

#include "hypograph/error.hpp"
#include "hypograph/matrix.hpp"

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace hypograph {

struct CsrPattern {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;  // n + 1 offsets
    std::vector<std::size_t> col;      // column per stored entry, sorted within a row

    std::size_t nnz() const { return col.size(); }
    std::size_t row_begin(std::size_t i) const { return row_ptr[i]; }
    std::size_t row_end(std::size_t i) const { return row_ptr[i + 1]; }

    /// Position of (i, j) in the value array, or nnz() if not stored.
    std::size_t find(std::size_t i, std::size_t j) const {
        for (std::size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e)
            if (col[e] == j) return e;
        return nnz();
    }

    bool operator==(const CsrPattern&) const = default;
};

using PatternPtr = std::shared_ptr<const CsrPattern>;

class CsrMatrix {
public:
    CsrMatrix() = default;
    CsrMatrix(PatternPtr pattern, std::vector<double> values)
        : pattern_(std::move(pattern)), values_(std::move(values)) {
        detail::require_dims(pattern_ != nullptr, "CsrMatrix: null pattern");
        detail::require_dims(values_.size() == pattern_->nnz(), "CsrMatrix: values size != nnz");
    }
    explicit CsrMatrix(PatternPtr pattern)
        : CsrMatrix(pattern, std::vector<double>(pattern ? pattern->nnz() : 0, 0.0)) {}

    const CsrPattern& pattern() const { return *pattern_; }
    const PatternPtr& pattern_ptr() const { return pattern_; }
    std::size_t n() const { return pattern_->n; }
    std::size_t nnz() const { return values_.size(); }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    /// Entry (i, j); zero when not stored.
    double get(std::size_t i, std::size_t j) const {
        const std::size_t e = pattern_->find(i, j);
        return e == nnz() ? 0.0 : values_[e];
    }

    Matrix to_dense() const {
        Matrix out(n(), n());
        for (std::size_t i = 0; i < n(); ++i)
            for (std::size_t e = pattern_->row_begin(i); e < pattern_->row_end(i); ++e)
                out(i, pattern_->col[e]) += values_[e];
        return out;
    }

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const {
        detail::require_dims(x.size() == n() && y.size() == n(), "CsrMatrix::multiply: length mismatch");
        const auto& p = *pattern_;
        for (std::size_t i = 0; i < p.n; ++i) {
            double s = 0.0;
            for (std::size_t e = p.row_ptr[i]; e < p.row_ptr[i + 1]; ++e) s += values_[e] * x[p.col[e]];
            y[i] = s;
        }
    }

    std::vector<double> multiply(std::span<const double> x) const {
        std::vector<double> y(n());
        multiply(x, y);
        return y;
    }

    bool operator==(const CsrMatrix& o) const {
        return *pattern_ == *o.pattern_ && values_ == o.values_;
    }

private:
    PatternPtr pattern_;
    std::vector<double> values_;
};

/// Row-stochastic transition matrix. Construction checks that each non-empty
/// row sums to 1 within 1e-12 and that entries lie in [0, 1].
class SparseRowStochastic : public CsrMatrix {
public:
    SparseRowStochastic() = default;
    SparseRowStochastic(PatternPtr pat, std::vector<double> vals)
        : CsrMatrix(std::move(pat), std::move(vals)) {
        const auto& p = pattern();
        const auto v = this->values();
        for (std::size_t i = 0; i < p.n; ++i) {
            if (p.row_begin(i) == p.row_end(i)) continue;
            double s = 0.0;
            for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) {
                if (!(v[e] >= 0.0 && v[e] <= 1.0))
                    throw NumericError("transition matrix: entry outside [0, 1]");
                s += v[e];
            }
            if (std::abs(s - 1.0) > 1e-12) throw NumericError("transition matrix: row does not sum to 1");
        }
    }
};

} // namespace hypograph
