#pragma once

// Exact hypo-elliptic diffusion over the truncated tensor algebra.
//
// This is the reference path: every matrix entry is a full TensorSeq, so cost
// grows like d^M per entry. It is guarded to small graphs and degrees and
// exists to validate the low-rank engine.

#include "hypograph/config.hpp"
#include "hypograph/error.hpp"
#include "hypograph/graph.hpp"
#include "hypograph/sparse.hpp"
#include "hypograph/tensor_algebra.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace hypograph {

inline constexpr std::size_t kOracleMaxNodes = 64;
inline constexpr std::size_t kOracleMaxDegree = 4;
inline constexpr std::size_t kEnumerationBudget = 1'000'000;

using TensorVector = std::vector<TensorSeq>;

/// n x n matrix with TensorSeq entries on a sparse pattern.
class TensorMatrix {
public:
    TensorMatrix(PatternPtr pattern, std::vector<TensorSeq> entries)
        : pattern_(std::move(pattern)), entries_(std::move(entries)) {
        detail::require_dims(entries_.size() == pattern_->nnz(), "TensorMatrix: one entry per stored position");
        for (const auto& e : entries_)
            detail::require_dims(e.same_shape(entries_.front()), "TensorMatrix: entries must share d and M");
    }

    const CsrPattern& pattern() const { return *pattern_; }
    std::size_t n() const { return pattern_->n; }
    std::size_t dims() const { return entries_.empty() ? 1 : entries_.front().dims(); }
    std::size_t max_degree() const { return entries_.empty() ? 0 : entries_.front().max_degree(); }

    const TensorSeq& entry(std::size_t flat) const { return entries_[flat]; }

    /// Entry (i, j), or the zero element if not stored.
    TensorSeq get(std::size_t i, std::size_t j) const {
        const std::size_t e = pattern_->find(i, j);
        return e == pattern_->nnz() ? TensorSeq::zero(dims(), max_degree()) : entries_[e];
    }

    /// Degree-0 slice as a scalar sparse matrix.
    CsrMatrix degree_zero_slice() const {
        std::vector<double> vals(entries_.size());
        for (std::size_t e = 0; e < entries_.size(); ++e) vals[e] = entries_[e].level(0)[0];
        return CsrMatrix(pattern_, std::move(vals));
    }

private:
    PatternPtr pattern_;
    std::vector<TensorSeq> entries_;
};

namespace exact_detail {

inline void check_guard(std::size_t n, std::size_t M) {
    if (n > kOracleMaxNodes)
        throw GuardError("exact oracle: n = " + std::to_string(n) + " exceeds limit " +
                         std::to_string(kOracleMaxNodes));
    if (M > kOracleMaxDegree)
        throw GuardError("exact oracle: M = " + std::to_string(M) + " exceeds limit " +
                         std::to_string(kOracleMaxDegree));
}

inline void check_pattern(const LabelledGraph& g, const CsrMatrix& P) {
    if (!(P.pattern() == *g.pattern())) throw DimensionError("transition matrix pattern does not match graph");
}

} // namespace exact_detail

/// A~_ij = lift(step(i -> j)) for i ~ j. Isolated diagonals stay zero so the
/// degree-0 slice is the adjacency matrix.
inline TensorMatrix tensor_adjacency(const LabelledGraph& g, const FeatureConfig& cfg) {
    const auto& p = *g.pattern();
    const auto c = cfg.lift_coefficients();
    const std::size_t ld = cfg.lift_dim(g.attr_dim());
    std::vector<TensorSeq> entries;
    entries.reserve(p.nnz());
    for (std::size_t i = 0; i < p.n; ++i)
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) {
            const std::size_t j = p.col[e];
            if (i == j) entries.push_back(TensorSeq::zero(ld, cfg.max_degree));
            else entries.push_back(lift(step_element(g.attribute(i), g.attribute(j), cfg), c, cfg.max_degree));
        }
    return TensorMatrix(g.pattern(), std::move(entries));
}

/// P~_ij = P_ij lift(step(i -> j)), including isolated-node self-loops.
inline TensorMatrix tensor_transition(const LabelledGraph& g, const FeatureConfig& cfg, const CsrMatrix& P) {
    exact_detail::check_pattern(g, P);
    const auto& p = *g.pattern();
    const auto c = cfg.lift_coefficients();
    std::vector<TensorSeq> entries;
    entries.reserve(p.nnz());
    for (std::size_t i = 0; i < p.n; ++i)
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) {
            TensorSeq t = lift(step_element(g.attribute(i), g.attribute(p.col[e]), cfg), c, cfg.max_degree);
            t *= P.values()[e];
            entries.push_back(std::move(t));
        }
    return TensorMatrix(g.pattern(), std::move(entries));
}

/// P~^k v0 by k sparse matrix-vector products in the algebra.
inline TensorVector tensor_mat_power_apply(const TensorMatrix& Pt, std::size_t k, TensorVector v0) {
    exact_detail::check_guard(Pt.n(), Pt.max_degree());
    detail::require_dims(v0.size() == Pt.n(), "tensor_mat_power_apply: vector length != n");
    const auto& p = Pt.pattern();
    for (std::size_t step = 0; step < k; ++step) {
        TensorVector next;
        next.reserve(p.n);
        for (std::size_t i = 0; i < p.n; ++i) {
            TensorSeq acc = TensorSeq::zero(Pt.dims(), Pt.max_degree());
            for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e)
                acc += algebra_mul(Pt.entry(e), v0[p.col[e]]);
            next.push_back(std::move(acc));
        }
        v0 = std::move(next);
    }
    return v0;
}

/// w^T P~^k (row vector on the left).
inline TensorVector tensor_vec_power_apply_left(const TensorMatrix& Pt, std::size_t k, TensorVector w0) {
    exact_detail::check_guard(Pt.n(), Pt.max_degree());
    detail::require_dims(w0.size() == Pt.n(), "tensor_vec_power_apply_left: vector length != n");
    const auto& p = Pt.pattern();
    for (std::size_t step = 0; step < k; ++step) {
        TensorVector next(p.n, TensorSeq::zero(Pt.dims(), Pt.max_degree()));
        for (std::size_t i = 0; i < p.n; ++i)
            for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e)
                next[p.col[e]] += algebra_mul(w0[i], Pt.entry(e));
        w0 = std::move(next);
    }
    return w0;
}

namespace exact_detail {

template <class Visit>
void for_each_walk(const LabelledGraph& g, const CsrMatrix& P, std::size_t k, std::size_t start, Visit&& visit) {
    const auto& p = P.pattern();
    std::vector<std::size_t> walk{start};
    std::size_t visited = 0;
    auto rec = [&](auto&& self, double prob) -> void {
        if (walk.size() == k + 1) {
            if (++visited > kEnumerationBudget)
                throw GuardError("walk enumeration: more than " + std::to_string(kEnumerationBudget) + " walks");
            visit(walk, prob);
            return;
        }
        const std::size_t i = walk.back();
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) {
            if (P.values()[e] == 0.0) continue;
            walk.push_back(p.col[e]);
            self(self, prob * P.values()[e]);
            walk.pop_back();
        }
    };
    (void)g;
    rec(rec, 1.0);
}

} // namespace exact_detail

/// Sum over all length-k walks from start of probability times the sequence
/// feature of the walk's attribute sequence. Honours cfg.zero_start.
inline TensorSeq enumerate_walk_expectation(const LabelledGraph& g, const CsrMatrix& P, const FeatureConfig& cfg,
                                            std::size_t k, std::size_t start) {
    exact_detail::check_pattern(g, P);
    detail::require_dims(start < g.num_nodes(), "enumerate_walk_expectation: start node out of range");
    TensorSeq acc = TensorSeq::zero(cfg.lift_dim(g.attr_dim()), cfg.max_degree);
    std::vector<std::vector<double>> xs;
    exact_detail::for_each_walk(g, P, k, start, [&](const std::vector<std::size_t>& walk, double prob) {
        xs.clear();
        for (std::size_t v : walk) xs.emplace_back(g.attribute(v).begin(), g.attribute(v).end());
        acc += prob * sequence_feature(xs, cfg);
    });
    return acc;
}

/// Distribution of attribute sequences (f(B_0), ..., f(B_k)) of the walk with a
/// uniformly random start node.
inline std::map<std::vector<std::vector<double>>, double> walk_distribution(const LabelledGraph& g,
                                                                             const CsrMatrix& P, std::size_t k) {
    exact_detail::check_pattern(g, P);
    std::map<std::vector<std::vector<double>>, double> dist;
    const double start_prob = 1.0 / static_cast<double>(g.num_nodes());
    for (std::size_t s = 0; s < g.num_nodes(); ++s)
        exact_detail::for_each_walk(g, P, k, s, [&](const std::vector<std::size_t>& walk, double prob) {
            std::vector<std::vector<double>> xs;
            for (std::size_t v : walk) xs.emplace_back(g.attribute(v).begin(), g.attribute(v).end());
            dist[xs] += start_prob * prob;
        });
    return dist;
}

/// Node features: P~^k 1_H, left-multiplied by lift(start(f(i))) when
/// zero_start is on.
inline TensorVector node_features_exact(const LabelledGraph& g, const CsrMatrix& P, const FeatureConfig& cfg,
                                        std::size_t k) {
    const std::size_t ld = cfg.lift_dim(g.attr_dim());
    exact_detail::check_guard(g.num_nodes(), cfg.max_degree);
    const auto Pt = tensor_transition(g, cfg, P);
    TensorVector v = tensor_mat_power_apply(Pt, k, TensorVector(g.num_nodes(), TensorSeq::unit(ld, cfg.max_degree)));
    if (cfg.zero_start) {
        const auto c = cfg.lift_coefficients();
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = algebra_mul(lift(start_element(g.attribute(i), cfg), c, cfg.max_degree), v[i]);
    }
    return v;
}

/// Mean of the node features.
inline TensorSeq graph_feature_exact(const LabelledGraph& g, const CsrMatrix& P, const FeatureConfig& cfg,
                                     std::size_t k) {
    detail::require(g.num_nodes() > 0, "graph_feature_exact: empty graph");
    const auto v = node_features_exact(g, P, cfg, k);
    TensorSeq acc = TensorSeq::zero(v[0].dims(), v[0].max_degree());
    for (const auto& x : v) acc += x;
    acc *= 1.0 / static_cast<double>(v.size());
    return acc;
}

/// Forward diffusion (1/n) s^T P~^k with s_i the start factor (unit, or
/// lift(start(f(i))) under zero_start). Entry i is P[B_k = i] times the
/// conditional expectation of the walk feature given B_k = i.
inline TensorVector forward_diffusion_exact(const LabelledGraph& g, const CsrMatrix& P, const FeatureConfig& cfg,
                                            std::size_t k) {
    const std::size_t n = g.num_nodes();
    detail::require(n > 0, "forward_diffusion_exact: empty graph");
    exact_detail::check_guard(n, cfg.max_degree);
    const std::size_t ld = cfg.lift_dim(g.attr_dim());
    const auto c = cfg.lift_coefficients();
    TensorVector w0;
    w0.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        TensorSeq s = cfg.zero_start ? lift(start_element(g.attribute(i), cfg), c, cfg.max_degree)
                                     : TensorSeq::unit(ld, cfg.max_degree);
        s *= 1.0 / static_cast<double>(n);
        w0.push_back(std::move(s));
    }
    return tensor_vec_power_apply_left(tensor_transition(g, cfg, P), k, std::move(w0));
}

} // namespace hypograph
