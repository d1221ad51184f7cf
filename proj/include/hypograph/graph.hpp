#pragma once

// Labelled graphs and random-walk transition matrices.

#include "hypograph/error.hpp"
#include "hypograph/matrix.hpp"
#include "hypograph/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hypograph {

using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected graph with real node attributes (row i of attributes() is f(i)).
/// Nodes are 0-based. Edges are stored once as (min, max), sorted, without
/// duplicates or self-loops.
class LabelledGraph {
public:
    LabelledGraph() : LabelledGraph(0, {}, Matrix(0, 1)) {}

    LabelledGraph(std::size_t n, std::vector<Edge> edges, Matrix attributes)
        : n_(n), attributes_(std::move(attributes)) {
        detail::require_dims(attributes_.rows() == n, "LabelledGraph: attribute rows != node count");
        for (auto [a, b] : edges) {
            if (a >= n || b >= n) throw DataError("LabelledGraph: edge endpoint out of range");
            if (a == b) throw DataError("LabelledGraph: self-loop in edge list");
            edges_.emplace_back(std::min(a, b), std::max(a, b));
        }
        std::sort(edges_.begin(), edges_.end());
        edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
        build_pattern();
    }

    std::size_t num_nodes() const { return n_; }
    std::size_t num_edges() const { return edges_.size(); }
    std::size_t attr_dim() const { return attributes_.cols(); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Matrix& attributes() const { return attributes_; }
    std::span<const double> attribute(std::size_t i) const { return attributes_.row(i); }

    std::size_t degree(std::size_t i) const { return degree_[i]; }
    bool isolated(std::size_t i) const { return degree_[i] == 0; }

    /// Both edge directions plus a diagonal entry for each isolated node.
    const PatternPtr& pattern() const { return pattern_; }

    /// Index of the undirected edge {a, b} in edges(), or num_edges().
    std::size_t edge_index(std::size_t a, std::size_t b) const {
        const Edge key{std::min(a, b), std::max(a, b)};
        auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
        return (it != edges_.end() && *it == key) ? static_cast<std::size_t>(it - edges_.begin())
                                                  : edges_.size();
    }

    /// Same graph with replaced attributes (used when stacking layers).
    LabelledGraph with_attributes(Matrix attributes) const {
        detail::require_dims(attributes.rows() == n_, "with_attributes: row count mismatch");
        LabelledGraph g = *this;
        g.attributes_ = std::move(attributes);
        return g;
    }

    bool operator==(const LabelledGraph& o) const {
        return n_ == o.n_ && edges_ == o.edges_ && attributes_ == o.attributes_;
    }

private:
    void build_pattern() {
        degree_.assign(n_, 0);
        for (auto [a, b] : edges_) {
            ++degree_[a];
            ++degree_[b];
        }
        std::vector<std::vector<std::size_t>> nbrs(n_);
        for (auto [a, b] : edges_) {
            nbrs[a].push_back(b);
            nbrs[b].push_back(a);
        }
        auto p = std::make_shared<CsrPattern>();
        p->n = n_;
        p->row_ptr.assign(n_ + 1, 0);
        for (std::size_t i = 0; i < n_; ++i) {
            auto& row = nbrs[i];
            if (row.empty()) row.push_back(i);
            std::sort(row.begin(), row.end());
            p->row_ptr[i + 1] = p->row_ptr[i] + row.size();
            p->col.insert(p->col.end(), row.begin(), row.end());
        }
        pattern_ = std::move(p);
    }

    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    Matrix attributes_;
    std::vector<std::size_t> degree_;
    PatternPtr pattern_;
};

/// Relabels node i as perm[i].
inline LabelledGraph permute_graph(const LabelledGraph& g, std::span<const std::size_t> perm) {
    detail::require_dims(perm.size() == g.num_nodes(), "permute_graph: permutation length mismatch");
    std::vector<Edge> edges;
    edges.reserve(g.num_edges());
    for (auto [a, b] : g.edges()) edges.emplace_back(perm[a], perm[b]);
    Matrix attrs(g.num_nodes(), g.attr_dim());
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
        auto src = g.attribute(i);
        std::copy(src.begin(), src.end(), attrs.row(perm[i]).begin());
    }
    return LabelledGraph(g.num_nodes(), std::move(edges), std::move(attrs));
}

/// P_ij = 1/deg(i) for each neighbour j; isolated nodes get P_ii = 1.
inline SparseRowStochastic transition_matrix(const LabelledGraph& g) {
    const auto& p = *g.pattern();
    std::vector<double> vals(p.nnz());
    for (std::size_t i = 0; i < p.n; ++i) {
        const double w = g.isolated(i) ? 1.0 : 1.0 / static_cast<double>(g.degree(i));
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) vals[e] = w;
    }
    return SparseRowStochastic(g.pattern(), std::move(vals));
}

/// P_ij = c_ij / sum_j' c_ij'. weights[e] belongs to g.edges()[e] and is used
/// for both directions.
inline SparseRowStochastic weighted_transition(const LabelledGraph& g, std::span<const double> weights) {
    detail::require_dims(weights.size() == g.num_edges(), "weighted_transition: need one weight per edge");
    for (double w : weights)
        if (!(w > 0.0) || !std::isfinite(w)) throw ArgumentError("weighted_transition: weights must be positive");
    const auto& p = *g.pattern();
    std::vector<double> vals(p.nnz());
    for (std::size_t i = 0; i < p.n; ++i) {
        if (g.isolated(i)) {
            vals[p.row_begin(i)] = 1.0;
            continue;
        }
        double total = 0.0;
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) {
            vals[e] = weights[g.edge_index(i, p.col[e])];
            total += vals[e];
        }
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) vals[e] = vals[e] / total;
    }
    return SparseRowStochastic(g.pattern(), std::move(vals));
}

/// Additive attention scores a(f(i), f(j)) = LeakyRelu_0.2(<w_s, f(i)> + <w_t, f(j)>).
/// Each head carries its own (w_s, w_t).
struct AttentionParams {
    static constexpr double leaky_slope = 0.2;

    struct Head {
        std::vector<double> w_source;
        std::vector<double> w_target;
    };
    std::vector<Head> heads;

    static AttentionParams zeros(std::size_t d, std::size_t num_heads = 1) {
        AttentionParams p;
        p.heads.assign(num_heads, Head{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)});
        return p;
    }

    std::size_t num_heads() const { return heads.size(); }
    std::size_t dim() const { return heads.empty() ? 0 : heads[0].w_source.size(); }
};

inline double leaky_relu(double x, double slope) { return x >= 0.0 ? x : slope * x; }

/// Row i is the softmax over neighbours k of the attention score a(f(i), f(k)).
/// Several heads are averaged entry-wise.
inline SparseRowStochastic attention_transition(const LabelledGraph& g, const AttentionParams& params) {
    detail::require_dims(params.num_heads() >= 1, "attention_transition: need at least one head");
    for (const auto& h : params.heads)
        detail::require_dims(h.w_source.size() == g.attr_dim() && h.w_target.size() == g.attr_dim(),
                             "attention_transition: parameter dimension != attribute dimension");
    const auto& p = *g.pattern();
    const std::size_t n = p.n;
    const std::size_t H = params.num_heads();

    std::vector<std::vector<double>> per_head(H, std::vector<double>(p.nnz()));
    std::vector<double> src(n), tgt(n);
    for (std::size_t h = 0; h < H; ++h) {
        const auto& head = params.heads[h];
        for (std::size_t i = 0; i < n; ++i) {
            src[i] = dot(head.w_source, g.attribute(i));
            tgt[i] = dot(head.w_target, g.attribute(i));
        }
        auto& vals = per_head[h];
        for (std::size_t i = 0; i < n; ++i) {
            if (g.isolated(i)) {
                vals[p.row_begin(i)] = 1.0;
                continue;
            }
            double mx = -INFINITY;
            for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) {
                vals[e] = leaky_relu(src[i] + tgt[p.col[e]], AttentionParams::leaky_slope);
                mx = std::max(mx, vals[e]);
            }
            double total = 0.0;
            for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) {
                vals[e] = std::exp(vals[e] - mx);
                total += vals[e];
            }
            for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) vals[e] = vals[e] / total;
        }
    }
    if (H == 1) return SparseRowStochastic(g.pattern(), std::move(per_head[0]));

    // Shifted mean: identical heads reproduce the single-head values exactly.
    std::vector<double> avg = per_head[0];
    for (std::size_t e = 0; e < avg.size(); ++e) {
        double shift = 0.0;
        for (std::size_t h = 1; h < H; ++h) shift += per_head[h][e] - per_head[0][e];
        avg[e] += shift / static_cast<double>(H);
    }
    return SparseRowStochastic(g.pattern(), std::move(avg));
}

/// I - P for the uniform random walk.
inline CsrMatrix normalized_laplacian(const LabelledGraph& g) {
    const auto P = transition_matrix(g);
    const auto& p = P.pattern();
    // The pattern may lack diagonal entries; build one that includes them.
    auto q = std::make_shared<CsrPattern>();
    q->n = p.n;
    q->row_ptr.assign(p.n + 1, 0);
    std::vector<double> vals;
    for (std::size_t i = 0; i < p.n; ++i) {
        bool diag_done = false;
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) {
            const std::size_t j = p.col[e];
            if (!diag_done && j >= i) {
                q->col.push_back(i);
                vals.push_back(1.0 - (j == i ? P.values()[e] : 0.0));
                diag_done = true;
                if (j == i) continue;
            }
            q->col.push_back(j);
            vals.push_back(-P.values()[e]);
        }
        if (!diag_done) {
            q->col.push_back(i);
            vals.push_back(1.0);
        }
        q->row_ptr[i + 1] = q->col.size();
    }
    return CsrMatrix(std::move(q), std::move(vals));
}

/// P^k U_0 with U_0 the attribute matrix, by k sparse products per column.
inline Matrix classic_diffusion(const LabelledGraph& g, const CsrMatrix& P, std::size_t k) {
    const std::size_t n = g.num_nodes();
    const std::size_t d = g.attr_dim();
    Matrix out = g.attributes();
    std::vector<double> col(n), next(n);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t i = 0; i < n; ++i) col[i] = out(i, a);
        for (std::size_t step = 0; step < k; ++step) {
            P.multiply(col, next);
            std::swap(col, next);
        }
        for (std::size_t i = 0; i < n; ++i) out(i, a) = col[i];
    }
    return out;
}

inline Matrix classic_diffusion(const LabelledGraph& g, std::size_t k) {
    return classic_diffusion(g, transition_matrix(g), k);
}

} // namespace hypograph
