#pragma once

// Low-rank hypo-elliptic diffusion.
//
// For a rank-1 functional l with levels l_m = u_{M-m+1} (x) ... (x) u_M the
// scalars f_{k,m}(i) = <l_m, E[lift(step_1) ... lift(step_k) | B_0 = i]> obey
//
//   f_{k,m} = P f_{k-1,m} + sum_{r=1}^{m} c_r (P . C^{u_{M-m+1}} . ... . C^{u_{M-m+r}}) f_{k-1,m-r}
//
// with f_{0,0} = 1, f_{0,m} = 0 for m >= 1, '.' the Hadamard product and
// C^u_ij = <u, step(i -> j)>. All matrices share the graph's sparsity pattern,
// so one step costs O(M^2 E) and the whole recursion O(k M^2 E).

#include "hypograph/config.hpp"
#include "hypograph/error.hpp"
#include "hypograph/graph.hpp"
#include "hypograph/matrix.hpp"
#include "hypograph/sparse.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hypograph {

/// Component vectors u_1..u_M of a rank-1 functional; u[q - 1] holds u_q.
struct RankOneFunctional {
    std::vector<std::vector<double>> u;

    std::size_t max_degree() const { return u.size(); }
    std::size_t dims() const { return u.empty() ? 0 : u[0].size(); }

    bool operator==(const RankOneFunctional&) const = default;
};

/// n x (M + 1) state; column m holds f_{k,m}. Column 0 is identically 1.
class LowRankState {
public:
    LowRankState() = default;
    LowRankState(std::size_t n, std::size_t max_degree) : n_(n), width_(max_degree + 1), data_(n * width_, 0.0) {
        for (std::size_t i = 0; i < n; ++i) data_[i * width_] = 1.0;
    }

    std::size_t num_nodes() const { return n_; }
    std::size_t max_degree() const { return width_ - 1; }

    double operator()(std::size_t i, std::size_t m) const { return data_[i * width_ + m]; }
    double& operator()(std::size_t i, std::size_t m) { return data_[i * width_ + m]; }
    std::span<const double> node(std::size_t i) const { return {data_.data() + i * width_, width_}; }
    std::span<double> node(std::size_t i) { return {data_.data() + i * width_, width_}; }

    std::vector<double> column(std::size_t m) const {
        std::vector<double> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = (*this)(i, m);
        return out;
    }

    bool operator==(const LowRankState&) const = default;

private:
    std::size_t n_ = 0;
    std::size_t width_ = 1;
    std::vector<double> data_;
};

namespace lowrank_detail {

inline void check_functional(const LabelledGraph& g, const RankOneFunctional& ell, const FeatureConfig& cfg) {
    if (ell.max_degree() != cfg.max_degree)
        throw DimensionError("functional has " + std::to_string(ell.max_degree()) +
                             " components, config max_degree is " + std::to_string(cfg.max_degree));
    const std::size_t ld = cfg.lift_dim(g.attr_dim());
    for (const auto& u : ell.u) {
        if (u.size() != ld)
            throw DimensionError("functional component has dimension " + std::to_string(u.size()) +
                                 ", expected " + std::to_string(ld));
        for (double x : u)
            if (!std::isfinite(x)) throw NumericError("functional component is not finite");
    }
}

/// <u, start(f(i))> for every node.
inline std::vector<double> start_projection(const LabelledGraph& g, std::span<const double> u,
                                            const FeatureConfig& cfg) {
    const std::size_t off = cfg.time_param ? 1 : 0;
    const auto ua = u.subspan(off);
    std::vector<double> out(g.num_nodes());
    for (std::size_t i = 0; i < g.num_nodes(); ++i) out[i] = dot(ua, g.attribute(i));
    return out;
}

} // namespace lowrank_detail

/// Values of C^u on the graph pattern: <u, step(i -> j)> per stored entry.
/// Isolated self-loops use the step i -> i.
inline std::vector<double> cu_values(const LabelledGraph& g, std::span<const double> u, const FeatureConfig& cfg) {
    detail::require_dims(u.size() == cfg.lift_dim(g.attr_dim()), "cu_matrix: u dimension != lift dimension");
    const auto proj = lowrank_detail::start_projection(g, u, cfg);
    const double time_term = cfg.time_param ? u[0] : 0.0;
    const auto& p = *g.pattern();
    std::vector<double> vals(p.nnz());
    for (std::size_t i = 0; i < p.n; ++i)
        for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) {
            const std::size_t j = p.col[e];
            vals[e] = time_term + (cfg.diff ? proj[j] - proj[i] : proj[j]);
#ifdef HYPOGRAPH_INJECT_CU_SIGN_FLIP
            vals[e] = -vals[e];
#endif
        }
    return vals;
}

inline CsrMatrix cu_matrix(const LabelledGraph& g, std::span<const double> u, const FeatureConfig& cfg) {
    return CsrMatrix(g.pattern(), cu_values(g, u, cfg));
}

/// Runs cfg.walk_length steps of the recursion. If trace is non-null it
/// receives the state after every step (index 0 is the initial state).
inline LowRankState lowrank_recursion(const LabelledGraph& g, const CsrMatrix& P, const RankOneFunctional& ell,
                                      const FeatureConfig& cfg, std::vector<LowRankState>* trace = nullptr) {
    if (!(P.pattern() == *g.pattern())) throw DimensionError("lowrank_recursion: P pattern does not match graph");
    lowrank_detail::check_functional(g, ell, cfg);
    const std::size_t M = cfg.max_degree;
    const std::size_t n = g.num_nodes();
    const auto coeff = cfg.lift_coefficients();
    const auto& p = *g.pattern();
    const auto pv = P.values();
    const std::size_t nnz = p.nnz();

    // cvals[e * M + (q - 1)] = C^{u_q} at entry e
    std::vector<double> cvals(nnz * M);
    for (std::size_t q = 0; q < M; ++q) {
        const auto vals = cu_values(g, ell.u[q], cfg);
        for (std::size_t e = 0; e < nnz; ++e) cvals[e * M + q] = vals[e];
    }
    std::vector<double> c(M + 1);
    for (std::size_t r = 0; r <= M; ++r) c[r] = coeff[r];

    LowRankState prev(n, M), next(n, M);
    if (trace) {
        trace->clear();
        trace->push_back(prev);
    }
    std::vector<double> acc(M + 1);
    for (std::size_t step = 1; step <= cfg.walk_length; ++step) {
        for (std::size_t i = 0; i < n; ++i) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e) {
                const auto fj = prev.node(p.col[e]);
                const double* ce = cvals.data() + e * M;
                for (std::size_t m = 1; m <= M; ++m) {
                    // chain = P . C^{u_{M-m+1}} . ... . C^{u_{M-m+r}}, extended one factor per r
                    double chain = pv[e];
                    double s = chain * fj[m];
                    for (std::size_t r = 1; r <= m; ++r) {
                        chain *= ce[M - m + r - 1];
                        s += c[r] * chain * fj[m - r];
                    }
                    acc[m] += s;
                }
            }
            auto out = next.node(i);
            out[0] = 1.0;
            for (std::size_t m = 1; m <= M; ++m) {
                if (!std::isfinite(acc[m]))
                    throw NumericError("lowrank_recursion: non-finite value at k = " + std::to_string(step) +
                                       ", m = " + std::to_string(m));
                out[m] = acc[m];
            }
        }
        std::swap(prev, next);
        if (trace) trace->push_back(prev);
    }
    return prev;
}

/// Zero-start corrected values for every degree m = 1..M (column m - 1):
///   sum_{r=0}^{m} c_r F^{u_{M-m+1}}_i ... F^{u_{M-m+r}}_i f_{k,m-r}(i),
/// with F^u_i = <u, start(f(i))>. Without zero_start this is columns 1..M of
/// the state.
inline Matrix zerostart_correct_all(const LabelledGraph& g, const LowRankState& state, const RankOneFunctional& ell,
                                    const FeatureConfig& cfg) {
    lowrank_detail::check_functional(g, ell, cfg);
    const std::size_t M = cfg.max_degree;
    const std::size_t n = g.num_nodes();
    if (state.num_nodes() != n || state.max_degree() != M)
        throw DimensionError("zerostart_correct: state shape does not match graph/config");
    Matrix out(n, M);
    if (!cfg.zero_start) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t m = 1; m <= M; ++m) out(i, m - 1) = state(i, m);
        return out;
    }
    const auto coeff = cfg.lift_coefficients();
    std::vector<std::vector<double>> F(M);
    for (std::size_t q = 0; q < M; ++q) F[q] = lowrank_detail::start_projection(g, ell.u[q], cfg);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t m = 1; m <= M; ++m) {
            double s = state(i, m);
            double prod = 1.0;
            for (std::size_t r = 1; r <= m; ++r) {
                prod *= F[M - m + r - 1][i];
                s += coeff[r] * prod * state(i, m - r);
            }
            out(i, m - 1) = s;
        }
    return out;
}

/// <l_M, Phi_k(i)> per node (degree M only).
inline std::vector<double> zerostart_correct(const LabelledGraph& g, const LowRankState& state,
                                             const RankOneFunctional& ell, const FeatureConfig& cfg) {
    const Matrix all = zerostart_correct_all(g, state, ell, cfg);
    std::vector<double> out(all.rows());
    for (std::size_t i = 0; i < all.rows(); ++i) out[i] = all(i, all.cols() - 1);
    return out;
}

/// n x (R M) matrix; column j * M + (m - 1) holds functional j at degree m.
inline Matrix batch_features(const LabelledGraph& g, const CsrMatrix& P, std::span<const RankOneFunctional> functionals,
                             const FeatureConfig& cfg) {
    cfg.validate();
    const std::size_t M = cfg.max_degree;
    const std::size_t R = functionals.size();
    for (const auto& f : functionals)
        if (f.max_degree() != M) throw DimensionError("batch_features: inconsistent functional shapes");
    Matrix out(g.num_nodes(), R * M);
    for (std::size_t j = 0; j < R; ++j) {
        const auto state = lowrank_recursion(g, P, functionals[j], cfg);
        const Matrix vals = zerostart_correct_all(g, state, functionals[j], cfg);
        for (std::size_t i = 0; i < g.num_nodes(); ++i)
            for (std::size_t m = 0; m < M; ++m) out(i, j * M + m) = vals(i, m);
    }
    return out;
}

} // namespace hypograph
