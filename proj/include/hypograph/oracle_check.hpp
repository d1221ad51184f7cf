#pragma once

// Randomized equivalence check between the low-rank engine and the exact
// tensor-algebra diffusion.

#include "hypograph/config.hpp"
#include "hypograph/exact_diffusion.hpp"
#include "hypograph/graph.hpp"
#include "hypograph/lowrank_diffusion.hpp"
#include "hypograph/random.hpp"
#include "hypograph/tensor_algebra.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace hypograph {

/// Dense level m of a rank-1 functional: u_{M-m+1} (x) ... (x) u_M.
inline DenseTensor functional_level(const RankOneFunctional& ell, std::size_t m) {
    const std::size_t M = ell.max_degree();
    detail::require(m <= M, "functional_level: degree above M");
    DenseTensor t = DenseTensor::scalar(1.0, ell.dims());
    for (std::size_t q = M - m + 1; q <= M; ++q) t = tensor_product(t, DenseTensor::vector(ell.u[q - 1]));
    return t;
}

/// Algebra element with level m of the functional and zeros elsewhere.
inline TensorSeq functional_as_seq(const RankOneFunctional& ell, std::size_t m, std::size_t max_degree) {
    TensorSeq s = TensorSeq::zero(ell.dims(), max_degree);
    s.level(m) = functional_level(ell, m);
    return s;
}

/// Exact counterpart of batch_features, via the tensor-valued diffusion.
inline Matrix batch_features_exact(const LabelledGraph& g, const CsrMatrix& P,
                                   std::span<const RankOneFunctional> functionals, const FeatureConfig& cfg) {
    const std::size_t M = cfg.max_degree;
    const auto phi = node_features_exact(g, P, cfg, cfg.walk_length);
    Matrix out(g.num_nodes(), functionals.size() * M);
    for (std::size_t j = 0; j < functionals.size(); ++j)
        for (std::size_t m = 1; m <= M; ++m) {
            const TensorSeq ell = functional_as_seq(functionals[j], m, M);
            for (std::size_t i = 0; i < g.num_nodes(); ++i) out(i, j * M + m - 1) = inner_product(ell, phi[i]);
        }
    return out;
}

/// |a - b| / max(1, |b|), maximised over entries.
inline double max_relative_error(const Matrix& a, const Matrix& b) {
    detail::require_dims(a.rows() == b.rows() && a.cols() == b.cols(), "max_relative_error: shape mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        const double x = a.data()[i], y = b.data()[i];
        worst = std::max(worst, std::abs(x - y) / std::max(1.0, std::abs(y)));
    }
    return worst;
}

/// Erdos-Renyi style graph with uniform attributes in [-1, 1].
inline LabelledGraph random_graph(Rng& rng, std::size_t n, std::size_t d, double edge_prob) {
    std::vector<Edge> edges;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            if (rng.uniform() < edge_prob) edges.emplace_back(a, b);
    Matrix attrs(n, d);
    for (double& x : attrs.data()) x = rng.uniform(-1.0, 1.0);
    return LabelledGraph(n, std::move(edges), std::move(attrs));
}

/// Functional with unit-norm random component vectors.
inline RankOneFunctional random_unit_functional(Rng& rng, std::size_t dims, std::size_t max_degree) {
    RankOneFunctional f;
    for (std::size_t q = 0; q < max_degree; ++q) {
        std::vector<double> u(dims);
        double norm = 0.0;
        while (norm < 1e-3) {
            for (double& x : u) x = rng.uniform(-1.0, 1.0);
            norm = std::sqrt(dot(u, u));
        }
        for (double& x : u) x /= norm;
        f.u.push_back(std::move(u));
    }
    return f;
}

enum class TransitionKind { Uniform, Weighted, Attention };

inline const char* to_string(TransitionKind k) {
    switch (k) {
    case TransitionKind::Uniform: return "uniform";
    case TransitionKind::Weighted: return "weighted";
    case TransitionKind::Attention: return "attention";
    }
    return "?";
}

inline SparseRowStochastic random_transition(Rng& rng, const LabelledGraph& g, TransitionKind kind) {
    switch (kind) {
    case TransitionKind::Uniform: return transition_matrix(g);
    case TransitionKind::Weighted: {
        std::vector<double> w(g.num_edges());
        for (double& x : w) x = rng.uniform(0.1, 2.0);
        return weighted_transition(g, w);
    }
    case TransitionKind::Attention: {
        const std::size_t heads = 1 + static_cast<std::size_t>(rng.next() % 2);
        AttentionParams a = AttentionParams::zeros(g.attr_dim(), heads);
        for (auto& h : a.heads) {
            for (double& x : h.w_source) x = rng.uniform(-1.0, 1.0);
            for (double& x : h.w_target) x = rng.uniform(-1.0, 1.0);
        }
        return attention_transition(g, a);
    }
    }
    return transition_matrix(g);
}

struct CheckOptions {
    std::size_t graphs = 20;
    std::size_t max_nodes = 8;
    std::size_t max_dim = 3;
    std::size_t max_walk = 4;
    std::size_t max_degree = 3;
    std::size_t functionals = 2;
    std::uint64_t seed = 0;
    double tolerance = 1e-10;
};

struct CheckRow {
    std::string config;
    std::size_t cases = 0;
    double max_rel_error = 0.0;
};

struct CheckReport {
    std::vector<CheckRow> rows;
    std::size_t cases = 0;
    double max_rel_error = 0.0;
    double tolerance = 1e-10;

    bool passed() const { return max_rel_error <= tolerance; }
};

/// Every random graph is evaluated under all 8 {diff, zero_start, time_param}
/// combinations and all three transition kinds; one row per combination.
inline CheckReport run_oracle_check(const CheckOptions& opt) {
    if (opt.max_nodes > kOracleMaxNodes)
        throw GuardError("check: max nodes " + std::to_string(opt.max_nodes) + " exceeds oracle limit " +
                         std::to_string(kOracleMaxNodes));
    if (opt.max_degree > kOracleMaxDegree)
        throw GuardError("check: max degree " + std::to_string(opt.max_degree) + " exceeds oracle limit " +
                         std::to_string(kOracleMaxDegree));
    detail::require(opt.max_nodes >= 1 && opt.max_dim >= 1 && opt.max_degree >= 1 && opt.functionals >= 1,
                    "check: sizes must be >= 1");

    constexpr std::array kinds{TransitionKind::Uniform, TransitionKind::Weighted, TransitionKind::Attention};
    CheckReport report;
    report.tolerance = opt.tolerance;
    for (int flags = 0; flags < 8; ++flags)
        for (auto kind : kinds) {
            FeatureConfig probe;
            probe.diff = flags & 1;
            probe.zero_start = flags & 2;
            probe.time_param = flags & 4;
            report.rows.push_back({probe.flags_string() + "/" + to_string(kind), 0, 0.0});
        }

    for (std::size_t gi = 0; gi < opt.graphs; ++gi) {
        Rng rng(derive_seed(opt.seed, {gi}));
        const std::size_t n = 1 + rng.next() % opt.max_nodes;
        const std::size_t d = 1 + rng.next() % opt.max_dim;
        const double p_edge = rng.uniform(0.2, 0.8);
        const LabelledGraph g = random_graph(rng, n, d, p_edge);
        for (int flags = 0; flags < 8; ++flags)
            for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
                FeatureConfig cfg;
                cfg.diff = flags & 1;
                cfg.zero_start = flags & 2;
                cfg.time_param = flags & 4;
                cfg.walk_length = rng.next() % (opt.max_walk + 1);
                cfg.max_degree = 1 + rng.next() % opt.max_degree;
                const auto P = random_transition(rng, g, kinds[ki]);
                std::vector<RankOneFunctional> fs;
                for (std::size_t j = 0; j < opt.functionals; ++j)
                    fs.push_back(random_unit_functional(rng, cfg.lift_dim(d), cfg.max_degree));
                const Matrix fast = batch_features(g, P, fs, cfg);
                const Matrix ref = batch_features_exact(g, P, fs, cfg);
                const double err = max_relative_error(fast, ref);
                auto& row = report.rows[static_cast<std::size_t>(flags) * kinds.size() + ki];
                row.cases += 1;
                row.max_rel_error = std::max(row.max_rel_error, err);
                report.cases += 1;
                report.max_rel_error = std::max(report.max_rel_error, err);
            }
    }
    return report;
}

} // namespace hypograph
