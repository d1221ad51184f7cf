#pragma once

// Synthetic graphs and a wall-clock harness for batch_features.

#include "hypograph/graph.hpp"
#include "hypograph/lowrank_diffusion.hpp"
#include "hypograph/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <vector>

namespace hypograph {

/// Path with `edges` edges and uniform [-1, 1] attributes.
inline LabelledGraph make_path_graph(std::size_t edges, std::size_t d, std::uint64_t seed) {
    const std::size_t n = edges + 1;
    std::vector<Edge> es;
    es.reserve(edges);
    for (std::size_t i = 0; i < edges; ++i) es.emplace_back(i, i + 1);
    Rng rng(seed);
    Matrix attrs(n, d);
    for (double& x : attrs.data()) x = rng.uniform(-1.0, 1.0);
    return LabelledGraph(n, std::move(es), std::move(attrs));
}

/// rows x cols grid (4-neighbourhood).
inline LabelledGraph make_grid_graph(std::size_t rows, std::size_t cols, std::size_t d, std::uint64_t seed) {
    std::vector<Edge> es;
    const auto id = [cols](std::size_t r, std::size_t c) { return r * cols + c; };
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            if (c + 1 < cols) es.emplace_back(id(r, c), id(r, c + 1));
            if (r + 1 < rows) es.emplace_back(id(r, c), id(r + 1, c));
        }
    Rng rng(seed);
    Matrix attrs(rows * cols, d);
    for (double& x : attrs.data()) x = rng.uniform(-1.0, 1.0);
    return LabelledGraph(rows * cols, std::move(es), std::move(attrs));
}

struct BenchTiming {
    double median_seconds = 0.0;
    std::size_t inner = 1;  // calls per sample
    std::vector<double> samples;
};

/// One discarded warm-up run, then the median of `reps` timed samples. Fast
/// kernels are repeated inside a sample until it lasts about min_sample
/// seconds; samples are reported per call.
template <class Fn>
BenchTiming time_median(Fn&& fn, std::size_t reps, double min_sample = 0.02) {
    using clock = std::chrono::steady_clock;
    const auto elapsed = [](clock::time_point t0) { return std::chrono::duration<double>(clock::now() - t0).count(); };
    BenchTiming t;
    const auto w0 = clock::now();
    fn();
    const double warm = elapsed(w0);
    if (warm > 0.0 && warm < min_sample) t.inner = static_cast<std::size_t>(std::ceil(min_sample / warm));
    for (std::size_t r = 0; r < reps; ++r) {
        const auto start = clock::now();
        for (std::size_t i = 0; i < t.inner; ++i) fn();
        t.samples.push_back(elapsed(start) / static_cast<double>(t.inner));
    }
    auto sorted = t.samples;
    std::sort(sorted.begin(), sorted.end());
    t.median_seconds = sorted[sorted.size() / 2];
    return t;
}

/// Times batch_features with `rank` random functionals on g.
inline BenchTiming time_batch_features(const LabelledGraph& g, const FeatureConfig& cfg, std::size_t reps,
                                       std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t ld = cfg.lift_dim(g.attr_dim());
    const double bound = std::sqrt(3.0 / static_cast<double>(ld));
    std::vector<RankOneFunctional> fs(cfg.rank);
    for (auto& f : fs) {
        f.u.assign(cfg.max_degree, std::vector<double>(ld));
        for (auto& u : f.u)
            for (double& x : u) x = rng.uniform(-bound, bound);
    }
    const auto P = transition_matrix(g);
    volatile double sink = 0.0;
    return time_median(
        [&] {
            const Matrix out = batch_features(g, P, fs, cfg);
            sink = sink + out.data()[0];
        },
        reps);
}

} // namespace hypograph
