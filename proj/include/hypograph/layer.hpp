#pragma once

// Layers built from low-rank diffusion: R rank-1 functionals evaluated at all
// degrees 1..M, a linear mix R M -> R, stacking, and pooling. Forward only.

#include "hypograph/config.hpp"
#include "hypograph/error.hpp"
#include "hypograph/graph.hpp"
#include "hypograph/lowrank_diffusion.hpp"
#include "hypograph/matrix.hpp"
#include "hypograph/random.hpp"
#include "hypograph/tensor_algebra.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace hypograph {

struct LayerParams {
    FeatureConfig cfg;
    std::size_t input_dim = 0;
    std::vector<RankOneFunctional> functionals;  // cfg.rank of them
    Matrix mixing;                               // R x (R M)
    std::vector<double> bias;                    // R
    std::optional<AttentionParams> attention;

    std::size_t output_dim() const { return functionals.size(); }

    void validate() const {
        cfg.validate();
        const std::size_t R = cfg.rank;
        const std::size_t M = cfg.max_degree;
        if (functionals.size() != R) throw DimensionError("layer: need rank functionals");
        for (const auto& f : functionals) {
            if (f.max_degree() != M) throw DimensionError("layer: functional degree != max_degree");
            for (const auto& u : f.u)
                if (u.size() != cfg.lift_dim(input_dim)) throw DimensionError("layer: functional dimension mismatch");
        }
        if (mixing.rows() != R || mixing.cols() != R * M) throw DimensionError("layer: mixing must be R x (R M)");
        if (bias.size() != R) throw DimensionError("layer: bias must have length R");
        if (attention) {
            if (attention->num_heads() == 0) throw DimensionError("layer: attention needs at least one head");
            for (const auto& h : attention->heads)
                if (h.w_source.size() != input_dim || h.w_target.size() != input_dim)
                    throw DimensionError("layer: attention dimension != input dimension");
        }
    }
};

enum class Pooling { Mean, Sum };

struct ModelConfig {
    std::vector<LayerParams> layers;
    Pooling pooling = Pooling::Mean;
    std::uint64_t seed = 0;

    void validate() const {
        if (layers.empty()) throw DimensionError("model: need at least one layer");
        for (std::size_t l = 0; l < layers.size(); ++l) {
            layers[l].validate();
            if (l > 0 && layers[l].input_dim != layers[l - 1].output_dim())
                throw DimensionError("model: layer " + std::to_string(l) + " input width " +
                                     std::to_string(layers[l].input_dim) + " != previous output width " +
                                     std::to_string(layers[l - 1].output_dim()));
        }
    }
};

/// Draws functionals, mixing weights and (optionally) attention heads from a
/// centred uniform distribution with variance 1 / fan_in, i.e. on
/// [-sqrt(3 / fan_in), sqrt(3 / fan_in)]. fan_in is the u-vector dimension for
/// functionals and attention, R M for the mixing matrix. Bias starts at zero.
inline LayerParams init_params(std::size_t input_dim, const FeatureConfig& cfg, std::uint64_t seed,
                               std::size_t attention_heads = 0, std::uint64_t layer_index = 0) {
    cfg.validate();
    detail::require(input_dim >= 1, "init_params: input dimension must be >= 1");
    LayerParams p;
    p.cfg = cfg;
    p.input_dim = input_dim;
    const std::size_t R = cfg.rank;
    const std::size_t M = cfg.max_degree;
    const std::size_t ld = cfg.lift_dim(input_dim);

    const double ub = std::sqrt(3.0 / static_cast<double>(ld));
    for (std::size_t j = 0; j < R; ++j) {
        Rng rng(derive_seed(seed, {layer_index, 0, j}));
        RankOneFunctional f;
        f.u.assign(M, std::vector<double>(ld));
        for (auto& u : f.u)
            for (double& x : u) x = rng.uniform(-ub, ub);
        p.functionals.push_back(std::move(f));
    }

    const double mb = std::sqrt(3.0 / static_cast<double>(R * M));
    p.mixing = Matrix(R, R * M);
    for (std::size_t r = 0; r < R; ++r) {
        Rng rng(derive_seed(seed, {layer_index, 1, r}));
        for (double& x : p.mixing.row(r)) x = rng.uniform(-mb, mb);
    }
    p.bias.assign(R, 0.0);

    if (attention_heads > 0) {
        const double ab = std::sqrt(3.0 / static_cast<double>(input_dim));
        AttentionParams a;
        for (std::size_t h = 0; h < attention_heads; ++h) {
            Rng rng(derive_seed(seed, {layer_index, 2, h}));
            AttentionParams::Head head{std::vector<double>(input_dim), std::vector<double>(input_dim)};
            for (double& x : head.w_source) x = rng.uniform(-ab, ab);
            for (double& x : head.w_target) x = rng.uniform(-ab, ab);
            a.heads.push_back(std::move(head));
        }
        p.attention = std::move(a);
    }
    return p;
}

/// Transition matrix used by a layer: attention-weighted when the layer has
/// attention parameters, uniform otherwise.
inline SparseRowStochastic layer_transition(const LabelledGraph& g, const LayerParams& p) {
    return p.attention ? attention_transition(g, *p.attention) : transition_matrix(g);
}

/// n x R node outputs for one layer; attributes replace g's attributes.
inline Matrix layer_forward(const LabelledGraph& g, const Matrix& attributes, const LayerParams& p) {
    p.validate();
    if (attributes.cols() != p.input_dim)
        throw DimensionError("layer_forward: attribute width " + std::to_string(attributes.cols()) +
                             " != layer input width " + std::to_string(p.input_dim));
    const LabelledGraph h = g.with_attributes(attributes);
    const auto P = layer_transition(h, p);
    const Matrix feats = batch_features(h, P, p.functionals, p.cfg);
    const std::size_t n = h.num_nodes();
    const std::size_t R = p.output_dim();
    Matrix out(n, R);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = feats.row(i);
        for (std::size_t r = 0; r < R; ++r) out(i, r) = p.bias[r] + dot(p.mixing.row(r), x);
    }
    return out;
}

inline Matrix layer_forward(const LabelledGraph& g, const LayerParams& p) {
    return layer_forward(g, g.attributes(), p);
}

/// Node outputs of the last layer after folding all layers.
inline Matrix model_node_forward(const LabelledGraph& g, const ModelConfig& m) {
    m.validate();
    Matrix x = g.attributes();
    for (const auto& layer : m.layers) x = layer_forward(g, x, layer);
    return x;
}

inline std::vector<double> pool(const Matrix& nodes, Pooling mode) {
    std::vector<double> out(nodes.cols(), 0.0);
    for (std::size_t i = 0; i < nodes.rows(); ++i)
        for (std::size_t c = 0; c < nodes.cols(); ++c) out[c] += nodes(i, c);
    if (mode == Pooling::Mean && nodes.rows() > 0)
        for (double& v : out) v /= static_cast<double>(nodes.rows());
    return out;
}

/// Pooled graph representation.
inline std::vector<double> model_forward(const LabelledGraph& g, const ModelConfig& m) {
    return pool(model_node_forward(g, m), m.pooling);
}

/// Builds a stack of `layers` layers of equal configuration: the first reads
/// input_dim attributes, the rest read the previous layer's R outputs.
inline ModelConfig make_model(std::size_t input_dim, const FeatureConfig& cfg, std::size_t layers,
                              std::uint64_t seed, std::size_t attention_heads = 0, Pooling pooling = Pooling::Mean) {
    detail::require(layers >= 1, "make_model: need at least one layer");
    ModelConfig m;
    m.pooling = pooling;
    m.seed = seed;
    std::size_t d = input_dim;
    for (std::size_t l = 0; l < layers; ++l) {
        m.layers.push_back(init_params(d, cfg, seed, attention_heads, l));
        d = cfg.rank;
    }
    return m;
}

/// lambda * sum_r sum_m ||u^r_{M-m+1}||^2 ... ||u^r_M||^2
inline double l2_penalty(const LayerParams& p, double lambda) {
    if (!(lambda >= 0.0)) throw ArgumentError("l2_penalty: lambda must be non-negative");
    double total = 0.0;
    for (const auto& f : p.functionals) {
        const std::size_t M = f.max_degree();
        double suffix = 1.0;
        // suffix product over q = M-m+1..M, grown one factor per degree
        for (std::size_t m = 1; m <= M; ++m) {
            const auto& u = f.u[M - m];
            suffix *= dot(u, u);
            total += suffix;
        }
    }
    return lambda * total;
}

// ---------------------------------------------------------------------------
// Text serialization (format described in docs/model_format.md)
// ---------------------------------------------------------------------------

namespace model_io_detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_row(std::ostream& out, std::span<const double> xs) {
    for (std::size_t i = 0; i < xs.size(); ++i) out << (i ? " " : "") << num(xs[i]);
    out << '\n';
}

inline void expect(std::istream& in, const std::string& word) {
    std::string got;
    if (!(in >> got) || got != word) throw DataError("model file: expected '" + word + "', got '" + got + "'");
}

template <class T>
T read(std::istream& in, const char* what) {
    T v{};
    if (!(in >> v)) throw DataError(std::string("model file: could not read ") + what);
    return v;
}

inline std::vector<double> read_row(std::istream& in, std::size_t count) {
    std::vector<double> v(count);
    for (double& x : v) {
        std::string tok;
        if (!(in >> tok)) throw DataError("model file: truncated numeric row");
        char* end = nullptr;
        x = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size()) throw DataError("model file: bad number '" + tok + "'");
    }
    return v;
}

} // namespace model_io_detail

inline constexpr int kModelFormatVersion = 1;

inline void save_model(const ModelConfig& m, std::ostream& out) {
    using namespace model_io_detail;
    m.validate();
    out << "hypograph-model " << kModelFormatVersion << '\n';
    out << "pooling " << (m.pooling == Pooling::Mean ? "mean" : "sum") << '\n';
    out << "seed " << m.seed << '\n';
    out << "layers " << m.layers.size() << '\n';
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        const auto& p = m.layers[l];
        const auto& c = p.cfg;
        out << "layer " << l << '\n';
        out << "config " << c.diff << ' ' << c.zero_start << ' ' << c.time_param << ' ' << c.walk_length << ' '
            << c.max_degree << ' ' << c.rank << ' ' << p.input_dim << '\n';
        out << "coefficients " << c.coefficients.size() << '\n';
        if (!c.coefficients.empty()) write_row(out, c.coefficients);
        out << "attention " << (p.attention ? p.attention->num_heads() : 0) << '\n';
        if (p.attention)
            for (const auto& h : p.attention->heads) {
                write_row(out, h.w_source);
                write_row(out, h.w_target);
            }
        out << "functionals\n";
        for (const auto& f : p.functionals)
            for (const auto& u : f.u) write_row(out, u);
        out << "mixing\n";
        for (std::size_t r = 0; r < p.mixing.rows(); ++r) write_row(out, p.mixing.row(r));
        out << "bias\n";
        write_row(out, p.bias);
    }
}

inline ModelConfig load_model(std::istream& in) {
    using namespace model_io_detail;
    expect(in, "hypograph-model");
    const int version = read<int>(in, "version");
    if (version != kModelFormatVersion) throw DataError("model file: unsupported version " + std::to_string(version));
    ModelConfig m;
    expect(in, "pooling");
    const auto pooling = read<std::string>(in, "pooling");
    if (pooling == "mean") m.pooling = Pooling::Mean;
    else if (pooling == "sum") m.pooling = Pooling::Sum;
    else throw DataError("model file: unknown pooling '" + pooling + "'");
    expect(in, "seed");
    m.seed = read<std::uint64_t>(in, "seed");
    expect(in, "layers");
    const auto L = read<std::size_t>(in, "layer count");
    for (std::size_t l = 0; l < L; ++l) {
        expect(in, "layer");
        if (read<std::size_t>(in, "layer index") != l) throw DataError("model file: layers out of order");
        LayerParams p;
        expect(in, "config");
        p.cfg.diff = read<int>(in, "diff") != 0;
        p.cfg.zero_start = read<int>(in, "zero_start") != 0;
        p.cfg.time_param = read<int>(in, "time_param") != 0;
        p.cfg.walk_length = read<std::size_t>(in, "walk_length");
        p.cfg.max_degree = read<std::size_t>(in, "max_degree");
        p.cfg.rank = read<std::size_t>(in, "rank");
        p.input_dim = read<std::size_t>(in, "input_dim");
        expect(in, "coefficients");
        const auto nc = read<std::size_t>(in, "coefficient count");
        p.cfg.coefficients = read_row(in, nc);
        expect(in, "attention");
        const auto heads = read<std::size_t>(in, "head count");
        if (heads > 0) {
            AttentionParams a;
            for (std::size_t h = 0; h < heads; ++h) {
                AttentionParams::Head head;
                head.w_source = read_row(in, p.input_dim);
                head.w_target = read_row(in, p.input_dim);
                a.heads.push_back(std::move(head));
            }
            p.attention = std::move(a);
        }
        const std::size_t R = p.cfg.rank, M = p.cfg.max_degree;
        const std::size_t ld = p.cfg.lift_dim(p.input_dim);
        expect(in, "functionals");
        for (std::size_t j = 0; j < R; ++j) {
            RankOneFunctional f;
            for (std::size_t q = 0; q < M; ++q) f.u.push_back(read_row(in, ld));
            p.functionals.push_back(std::move(f));
        }
        expect(in, "mixing");
        p.mixing = Matrix(R, R * M, read_row(in, R * R * M));
        expect(in, "bias");
        p.bias = read_row(in, R);
        m.layers.push_back(std::move(p));
    }
    m.validate();
    return m;
}

} // namespace hypograph
