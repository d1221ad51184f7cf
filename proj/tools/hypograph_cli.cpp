// hypograph: dataset ingestion, feature extraction, oracle checks and
// benchmarks for low-rank hypo-elliptic graph diffusion.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 check failure.

#include "hypograph/hypograph.hpp"

#include "CLI11.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace hypograph;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitCheck = 3;

struct RunSpec {
    std::string dataset;
    std::string name;
    std::size_t walk_length = 5;
    std::size_t max_degree = 2;
    std::size_t rank = 16;
    std::size_t layers = 1;
    bool diff = true;
    bool zero_start = true;
    bool time_param = false;
    bool attention = false;
    std::size_t heads = 1;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::string out;
    std::string format = "csv";
    std::string pooling = "mean";
    bool per_node = false;
    std::string save_model;
    std::string load_model;

    // check
    std::size_t graphs = 20;
    std::size_t max_nodes = 8;
    std::size_t max_dim = 3;
    double tolerance = 1e-10;

    // bench
    std::size_t min_log_edges = 12;
    std::size_t max_log_edges = 18;
    std::size_t dim = 4;
    std::size_t reps = 5;
    std::string graph_kind = "path";

    FeatureConfig feature_config() const {
        FeatureConfig c;
        c.diff = diff;
        c.zero_start = zero_start;
        c.time_param = time_param;
        c.walk_length = walk_length;
        c.max_degree = max_degree;
        c.rank = rank;
        return c;
    }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::size_t default_threads() {
    if (const char* env = std::getenv("HYPOGRAPH_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return v;
    }
    return 1;
}

/// Runs fn(i) for i in [0, count) on `threads` workers.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, count); ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

int cmd_describe(const RunSpec& spec) {
    const Dataset ds = load_tu_dataset(spec.dataset, spec.name);
    if (ds.graphs.empty()) throw DataError("dataset contains no graphs");
    std::size_t nodes = 0, edges = 0, min_n = SIZE_MAX, max_n = 0, min_e = SIZE_MAX, max_e = 0;
    std::map<std::string, std::size_t> labels;
    for (const auto& r : ds.graphs) {
        const std::size_t n = r.graph.num_nodes(), e = r.graph.num_edges();
        nodes += n;
        edges += e;
        min_n = std::min(min_n, n);
        max_n = std::max(max_n, n);
        min_e = std::min(min_e, e);
        max_e = std::max(max_e, e);
        ++labels[r.label ? std::to_string(*r.label) : "none"];
    }
    const double count = static_cast<double>(ds.graphs.size());
    std::printf("dataset        %s\n", ds.name.c_str());
    std::printf("graphs         %zu\n", ds.graphs.size());
    std::printf("nodes          total %zu  mean %.2f  min %zu  max %zu\n", nodes, static_cast<double>(nodes) / count,
                min_n, max_n);
    std::printf("edges          total %zu  mean %.2f  min %zu  max %zu\n", edges, static_cast<double>(edges) / count,
                min_e, max_e);
    std::printf("attribute_dim  %zu\n", ds.attr_dim());
    std::printf("labels        ");
    for (const auto& [label, c] : labels) std::printf(" %s:%zu", label.c_str(), c);
    std::printf("\n");
    return kExitOk;
}

ModelConfig build_model(const RunSpec& spec, std::size_t input_dim) {
    if (!spec.load_model.empty()) {
        std::ifstream in(spec.load_model);
        if (!in) throw DataError("cannot open model file " + spec.load_model);
        auto m = load_model(in);
        if (m.layers.front().input_dim != input_dim)
            throw DataError("model expects attribute width " + std::to_string(m.layers.front().input_dim) +
                            ", dataset has " + std::to_string(input_dim));
        return m;
    }
    const Pooling pooling = spec.pooling == "sum" ? Pooling::Sum : Pooling::Mean;
    return make_model(input_dim, spec.feature_config(), spec.layers, spec.seed, spec.attention ? spec.heads : 0,
                      pooling);
}

std::string format_row(const RunSpec& spec, std::size_t graph_id, const std::optional<long>& label,
                       std::optional<std::size_t> node_id, std::span<const double> values) {
    std::ostringstream out;
    if (spec.format == "csv") {
        out << graph_id;
        if (node_id) out << ',' << *node_id;
        out << ',' << (label ? std::to_string(*label) : "");
        for (double v : values) out << ',' << num(v);
    } else {
        out << "{\"graph_id\":" << graph_id;
        if (node_id) out << ",\"node_id\":" << *node_id;
        out << ",\"label\":" << (label ? std::to_string(*label) : "null") << ",\"features\":[";
        for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << num(values[i]);
        out << "]}";
    }
    out << '\n';
    return out.str();
}

int cmd_extract(const RunSpec& spec) {
    const Dataset ds = load_tu_dataset(spec.dataset, spec.name);
    if (ds.graphs.empty()) throw DataError("dataset contains no graphs");
    const ModelConfig model = build_model(spec, ds.attr_dim());

    if (!spec.save_model.empty()) {
        std::ofstream out(spec.save_model);
        if (!out) throw DataError("cannot write model file " + spec.save_model);
        save_model(model, out);
    }

    std::vector<std::string> rows(ds.graphs.size());
    parallel_for(ds.graphs.size(), spec.threads, [&](std::size_t gi) {
        const auto& rec = ds.graphs[gi];
        const Matrix nodes = model_node_forward(rec.graph, model);
        std::string text;
        if (spec.per_node) {
            for (std::size_t i = 0; i < nodes.rows(); ++i) text += format_row(spec, gi, rec.label, i, nodes.row(i));
        } else {
            text = format_row(spec, gi, rec.label, std::nullopt, pool(nodes, model.pooling));
        }
        rows[gi] = std::move(text);
    });

    std::ofstream file;
    if (!spec.out.empty()) {
        file.open(spec.out, std::ios::binary);
        if (!file) throw DataError("cannot write " + spec.out);
    }
    std::ostream& out = spec.out.empty() ? std::cout : file;
    if (spec.format == "csv") {
        out << "graph_id";
        if (spec.per_node) out << ",node_id";
        out << ",label";
        for (std::size_t r = 0; r < model.layers.back().output_dim(); ++r) out << ",f" << r;
        out << '\n';
    }
    for (const auto& r : rows) out << r;
    return kExitOk;
}

int cmd_check(const RunSpec& spec) {
    CheckOptions opt;
    opt.graphs = spec.graphs;
    opt.max_nodes = spec.max_nodes;
    opt.max_dim = spec.max_dim;
    opt.max_walk = spec.walk_length;
    opt.max_degree = spec.max_degree;
    opt.seed = spec.seed;
    opt.tolerance = spec.tolerance;
    const CheckReport report = run_oracle_check(opt);
    std::printf("%-30s %8s %14s\n", "configuration", "cases", "max_rel_error");
    for (const auto& row : report.rows)
        std::printf("%-30s %8zu %14.3e %s\n", row.config.c_str(), row.cases, row.max_rel_error,
                    row.max_rel_error <= report.tolerance ? "ok" : "FAIL");
    std::printf("total cases %zu, max relative error %.3e, tolerance %.1e: %s\n", report.cases, report.max_rel_error,
                report.tolerance, report.passed() ? "PASS" : "FAIL");
    return report.passed() ? kExitOk : kExitCheck;
}

int cmd_bench(const RunSpec& spec) {
    FeatureConfig cfg = spec.feature_config();
    const auto make = [&](std::size_t edges) {
        if (spec.graph_kind == "grid") {
            // near-square grid with about `edges` edges
            const auto side = static_cast<std::size_t>(std::max(2.0, std::sqrt(static_cast<double>(edges) / 2.0)));
            const std::size_t rows = std::max<std::size_t>(2, edges / (2 * side));
            return make_grid_graph(rows, side, spec.dim, spec.seed);
        }
        return make_path_graph(edges, spec.dim, spec.seed);
    };

    std::printf("# batch_features on %s graphs: k=%zu M=%zu R=%zu d=%zu, median of %zu runs\n", spec.graph_kind.c_str(),
                cfg.walk_length, cfg.max_degree, cfg.rank, spec.dim, spec.reps);
    std::printf("%10s %14s %12s %10s\n", "edges", "seconds", "ns/edge", "ratio");
    double prev = 0.0;
    bool nonlinear = false;
    for (std::size_t lg = spec.min_log_edges; lg <= spec.max_log_edges; ++lg) {
        const auto g = make(std::size_t{1} << lg);
        const auto t = time_batch_features(g, cfg, spec.reps, spec.seed);
        const double ratio = prev > 0.0 ? t.median_seconds / prev : 0.0;
        const bool flag = prev > 0.0 && ratio > 2.5;
        nonlinear = nonlinear || flag;
        std::printf("%10zu %14.6f %12.2f %10s%s\n", g.num_edges(), t.median_seconds,
                    1e9 * t.median_seconds / static_cast<double>(g.num_edges()),
                    prev > 0.0 ? num(std::round(ratio * 1000) / 1000).c_str() : "-",
                    flag ? "  NONLINEAR" : "");
        prev = t.median_seconds;
    }

    const auto g = make(std::size_t{1} << spec.max_log_edges);
    FeatureConfig doubled = cfg;
    doubled.max_degree = 2 * cfg.max_degree;
    const double base = time_batch_features(g, cfg, spec.reps, spec.seed).median_seconds;
    const double twice = time_batch_features(g, doubled, spec.reps, spec.seed).median_seconds;
    std::printf("# degree doubling M=%zu -> M=%zu at %zu edges: ratio %.3f\n", cfg.max_degree, doubled.max_degree,
                g.num_edges(), twice / base);
    FeatureConfig still = cfg;
    still.walk_length = 0;
    const double zero = time_batch_features(g, still, spec.reps, spec.seed).median_seconds;
    std::printf("# k=0 at %zu edges: %.6f s\n", g.num_edges(), zero);
    if (nonlinear) std::printf("# warning: per-doubling ratio above 2.5 detected\n");
    return kExitOk;
}

void add_feature_flags(CLI::App* cmd, RunSpec& spec) {
    cmd->add_option("--walk-length,-k", spec.walk_length, "Random walk length k");
    cmd->add_option("--max-degree,-M", spec.max_degree, "Maximal tensor degree M")->check(CLI::PositiveNumber);
    cmd->add_option("--rank,-R", spec.rank, "Rank-1 functionals per layer")->check(CLI::PositiveNumber);
    cmd->add_flag("--diff,!--no-diff", spec.diff, "Lift increments (default) or raw attributes");
    cmd->add_flag("--zero-start,!--no-zero-start", spec.zero_start, "Prepend the start-point factor (default on)");
    cmd->add_flag("--time-param", spec.time_param, "Add the step index as a coordinate");
    cmd->add_option("--seed", spec.seed, "Master seed");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-rank hypo-elliptic graph diffusion features"};
    app.require_subcommand(1);
    RunSpec spec;
    spec.threads = default_threads();

    auto* extract = app.add_subcommand("extract", "Compute pooled (or per-node) features for a TU dataset");
    extract->add_option("--dataset", spec.dataset, "Dataset directory")->required();
    extract->add_option("--name", spec.name, "Dataset name (file prefix)")->required();
    add_feature_flags(extract, spec);
    extract->add_option("--layers", spec.layers, "Number of stacked layers")->check(CLI::PositiveNumber);
    extract->add_flag("--attention", spec.attention, "Attention-weighted random walks");
    extract->add_option("--heads", spec.heads, "Attention heads (averaged)")->check(CLI::PositiveNumber);
    extract->add_option("--threads", spec.threads, "Worker threads (default $HYPOGRAPH_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    extract->add_option("--out", spec.out, "Output file (default stdout)");
    extract->add_option("--format", spec.format, "Output format")->check(CLI::IsMember({"csv", "jsonl"}));
    extract->add_option("--pooling", spec.pooling, "Graph pooling")->check(CLI::IsMember({"mean", "sum"}));
    extract->add_flag("--per-node", spec.per_node, "One row per node instead of per graph");
    extract->add_option("--save-model", spec.save_model, "Write the parameters used");
    extract->add_option("--load-model", spec.load_model, "Read parameters instead of initializing");

    auto* check = app.add_subcommand("check", "Randomized low-rank vs exact oracle equivalence");
    check->add_option("--graphs", spec.graphs, "Random graphs (each runs 24 configurations)");
    check->add_option("--nodes", spec.max_nodes, "Maximum nodes per graph");
    check->add_option("--max-dim", spec.max_dim, "Maximum attribute dimension");
    check->add_option("--walk-length,-k", spec.walk_length, "Maximum walk length");
    check->add_option("--max-degree,-M", spec.max_degree, "Maximum tensor degree")->check(CLI::PositiveNumber);
    check->add_option("--tolerance", spec.tolerance, "Relative error tolerance");
    check->add_option("--seed", spec.seed, "Master seed");

    auto* bench = app.add_subcommand("bench", "Time batch_features over a ladder of edge counts");
    add_feature_flags(bench, spec);
    bench->add_option("--min-log-edges", spec.min_log_edges, "Smallest graph has 2^this edges");
    bench->add_option("--max-log-edges", spec.max_log_edges, "Largest graph has 2^this edges");
    bench->add_option("--dim", spec.dim, "Attribute dimension")->check(CLI::PositiveNumber);
    bench->add_option("--reps", spec.reps, "Timed repetitions")->check(CLI::PositiveNumber);
    bench->add_option("--graph", spec.graph_kind, "Synthetic graph family")->check(CLI::IsMember({"path", "grid"}));

    auto* describe = app.add_subcommand("describe", "Summarize a TU dataset");
    describe->add_option("--dataset", spec.dataset, "Dataset directory")->required();
    describe->add_option("--name", spec.name, "Dataset name (file prefix)")->required();

    // bench defaults differ from extract: k=5, M=2, R=8
    bench->preparse_callback([&](std::size_t) {
        spec.walk_length = 5;
        spec.max_degree = 2;
        spec.rank = 8;
    });
    // check defaults: k <= 4, M <= 3
    check->preparse_callback([&](std::size_t) {
        spec.walk_length = 4;
        spec.max_degree = 3;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (spec.min_log_edges > spec.max_log_edges) throw ArgumentError("--min-log-edges exceeds --max-log-edges");
        if (*extract) return cmd_extract(spec);
        if (*check) return cmd_check(spec);
        if (*bench) return cmd_bench(spec);
        if (*describe) return cmd_describe(spec);
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
