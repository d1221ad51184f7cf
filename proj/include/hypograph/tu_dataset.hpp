#pragma once

// Reader and writer for the TU graph-classification format:
//
//   NAME_A.txt                "i, j" per line, 1-based global node ids
//   NAME_graph_indicator.txt  graph id (1-based) of node i on line i
//   NAME_node_labels.txt      integer label per node (one-hot encoded)
//   NAME_node_attributes.txt  comma-separated reals per node
//   NAME_graph_labels.txt     integer class per graph (optional)
//
// At least one of node labels / node attributes must be present. When both
// are, attributes are the one-hot labels followed by the real attributes.

#include "hypograph/error.hpp"
#include "hypograph/graph.hpp"
#include "hypograph/matrix.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hypograph {

struct GraphRecord {
    LabelledGraph graph;
    std::optional<long> label;
};

struct Dataset {
    std::string name;
    std::vector<GraphRecord> graphs;

    std::size_t attr_dim() const { return graphs.empty() ? 0 : graphs[0].graph.attr_dim(); }
};

namespace tu_detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        lines.push_back(std::move(line));
    }
    return lines;
}

inline long parse_long(std::string_view s, const std::string& where) {
    s = trim(s);
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw DataError(where + ": not an integer: '" + std::string(s) + "'");
    return v;
}

inline double parse_double(std::string_view s, const std::string& where) {
    const std::string tmp(trim(s));
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (tmp.empty() || end != tmp.c_str() + tmp.size())
        throw DataError(where + ": not a number: '" + tmp + "'");
    return v;
}

inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace tu_detail

inline Dataset load_tu_dataset(const std::filesystem::path& dir, const std::string& name) {
    namespace fs = std::filesystem;
    using namespace tu_detail;
    const auto file = [&](const char* suffix) { return dir / (name + suffix); };

    if (!fs::is_directory(dir)) throw DataError("dataset directory not found: " + dir.string());
    if (!fs::exists(file("_A.txt"))) throw DataError("missing " + file("_A.txt").string());
    if (!fs::exists(file("_graph_indicator.txt")))
        throw DataError("missing " + file("_graph_indicator.txt").string());
    const bool has_labels = fs::exists(file("_node_labels.txt"));
    const bool has_attrs = fs::exists(file("_node_attributes.txt"));
    if (!has_labels && !has_attrs)
        throw DataError("need " + name + "_node_labels.txt or " + name + "_node_attributes.txt");

    const auto indicator_lines = read_lines(file("_graph_indicator.txt"));
    const std::size_t total_nodes = indicator_lines.size();
    std::vector<std::size_t> graph_of(total_nodes);
    std::size_t num_graphs = 0;
    for (std::size_t i = 0; i < total_nodes; ++i) {
        const long gid = parse_long(indicator_lines[i], "graph_indicator line " + std::to_string(i + 1));
        if (gid < 1) throw DataError("graph_indicator: graph ids are 1-based");
        graph_of[i] = static_cast<std::size_t>(gid - 1);
        num_graphs = std::max(num_graphs, graph_of[i] + 1);
    }

    // local index of each global node inside its graph
    std::vector<std::size_t> local(total_nodes);
    std::vector<std::size_t> graph_size(num_graphs, 0);
    for (std::size_t i = 0; i < total_nodes; ++i) local[i] = graph_size[graph_of[i]]++;

    std::vector<std::vector<Edge>> graph_edges(num_graphs);
    const auto edge_lines = read_lines(file("_A.txt"));
    for (std::size_t l = 0; l < edge_lines.size(); ++l) {
        const std::string where = name + "_A.txt line " + std::to_string(l + 1);
        const auto parts = split_commas(edge_lines[l]);
        if (parts.size() != 2) throw DataError(where + ": expected two node ids");
        const long a = parse_long(parts[0], where);
        const long b = parse_long(parts[1], where);
        if (a < 1 || b < 1 || static_cast<std::size_t>(a) > total_nodes || static_cast<std::size_t>(b) > total_nodes)
            throw DataError(where + ": node id out of range");
        const std::size_t ga = static_cast<std::size_t>(a - 1);
        const std::size_t gb = static_cast<std::size_t>(b - 1);
        if (graph_of[ga] != graph_of[gb]) throw DataError(where + ": edge crosses graphs");
        if (ga == gb) continue;
        graph_edges[graph_of[ga]].emplace_back(local[ga], local[gb]);
    }

    std::size_t label_dim = 0;
    long min_label = 0;
    std::vector<long> node_labels;
    if (has_labels) {
        const auto lines = read_lines(file("_node_labels.txt"));
        if (lines.size() != total_nodes) throw DataError("node_labels: line count != node count");
        node_labels.reserve(total_nodes);
        for (std::size_t i = 0; i < lines.size(); ++i)
            node_labels.push_back(parse_long(lines[i], "node_labels line " + std::to_string(i + 1)));
        if (!node_labels.empty()) {
            const auto [mn, mx] = std::minmax_element(node_labels.begin(), node_labels.end());
            min_label = *mn;
            label_dim = static_cast<std::size_t>(*mx - *mn + 1);
        }
    }

    std::size_t real_dim = 0;
    std::vector<std::vector<double>> node_attrs;
    if (has_attrs) {
        const auto lines = read_lines(file("_node_attributes.txt"));
        if (lines.size() != total_nodes) throw DataError("node_attributes: line count != node count");
        node_attrs.reserve(total_nodes);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const std::string where = "node_attributes line " + std::to_string(i + 1);
            std::vector<double> row;
            for (auto part : split_commas(lines[i])) row.push_back(parse_double(part, where));
            if (i == 0) real_dim = row.size();
            else if (row.size() != real_dim) throw DataError(where + ": ragged attribute row");
            node_attrs.push_back(std::move(row));
        }
    }

    std::vector<std::optional<long>> graph_labels(num_graphs);
    if (fs::exists(file("_graph_labels.txt"))) {
        const auto lines = read_lines(file("_graph_labels.txt"));
        if (lines.size() != num_graphs) throw DataError("graph_labels: line count != graph count");
        for (std::size_t g = 0; g < num_graphs; ++g)
            graph_labels[g] = parse_long(lines[g], "graph_labels line " + std::to_string(g + 1));
    }

    const std::size_t d = label_dim + real_dim;
    std::vector<Matrix> attrs;
    attrs.reserve(num_graphs);
    for (std::size_t g = 0; g < num_graphs; ++g) attrs.emplace_back(graph_size[g], d);
    for (std::size_t i = 0; i < total_nodes; ++i) {
        auto row = attrs[graph_of[i]].row(local[i]);
        if (has_labels) row[static_cast<std::size_t>(node_labels[i] - min_label)] = 1.0;
        if (has_attrs) std::copy(node_attrs[i].begin(), node_attrs[i].end(), row.begin() + label_dim);
    }

    Dataset ds;
    ds.name = name;
    ds.graphs.reserve(num_graphs);
    for (std::size_t g = 0; g < num_graphs; ++g)
        ds.graphs.push_back({LabelledGraph(graph_size[g], std::move(graph_edges[g]), std::move(attrs[g])),
                             graph_labels[g]});
    return ds;
}

/// Writes real attributes (no node labels); loading the result reproduces the
/// graphs exactly.
inline void write_tu_dataset(const Dataset& ds, const std::filesystem::path& dir, const std::string& name) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const auto open = [&](const char* suffix) {
        std::ofstream out(dir / (name + suffix), std::ios::binary);
        if (!out) throw DataError("cannot write " + (dir / (name + suffix)).string());
        return out;
    };
    auto a = open("_A.txt");
    auto ind = open("_graph_indicator.txt");
    auto attr = open("_node_attributes.txt");
    const bool any_label = std::any_of(ds.graphs.begin(), ds.graphs.end(),
                                       [](const GraphRecord& r) { return r.label.has_value(); });
    std::size_t offset = 0;
    for (std::size_t g = 0; g < ds.graphs.size(); ++g) {
        const auto& graph = ds.graphs[g].graph;
        for (auto [u, v] : graph.edges()) {
            a << (offset + u + 1) << ", " << (offset + v + 1) << '\n';
            a << (offset + v + 1) << ", " << (offset + u + 1) << '\n';
        }
        for (std::size_t i = 0; i < graph.num_nodes(); ++i) {
            ind << (g + 1) << '\n';
            auto row = graph.attribute(i);
            for (std::size_t c = 0; c < row.size(); ++c) attr << (c ? ", " : "") << tu_detail::fmt_double(row[c]);
            attr << '\n';
        }
        offset += graph.num_nodes();
    }
    if (any_label) {
        auto gl = open("_graph_labels.txt");
        for (const auto& r : ds.graphs) gl << r.label.value_or(0) << '\n';
    }
}

} // namespace hypograph
