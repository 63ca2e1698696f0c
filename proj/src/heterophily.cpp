#include "buffgraph/heterophily.hpp"

#include <algorithm>
#include <cmath>

namespace buffgraph {

std::optional<double> node_score(const Graph& graph, std::span<const std::int32_t> labels,
                                 std::int32_t v) {
    if (labels.size() != static_cast<std::size_t>(graph.num_nodes)) {
        throw InvalidArgument("node_score: labels size mismatch");
    }
    if (labels[static_cast<std::size_t>(v)] == kNoLabel) return std::nullopt;
    std::int64_t labeled = 0;
    std::int64_t same = 0;
    for (std::int32_t u : graph.neighbors(v)) {
        std::int32_t lu = labels[static_cast<std::size_t>(u)];
        if (lu == kNoLabel) continue;
        ++labeled;
        if (lu == labels[static_cast<std::size_t>(v)]) ++same;
    }
    if (labeled == 0) return std::nullopt;
    return 1.0 - static_cast<double>(same) / static_cast<double>(labeled);
}

std::vector<std::optional<double>> node_scores(const Graph& graph,
                                               std::span<const std::int32_t> labels) {
    std::vector<std::optional<double>> out(static_cast<std::size_t>(graph.num_nodes));
    for (std::int32_t v = 0; v < graph.num_nodes; ++v) {
        out[static_cast<std::size_t>(v)] = node_score(graph, labels, v);
    }
    return out;
}

double edge_score(std::span<const double> z_u, std::span<const double> z_v) {
    if (z_u.size() != z_v.size()) {
        throw InvalidArgument("edge_score: embedding dimensions differ (" +
                              std::to_string(z_u.size()) + " vs " +
                              std::to_string(z_v.size()) + ")");
    }
    if (z_u.empty()) throw InvalidArgument("edge_score: empty embeddings");
    double sum = 0.0;
    for (std::size_t i = 0; i < z_u.size(); ++i) sum += std::abs(z_u[i] - z_v[i]);
    return sum / static_cast<double>(z_u.size());
}

std::vector<double> edge_scores(const Matrix& embeddings,
                                std::span<const UndirectedEdge> edges) {
    std::vector<double> out(edges.size());
    const auto dim = static_cast<std::size_t>(embeddings.cols());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        std::span<const double> zu(embeddings.data() + static_cast<std::size_t>(edges[e].u) * dim, dim);
        std::span<const double> zv(embeddings.data() + static_cast<std::size_t>(edges[e].v) * dim, dim);
        out[e] = edge_score(zu, zv);
    }
    return out;
}

std::vector<std::optional<double>> class_scores(
    const Graph& graph, std::span<const std::int32_t> labels,
    std::span<const std::optional<double>> node_scores) {
    std::vector<double> sums(static_cast<std::size_t>(graph.num_classes), 0.0);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(graph.num_classes), 0);
    for (std::int32_t v = 0; v < graph.num_nodes; ++v) {
        std::int32_t c = labels[static_cast<std::size_t>(v)];
        if (c == kNoLabel || !node_scores[static_cast<std::size_t>(v)].has_value()) continue;
        sums[static_cast<std::size_t>(c)] += *node_scores[static_cast<std::size_t>(v)];
        counts[static_cast<std::size_t>(c)]++;
    }
    std::vector<std::optional<double>> out(static_cast<std::size_t>(graph.num_classes));
    for (std::int32_t c = 0; c < graph.num_classes; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) {
            out[static_cast<std::size_t>(c)] =
                sums[static_cast<std::size_t>(c)] / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        }
    }
    return out;
}

std::vector<double> gates_from_scores(std::span<const double> edge_scores) {
    if (edge_scores.empty()) {
        throw InvalidArgument("gates_from_scores: no edges");
    }
    auto [lo_it, hi_it] = std::minmax_element(edge_scores.begin(), edge_scores.end());
    double lo = *lo_it;
    double hi = *hi_it;
    std::vector<double> gates(edge_scores.size());
    if (hi == lo) {
        std::fill(gates.begin(), gates.end(), 0.5);
        return gates;
    }
    double span = hi - lo;
    for (std::size_t e = 0; e < edge_scores.size(); ++e) {
        gates[e] = (edge_scores[e] - lo) / span;
    }
    return gates;
}

} // namespace buffgraph
