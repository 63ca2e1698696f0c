#include "buffgraph/buffer.hpp"

#include <algorithm>

namespace buffgraph {

AugmentedGraph augment(const Graph& graph, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) {
        throw InvalidArgument("augment: alpha must be in [0, 1], got " + std::to_string(alpha));
    }

    AugmentedGraph aug;
    aug.base = graph;
    aug.alpha = alpha;
    aug.edges = undirected_edges(graph);

    const std::int32_t n = graph.num_nodes;
    const auto num_edges = static_cast<std::int32_t>(aug.edges.size());
    const std::int32_t total = n + num_edges;

    aug.features.resize(total, graph.feature_dim());
    aug.features.topRows(n) = graph.features;
    aug.labels = graph.labels;
    aug.labels.resize(static_cast<std::size_t>(total), kNoLabel);
    for (std::int32_t e = 0; e < num_edges; ++e) {
        const auto& [u, v] = aug.edges[static_cast<std::size_t>(e)];
        aug.features.row(n + e) =
            alpha * graph.features.row(u) + (1.0 - alpha) * graph.features.row(v);
    }

    // Incident edge ids per original node, ascending (edges are canonical order).
    std::vector<std::vector<std::int32_t>> incident(static_cast<std::size_t>(n));
    for (std::int32_t e = 0; e < num_edges; ++e) {
        incident[static_cast<std::size_t>(aug.edges[static_cast<std::size_t>(e)].u)].push_back(e);
        incident[static_cast<std::size_t>(aug.edges[static_cast<std::size_t>(e)].v)].push_back(e);
    }
    for (auto& list : incident) std::sort(list.begin(), list.end());

    // Residual partner lookup: per node, (neighbor, edge id) sorted by neighbor.
    std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> residual(
        static_cast<std::size_t>(n));
    for (std::int32_t e = 0; e < num_edges; ++e) {
        const auto& [u, v] = aug.edges[static_cast<std::size_t>(e)];
        residual[static_cast<std::size_t>(u)].emplace_back(v, e);
        residual[static_cast<std::size_t>(v)].emplace_back(u, e);
    }
    for (auto& list : residual) std::sort(list.begin(), list.end());

    CsrMatrix& adj = aug.adjacency;
    adj.rows = total;
    adj.cols = total;
    adj.offsets.assign(static_cast<std::size_t>(total) + 1, 0);
    const std::int64_t entries = static_cast<std::int64_t>(6) * num_edges;
    adj.indices.resize(static_cast<std::size_t>(entries));
    adj.values.assign(static_cast<std::size_t>(entries), 0.0);
    aug.slots.resize(static_cast<std::size_t>(num_edges));

    std::int64_t pos = 0;
    for (std::int32_t u = 0; u < n; ++u) {
        adj.offsets[static_cast<std::size_t>(u)] = pos;
        // Original neighbors first (< n), then buffer nodes (>= n): columns
        // stay strictly increasing.
        for (const auto& [v, e] : residual[static_cast<std::size_t>(u)]) {
            adj.indices[static_cast<std::size_t>(pos)] = v;
            auto& s = aug.slots[static_cast<std::size_t>(e)];
            (u < v ? s.res_uv : s.res_vu) = pos;
            ++pos;
        }
        for (std::int32_t e : incident[static_cast<std::size_t>(u)]) {
            adj.indices[static_cast<std::size_t>(pos)] = n + e;
            auto& s = aug.slots[static_cast<std::size_t>(e)];
            (u == aug.edges[static_cast<std::size_t>(e)].u ? s.u_buf : s.v_buf) = pos;
            ++pos;
        }
    }
    for (std::int32_t e = 0; e < num_edges; ++e) {
        adj.offsets[static_cast<std::size_t>(n + e)] = pos;
        const auto& [u, v] = aug.edges[static_cast<std::size_t>(e)];
        auto& s = aug.slots[static_cast<std::size_t>(e)];
        adj.indices[static_cast<std::size_t>(pos)] = u;
        s.buf_u = pos++;
        adj.indices[static_cast<std::size_t>(pos)] = v;
        s.buf_v = pos++;
    }
    adj.offsets[static_cast<std::size_t>(total)] = pos;

    std::vector<double> initial(static_cast<std::size_t>(num_edges), 0.5);
    set_gates(aug, initial);
    return aug;
}

void set_gates(AugmentedGraph& aug, std::span<const double> gates) {
    if (gates.size() != aug.edges.size()) {
        throw InvalidArgument("set_gates: got " + std::to_string(gates.size()) +
                              " gates for " + std::to_string(aug.edges.size()) + " edges");
    }
    for (std::size_t e = 0; e < gates.size(); ++e) {
        if (!(gates[e] >= 0.0 && gates[e] <= 1.0)) {
            throw InvalidArgument("set_gates: gate " + std::to_string(e) + " = " +
                                  std::to_string(gates[e]) + " outside [0, 1]");
        }
    }
    aug.gates.assign(gates.begin(), gates.end());
    for (std::size_t e = 0; e < gates.size(); ++e) {
        const double g = gates[e];
        const auto& s = aug.slots[e];
        aug.adjacency.values[static_cast<std::size_t>(s.res_uv)] = 1.0 - g;
        aug.adjacency.values[static_cast<std::size_t>(s.res_vu)] = 1.0 - g;
        aug.adjacency.values[static_cast<std::size_t>(s.u_buf)] = g;
        aug.adjacency.values[static_cast<std::size_t>(s.buf_u)] = g;
        aug.adjacency.values[static_cast<std::size_t>(s.v_buf)] = g;
        aug.adjacency.values[static_cast<std::size_t>(s.buf_v)] = g;
    }
}

CsrMatrix normalized_propagation_matrix(const AugmentedGraph& aug) {
    return normalize_adjacency(aug.adjacency);
}

} // namespace buffgraph
