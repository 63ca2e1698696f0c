#pragma once

#include "buffgraph/graph.hpp"
#include "buffgraph/linalg.hpp"

#include <span>
#include <vector>

namespace buffgraph {

/// Original graph plus one unlabeled buffer node per undirected edge.
///
/// The buffer node for edge e = (u, v) is node base.num_nodes + e, its
/// feature is the mixup alpha * X_u + (1 - alpha) * X_v with (u, v) in
/// canonical (min, max) order. Every original edge becomes three weighted
/// undirected edges: the residual (u, v) with weight 1 - g, and the two
/// buffer legs (u, b), (v, b) with weight g, so the traffic split per edge
/// is convex: residual + buffer = 1 for any gate.
struct AugmentedGraph {
    Graph base;
    double alpha = 0.5;
    std::vector<UndirectedEdge> edges; // canonical original edges; index = edge id
    std::vector<double> gates;         // per original edge, in [0, 1]
    Matrix features;                   // (N + E) x d
    std::vector<std::int32_t> labels;  // size N + E; buffers carry kNoLabel
    CsrMatrix adjacency;               // weighted, (N+E) x (N+E), no self-loops

    /// Positions of an edge's six directed adjacency entries, for O(1)
    /// weight refresh in set_gates.
    struct EdgeSlots {
        std::int64_t res_uv, res_vu;  // residual pair
        std::int64_t u_buf, buf_u;    // first buffer leg
        std::int64_t v_buf, buf_v;    // second buffer leg
    };
    std::vector<EdgeSlots> slots;

    std::int32_t num_buffer_nodes() const { return static_cast<std::int32_t>(edges.size()); }
    std::int32_t num_nodes() const { return base.num_nodes + num_buffer_nodes(); }
};

/// Insert one buffer node per edge with mixup coefficient alpha. All gates
/// start at 0.5. Buffer features are frozen here; later gate updates only
/// touch edge weights.
AugmentedGraph augment(const Graph& graph, double alpha);

/// Refresh edge weights from new gates: residual = 1 - g, buffer legs = g.
/// Throws on count mismatch or any gate outside [0, 1].
void set_gates(AugmentedGraph& aug, std::span<const double> gates);

/// D^{-1/2} (A' + I) D^{-1/2} over the weighted augmented adjacency, unit
/// self-loops on every node (buffers included).
CsrMatrix normalized_propagation_matrix(const AugmentedGraph& aug);

} // namespace buffgraph
