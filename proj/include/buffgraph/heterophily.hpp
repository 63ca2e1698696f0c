#pragma once

#include "buffgraph/graph.hpp"
#include "buffgraph/linalg.hpp"

#include <optional>
#include <span>
#include <vector>

namespace buffgraph {

/// Heterophily scores at the three structural levels, plus the per-edge
/// gate weights derived from the edge scores. Edge entries are indexed by
/// the canonical undirected edge id of the ORIGINAL graph (never buffer
/// edges).
struct HeterophilyScores {
    std::vector<std::optional<double>> node_scores;  // beta_v in [0,1]; absent for isolated/unlabeled
    std::vector<double> edge_scores;                 // h_uv >= 0
    std::vector<std::optional<double>> class_scores; // h_c in [0,1]; absent when no scorable node
    std::vector<double> gates;                       // g_uv in [0,1]
};

/// Share of v's labeled neighbors whose label differs from v's.
/// Absent when v is isolated, unlabeled, or has no labeled neighbor.
std::optional<double> node_score(const Graph& graph, std::span<const std::int32_t> labels,
                                 std::int32_t v);

std::vector<std::optional<double>> node_scores(const Graph& graph,
                                               std::span<const std::int32_t> labels);

/// Mean Manhattan distance between two embeddings: (1/D) sum |z_u - z_v|.
/// Symmetric in its arguments. Throws on dimension mismatch or D = 0.
double edge_score(std::span<const double> z_u, std::span<const double> z_v);

/// Edge score for every listed edge, rows of `embeddings` as z vectors.
std::vector<double> edge_scores(const Matrix& embeddings,
                                std::span<const UndirectedEdge> edges);

/// Per-class mean of node scores over the class's scorable nodes.
std::vector<std::optional<double>> class_scores(
    const Graph& graph, std::span<const std::int32_t> labels,
    std::span<const std::optional<double>> node_scores);

/// Min-max normalization of edge scores into [0, 1] gate weights.
/// All-equal scores map to 0.5 (split traffic evenly). Throws on empty input.
std::vector<double> gates_from_scores(std::span<const double> edge_scores);

} // namespace buffgraph
