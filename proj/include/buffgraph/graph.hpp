#pragma once

#include "buffgraph/error.hpp"
#include "buffgraph/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace buffgraph {

/// Label sentinel for nodes that carry no class (buffer nodes, unlabeled input).
inline constexpr std::int32_t kNoLabel = -1;

/// Canonical undirected edge, u < v.
struct UndirectedEdge {
    std::int32_t u = 0;
    std::int32_t v = 0;
    friend bool operator==(const UndirectedEdge&, const UndirectedEdge&) = default;
};

/// Undirected graph in CSR form with dense node features and class labels.
///
/// Invariants (checked by validate()):
///  - adjacency symmetric, column indices strictly increasing per row,
///    no self-loops;
///  - features has one row per node;
///  - every label is kNoLabel or in [0, num_classes).
struct Graph {
    std::int32_t num_nodes = 0;
    std::int32_t num_classes = 0;
    std::vector<std::int64_t> row_offsets; // size num_nodes + 1
    std::vector<std::int32_t> col_indices; // both directions of every edge
    Matrix features;                       // num_nodes x feature_dim
    std::vector<std::int32_t> labels;      // size num_nodes

    std::int32_t feature_dim() const { return static_cast<std::int32_t>(features.cols()); }
    std::int64_t num_directed_entries() const { return static_cast<std::int64_t>(col_indices.size()); }
    std::int64_t num_edges() const { return num_directed_entries() / 2; }
    std::int64_t degree(std::int32_t v) const { return row_offsets[v + 1] - row_offsets[v]; }
    std::span<const std::int32_t> neighbors(std::int32_t v) const {
        return {col_indices.data() + row_offsets[v],
                static_cast<std::size_t>(degree(v))};
    }
};

/// Build a Graph from raw (possibly directed, duplicated, self-looped) pairs.
/// Symmetrizes, deduplicates, and drops self-loops. Counts of dropped
/// self-loop lines / merged duplicates are returned through report if given.
struct EdgeListReport {
    std::size_t self_loops_dropped = 0;
    std::size_t duplicates_merged = 0;
};
Graph build_graph(std::int32_t num_nodes,
                  std::span<const std::pair<std::int32_t, std::int32_t>> pairs,
                  Matrix features, std::vector<std::int32_t> labels,
                  std::int32_t num_classes, EdgeListReport* report = nullptr);

/// Throws InvalidArgument if any Graph invariant is broken.
void validate(const Graph& graph);

/// Original edges in canonical (min, max) lexicographic order. The position
/// in this list is the edge id used by heterophily scores and buffer nodes.
std::vector<UndirectedEdge> undirected_edges(const Graph& graph);

/// Dataset directory format: edges.tsv (two tab-separated 0-based ids per
/// line), features.csv (one comma-separated row per node), labels.csv (one
/// integer per line, -1 = unlabeled).
Graph load_graph(const std::filesystem::path& dir, EdgeListReport* report = nullptr);
void save_graph(const std::filesystem::path& dir, const Graph& graph);

/// Disjoint node-index sets over original nodes. Sorted ascending.
struct Split {
    std::vector<std::int32_t> train;
    std::vector<std::int32_t> val;
    std::vector<std::int32_t> test;
};

void save_masks(const std::filesystem::path& file, const Split& split);
Split load_masks(const std::filesystem::path& file);

/// Max class count / min class count over the masked nodes.
/// Throws InvalidArgument naming the class if some class is absent.
double imbalance_ratio(const Graph& graph, std::span<const std::int32_t> mask);

struct SplitRatios {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;
};

/// Stratified random split: per class, nodes are shuffled by seed and
/// assigned val/test shares of max(1, floor(ratio * n)) with the remainder
/// going to train. Throws if a class has fewer than 3 labeled nodes.
Split split_random(const Graph& graph, SplitRatios ratios, std::uint64_t seed);

/// Downsample the train mask of classes with id >= ceil(C/2) to
/// ceil(m_max / rho) nodes each, where m_max is the largest train-class
/// size. Validation and test masks are untouched.
struct ImbalanceReport {
    bool target_clamped = false; // ceil(m_max / rho) fell below 1
};
Split make_imbalanced(const Split& split, const Graph& graph, double rho,
                      std::uint64_t seed, ImbalanceReport* report = nullptr);

} // namespace buffgraph
