#pragma once

#include "buffgraph/graph.hpp"
#include "buffgraph/linalg.hpp"

#include <span>
#include <string>
#include <vector>

namespace buffgraph {

/// Laplacian spectra of a graph before and after buffer insertion.
///
/// The two spectra have different lengths (N vs N+E); delta aligns them by
/// ascending-sorted index over the first N positions. That alignment is a
/// reporting convention, echoed in the JSON metadata.
struct SpectrumReport {
    std::vector<double> base_eigenvalues;      // ascending, length N
    std::vector<double> augmented_eigenvalues; // ascending, length N+E
    std::vector<double> delta;                 // lambda'_i - lambda_i, first N entries
    std::int32_t base_nodes = 0;
    std::int32_t augmented_nodes = 0;
    std::int64_t num_edges = 0;
    double alpha = 0.0;
};

/// Eigenvalues of L = D - A, ascending. Dense symmetric solve; the input
/// must be square, symmetric, nonnegative, and at most 5000 x 5000.
std::vector<double> laplacian_spectrum(const Matrix& adjacency);

/// Spectra of the base graph versus its gate-weighted augmentation
/// (residual weight 1-g, buffer legs g; no self-loops in the Laplacian).
SpectrumReport eigenvalue_shift(const Graph& graph, double alpha,
                                std::span<const double> gates);

std::string spectrum_json(const SpectrumReport& report);

} // namespace buffgraph
