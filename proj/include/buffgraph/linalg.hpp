#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

namespace buffgraph {

/// Dense row-major matrix of doubles. Row-major keeps per-node feature and
/// embedding rows contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Sparse matrix in CSR form with explicit weights.
/// Column indices are strictly increasing within each row.
struct CsrMatrix {
    std::int32_t rows = 0;
    std::int32_t cols = 0;
    std::vector<std::int64_t> offsets; // size rows + 1
    std::vector<std::int32_t> indices;
    std::vector<double> values;

    std::int64_t nnz() const { return static_cast<std::int64_t>(indices.size()); }
};

/// Thread cap from BUFFGRAPH_THREADS (0 or unset = 1, single-threaded).
int max_threads();

/// Run fn over row ranges [begin, end). Output rows are disjoint per chunk,
/// so results are identical for any thread count.
void parallel_rows(std::int32_t rows, const std::function<void(std::int32_t, std::int32_t)>& fn);

/// Y = A * X (CSR times dense). Per-row accumulation order is fixed by the
/// CSR column order, independent of threading.
Matrix spmm(const CsrMatrix& a, const Matrix& x);

/// D^{-1/2} (A + I) D^{-1/2} with D = rowsums(A + I) and unit self-loops.
/// A must be symmetric nonnegative without self-loop entries.
CsrMatrix normalize_adjacency(const CsrMatrix& adjacency);

Matrix csr_to_dense(const CsrMatrix& a);

} // namespace buffgraph
