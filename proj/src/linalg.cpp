#include "buffgraph/linalg.hpp"

#include "buffgraph/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace buffgraph {

int max_threads() {
    static const int cached = [] {
        const char* env = std::getenv("BUFFGRAPH_THREADS");
        if (env == nullptr) return 1;
        int n = std::atoi(env);
        return n <= 1 ? 1 : n;
    }();
    return cached;
}

void parallel_rows(std::int32_t rows,
                   const std::function<void(std::int32_t, std::int32_t)>& fn) {
    int threads = max_threads();
    if (threads <= 1 || rows < 2 * threads) {
        fn(0, rows);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    std::int32_t chunk = (rows + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        std::int32_t begin = t * chunk;
        std::int32_t end = std::min(rows, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& th : pool) th.join();
}

Matrix spmm(const CsrMatrix& a, const Matrix& x) {
    if (a.cols != x.rows()) {
        throw InvalidArgument("spmm: operator has " + std::to_string(a.cols) +
                              " columns but dense input has " +
                              std::to_string(x.rows()) + " rows");
    }
    Matrix y(a.rows, x.cols());
    parallel_rows(a.rows, [&](std::int32_t begin, std::int32_t end) {
        for (std::int32_t i = begin; i < end; ++i) {
            auto row = y.row(i);
            row.setZero();
            for (std::int64_t k = a.offsets[i]; k < a.offsets[i + 1]; ++k) {
                row += a.values[static_cast<std::size_t>(k)] *
                       x.row(a.indices[static_cast<std::size_t>(k)]);
            }
        }
    });
    return y;
}

CsrMatrix normalize_adjacency(const CsrMatrix& adjacency) {
    if (adjacency.rows != adjacency.cols) {
        throw InvalidArgument("normalize_adjacency: matrix must be square");
    }
    const std::int32_t n = adjacency.rows;

    CsrMatrix out;
    out.rows = n;
    out.cols = n;
    out.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
    out.indices.reserve(adjacency.indices.size() + static_cast<std::size_t>(n));
    out.values.reserve(adjacency.indices.size() + static_cast<std::size_t>(n));

    // Insert the unit self-loop at its sorted position in each row.
    std::vector<double> degree(static_cast<std::size_t>(n), 0.0);
    for (std::int32_t i = 0; i < n; ++i) {
        bool placed = false;
        double d = 1.0;
        for (std::int64_t k = adjacency.offsets[i]; k < adjacency.offsets[i + 1]; ++k) {
            std::int32_t j = adjacency.indices[static_cast<std::size_t>(k)];
            double w = adjacency.values[static_cast<std::size_t>(k)];
            if (j == i) {
                throw InvalidArgument("normalize_adjacency: input already has a self-loop at node " +
                                      std::to_string(i));
            }
            if (!placed && j > i) {
                out.indices.push_back(i);
                out.values.push_back(1.0);
                placed = true;
            }
            out.indices.push_back(j);
            out.values.push_back(w);
            d += w;
        }
        if (!placed) {
            out.indices.push_back(i);
            out.values.push_back(1.0);
        }
        out.offsets[static_cast<std::size_t>(i) + 1] = static_cast<std::int64_t>(out.indices.size());
        degree[static_cast<std::size_t>(i)] = d;
    }

    std::vector<double> inv_sqrt(static_cast<std::size_t>(n));
    for (std::int32_t i = 0; i < n; ++i) {
        inv_sqrt[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(degree[static_cast<std::size_t>(i)]);
    }
    for (std::int32_t i = 0; i < n; ++i) {
        for (std::int64_t k = out.offsets[i]; k < out.offsets[i + 1]; ++k) {
            std::size_t idx = static_cast<std::size_t>(k);
            out.values[idx] *= inv_sqrt[static_cast<std::size_t>(i)] *
                               inv_sqrt[static_cast<std::size_t>(out.indices[idx])];
        }
    }
    return out;
}

Matrix csr_to_dense(const CsrMatrix& a) {
    Matrix d = Matrix::Zero(a.rows, a.cols);
    for (std::int32_t i = 0; i < a.rows; ++i) {
        for (std::int64_t k = a.offsets[i]; k < a.offsets[i + 1]; ++k) {
            d(i, a.indices[static_cast<std::size_t>(k)]) = a.values[static_cast<std::size_t>(k)];
        }
    }
    return d;
}

} // namespace buffgraph
