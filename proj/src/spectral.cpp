#include "buffgraph/spectral.hpp"

#include "buffgraph/buffer.hpp"

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include <algorithm>

namespace buffgraph {

namespace {

constexpr std::int32_t kMaxDenseNodes = 5000;

} // namespace

std::vector<double> laplacian_spectrum(const Matrix& adjacency) {
    if (adjacency.rows() != adjacency.cols()) {
        throw InvalidArgument("laplacian_spectrum: matrix must be square");
    }
    if (adjacency.rows() > kMaxDenseNodes) {
        throw InvalidArgument("laplacian_spectrum: size " + std::to_string(adjacency.rows()) +
                              " exceeds the dense solver bound " + std::to_string(kMaxDenseNodes));
    }
    if ((adjacency - adjacency.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw InvalidArgument("laplacian_spectrum: adjacency is not symmetric");
    }
    if (adjacency.size() > 0 && adjacency.minCoeff() < 0.0) {
        throw InvalidArgument("laplacian_spectrum: negative edge weight");
    }

    Matrix laplacian = -adjacency;
    for (Eigen::Index i = 0; i < adjacency.rows(); ++i) {
        laplacian(i, i) = adjacency.row(i).sum() - adjacency(i, i);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian,
                                                          Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericError("laplacian_spectrum: eigensolver failed to converge");
    }
    std::vector<double> values(solver.eigenvalues().data(),
                               solver.eigenvalues().data() + solver.eigenvalues().size());
    std::sort(values.begin(), values.end());
    return values;
}

SpectrumReport eigenvalue_shift(const Graph& graph, double alpha,
                                std::span<const double> gates) {
    const std::int64_t num_edges = graph.num_edges();
    if (graph.num_nodes + num_edges > kMaxDenseNodes) {
        throw InvalidArgument("eigenvalue_shift: augmented size " +
                              std::to_string(graph.num_nodes + num_edges) +
                              " exceeds the dense solver bound");
    }

    AugmentedGraph aug = augment(graph, alpha);
    if (num_edges > 0) set_gates(aug, gates);

    Matrix base_adj = Matrix::Zero(graph.num_nodes, graph.num_nodes);
    for (std::int32_t u = 0; u < graph.num_nodes; ++u) {
        for (std::int32_t v : graph.neighbors(u)) base_adj(u, v) = 1.0;
    }

    SpectrumReport report;
    report.alpha = alpha;
    report.base_nodes = graph.num_nodes;
    report.augmented_nodes = aug.num_nodes();
    report.num_edges = num_edges;
    report.base_eigenvalues = laplacian_spectrum(base_adj);
    report.augmented_eigenvalues = laplacian_spectrum(csr_to_dense(aug.adjacency));
    report.delta.resize(static_cast<std::size_t>(graph.num_nodes));
    for (std::int32_t i = 0; i < graph.num_nodes; ++i) {
        report.delta[static_cast<std::size_t>(i)] =
            report.augmented_eigenvalues[static_cast<std::size_t>(i)] -
            report.base_eigenvalues[static_cast<std::size_t>(i)];
    }
    return report;
}

std::string spectrum_json(const SpectrumReport& report) {
    nlohmann::json j;
    j["base_nodes"] = report.base_nodes;
    j["augmented_nodes"] = report.augmented_nodes;
    j["num_edges"] = report.num_edges;
    j["alpha"] = report.alpha;
    j["base_eigenvalues"] = report.base_eigenvalues;
    j["augmented_eigenvalues"] = report.augmented_eigenvalues;
    j["delta"] = report.delta;
    j["delta_convention"] =
        "delta[i] = augmented_eigenvalues[i] - base_eigenvalues[i] over the first "
        "base_nodes positions of the ascending-sorted spectra";
    return j.dump(2);
}

} // namespace buffgraph
