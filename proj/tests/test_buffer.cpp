#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "buffgraph/buffer.hpp"
#include "buffgraph/nn.hpp"
#include "test_util.hpp"

#include <random>

using namespace buffgraph;

namespace {

Graph two_node_edge() {
    Matrix features(2, 2);
    features << 2.0, 4.0, 0.0, 0.0;
    return build_graph(2, {{std::pair<std::int32_t, std::int32_t>{0, 1}}},
                       std::move(features), {0, 1}, 2);
}

} // namespace

TEST_CASE("buffer features are the alpha mixup of the endpoints") {
    Graph g = two_node_edge();
    SUBCASE("alpha 0.5 is the midpoint") {
        AugmentedGraph aug = augment(g, 0.5);
        CHECK(aug.features(2, 0) == 1.0);
        CHECK(aug.features(2, 1) == 2.0);
    }
    SUBCASE("alpha 1 copies the source (lower id)") {
        AugmentedGraph aug = augment(g, 1.0);
        CHECK(aug.features(2, 0) == 2.0);
        CHECK(aug.features(2, 1) == 4.0);
    }
    SUBCASE("alpha 0 copies the target (higher id)") {
        AugmentedGraph aug = augment(g, 0.0);
        CHECK(aug.features(2, 0) == 0.0);
        CHECK(aug.features(2, 1) == 0.0);
    }
    SUBCASE("alpha outside [0,1] is rejected") {
        CHECK_THROWS_AS(augment(g, 1.5), InvalidArgument);
    }
}

TEST_CASE("augment counts: N+E nodes and 6E directed entries") {
    // 4 nodes, 5 edges.
    std::vector<std::pair<std::int32_t, std::int32_t>> pairs = {
        {0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}};
    Graph g = build_graph(4, pairs, Matrix::Zero(4, 2), {0, 0, 1, 1}, 2);
    REQUIRE(g.num_edges() == 5);
    AugmentedGraph aug = augment(g, 0.5);
    CHECK(aug.num_nodes() == 9);
    CHECK(aug.adjacency.nnz() == 30);
    CHECK(aug.labels.size() == 9);
    for (std::int32_t b = 4; b < 9; ++b) CHECK(aug.labels[static_cast<std::size_t>(b)] == kNoLabel);
    // Gates start at 0.5 everywhere.
    for (double gate : aug.gates) CHECK(gate == 0.5);
}

TEST_CASE("set_gates writes the convex weight split") {
    Graph g = two_node_edge();
    AugmentedGraph aug = augment(g, 0.5);
    auto weight_at = [&aug](std::int64_t slot) {
        return aug.adjacency.values[static_cast<std::size_t>(slot)];
    };
    SUBCASE("gate 0: pure direct passing") {
        set_gates(aug, std::vector<double>{0.0});
        CHECK(weight_at(aug.slots[0].res_uv) == 1.0);
        CHECK(weight_at(aug.slots[0].u_buf) == 0.0);
        CHECK(weight_at(aug.slots[0].buf_v) == 0.0);
    }
    SUBCASE("gate 1: pure buffered passing") {
        set_gates(aug, std::vector<double>{1.0});
        CHECK(weight_at(aug.slots[0].res_uv) == 0.0);
        CHECK(weight_at(aug.slots[0].res_vu) == 0.0);
        CHECK(weight_at(aug.slots[0].u_buf) == 1.0);
        CHECK(weight_at(aug.slots[0].v_buf) == 1.0);
    }
    SUBCASE("gate 0.3: weights (0.7, 0.3, 0.3)") {
        set_gates(aug, std::vector<double>{0.3});
        CHECK(weight_at(aug.slots[0].res_uv) == doctest::Approx(0.7));
        CHECK(weight_at(aug.slots[0].u_buf) == doctest::Approx(0.3));
        CHECK(weight_at(aug.slots[0].v_buf) == doctest::Approx(0.3));
    }
    SUBCASE("out-of-range gate rejected") {
        CHECK_THROWS_AS(set_gates(aug, std::vector<double>{1.2}), InvalidArgument);
    }
    SUBCASE("count mismatch rejected") {
        CHECK_THROWS_AS(set_gates(aug, std::vector<double>{0.1, 0.2}), InvalidArgument);
    }
}

TEST_CASE("normalized propagation matrix") {
    SUBCASE("isolated node reduces to its self-loop") {
        Graph g = build_graph(1, {}, Matrix::Zero(1, 1), {0}, 1);
        AugmentedGraph aug = augment(g, 0.5);
        CsrMatrix op = normalized_propagation_matrix(aug);
        REQUIRE(op.nnz() == 1);
        CHECK(op.values[0] == doctest::Approx(1.0));
    }
    SUBCASE("single residual edge at gate 0 gives off-diagonals 1/2") {
        Graph g = two_node_edge();
        AugmentedGraph aug = augment(g, 0.5);
        set_gates(aug, std::vector<double>{0.0});
        Matrix dense = csr_to_dense(normalized_propagation_matrix(aug));
        // Degrees with self-loops: node 0 and 1 have 2; buffer has 1.
        CHECK(dense(0, 1) == doctest::Approx(0.5));
        CHECK(dense(1, 0) == doctest::Approx(0.5));
        CHECK(dense(0, 0) == doctest::Approx(0.5));
        CHECK(dense(2, 2) == doctest::Approx(1.0));
        CHECK(dense(0, 2) == doctest::Approx(0.0));
    }
    SUBCASE("random graph matches the dense oracle") {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (unsigned seed = 0; seed < 10; ++seed) {
            Graph g = test::random_graph(10, 2, 0.4, 3, seed);
            AugmentedGraph aug = augment(g, 0.3);
            std::vector<double> gates(static_cast<std::size_t>(g.num_edges()));
            for (auto& gate : gates) gate = unit(rng);
            if (!gates.empty()) set_gates(aug, gates);
            Matrix expected = test::dense_propagation_oracle(csr_to_dense(aug.adjacency));
            Matrix actual = csr_to_dense(normalized_propagation_matrix(aug));
            CHECK((expected - actual).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("vanilla equivalence: gates 0 restricted to original nodes") {
    for (unsigned seed = 0; seed < 5; ++seed) {
        Graph g = test::random_graph(12, 3, 0.3, 4, seed);
        AugmentedGraph aug = augment(g, 0.5);
        std::vector<double> zeros(static_cast<std::size_t>(g.num_edges()), 0.0);
        if (!zeros.empty()) set_gates(aug, zeros);

        Matrix vanilla = csr_to_dense(gcn_operator(g));
        Matrix full = csr_to_dense(normalized_propagation_matrix(aug));
        Matrix restricted = full.topLeftCorner(g.num_nodes, g.num_nodes);
        CHECK((vanilla - restricted).cwiseAbs().maxCoeff() < 1e-15);
        // Buffer rows reduce to isolated self-loops.
        for (std::int32_t b = g.num_nodes; b < aug.num_nodes(); ++b) {
            CHECK(full(b, b) == doctest::Approx(1.0));
            CHECK(full.row(b).sum() == doctest::Approx(1.0));
        }

        // Forward logits on original nodes agree within 1e-10.
        ModelState model = make_model(g.feature_dim(), 8, g.num_classes, 0.0, seed);
        ForwardTrace base = gcn_forward(gcn_operator(g), g.features, model, false);
        ForwardTrace wide = gcn_forward(normalized_propagation_matrix(aug), aug.features, model, false);
        CHECK((base.logits() - wide.logits().topRows(g.num_nodes)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("weight conservation across arbitrary set_gates sequences") {
    Graph g = test::random_graph(15, 3, 0.3, 3, 21);
    AugmentedGraph aug = augment(g, 0.5);
    const auto num_edges = static_cast<std::size_t>(g.num_edges());
    REQUIRE(num_edges > 0);

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int round = 0; round < 1200; ++round) {
        std::vector<double> gates(num_edges);
        for (auto& gate : gates) gate = unit(rng);
        set_gates(aug, gates);
        for (std::size_t e = 0; e < num_edges; ++e) {
            const auto& s = aug.slots[e];
            double residual = aug.adjacency.values[static_cast<std::size_t>(s.res_uv)];
            double buffered = aug.adjacency.values[static_cast<std::size_t>(s.u_buf)];
            CHECK(residual + buffered == 1.0);
            CHECK(aug.adjacency.values[static_cast<std::size_t>(s.res_vu)] == residual);
            CHECK(aug.adjacency.values[static_cast<std::size_t>(s.buf_u)] == buffered);
            CHECK(aug.adjacency.values[static_cast<std::size_t>(s.v_buf)] == buffered);
            CHECK(aug.adjacency.values[static_cast<std::size_t>(s.buf_v)] == buffered);
        }
    }
    // Idempotence: reapplying the same gates leaves the weights unchanged.
    std::vector<double> gates(num_edges, 0.25);
    set_gates(aug, gates);
    auto values = aug.adjacency.values;
    set_gates(aug, gates);
    CHECK(values == aug.adjacency.values);
}

TEST_CASE("buffer features reproduce the mixup bit-for-bit") {
    Graph g = test::random_graph(20, 2, 0.25, 6, 8);
    const double alpha = 0.37;
    AugmentedGraph aug = augment(g, alpha);
    for (std::size_t e = 0; e < aug.edges.size(); ++e) {
        const auto& edge = aug.edges[e];
        std::int32_t b = g.num_nodes + static_cast<std::int32_t>(e);
        for (std::int32_t j = 0; j < g.feature_dim(); ++j) {
            double expected = alpha * g.features(edge.u, j) + (1.0 - alpha) * g.features(edge.v, j);
            CHECK(aug.features(b, j) == expected); // bit-exact
        }
    }
}
