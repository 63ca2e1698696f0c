#pragma once

#include "buffgraph/graph.hpp"
#include "buffgraph/linalg.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace buffgraph {

/// GCN parameters and optimizer state. The architecture is fixed: three
/// hidden layers of equal width and a linear output layer, so weights holds
/// four matrices chained in_dim -> H -> H -> H -> C.
struct ModelState {
    std::vector<Matrix> weights;
    std::vector<Matrix> moment1; // Adam first moments, shapes mirror weights
    std::vector<Matrix> moment2; // Adam second moments
    std::int64_t adam_steps = 0;
    double dropout_rate = 0.0;
    std::uint64_t dropout_seed = 0;
    // Dropout stream position. Masks are keyed by (dropout_seed,
    // forward_index, layer, row), so a node's mask does not depend on how
    // many other rows the batch has; training advances this after each
    // train-mode forward.
    std::uint64_t forward_index = 0;

    std::int32_t input_dim() const { return static_cast<std::int32_t>(weights.front().rows()); }
    std::int32_t hidden_dim() const { return static_cast<std::int32_t>(weights.front().cols()); }
    std::int32_t num_classes() const { return static_cast<std::int32_t>(weights.back().cols()); }
};

/// Glorot-uniform initialized model (range ±sqrt(6 / (fan_in + fan_out))).
ModelState make_model(std::int32_t input_dim, std::int32_t hidden_dim,
                      std::int32_t num_classes, double dropout_rate, std::uint64_t seed);

/// Everything the backward pass needs from a forward pass.
struct ForwardTrace {
    std::vector<Matrix> hidden;         // H_0 = X, then post-ReLU(+dropout) layers; back() is penultimate
    std::vector<Matrix> propagated;     // P * H_l per layer
    std::vector<Matrix> pre_activation; // (P * H_l) * Theta_l per layer; back() is the logits
    std::vector<Matrix> dropout_masks;  // 0/1 per hidden layer; empty rows in eval mode
    bool train_mode = false;

    const Matrix& logits() const { return pre_activation.back(); }
    const Matrix& penultimate() const { return hidden.back(); }
};

/// Layer rule H_{l+1} = ReLU(P H_l Theta_l) with inverted dropout after each
/// hidden activation in train mode; the final layer emits raw logits.
/// Deterministic given (model.dropout_seed, model.forward_index).
ForwardTrace gcn_forward(const CsrMatrix& op, const Matrix& features,
                         const ModelState& model, bool train_mode);

/// Weight gradients for d(loss)/d(logits), optionally plus a gradient
/// arriving directly at the penultimate embeddings (heterophily loss).
/// The operator must be the one used in the forward pass (symmetric).
std::vector<Matrix> gcn_backward(const CsrMatrix& op, const ForwardTrace& trace,
                                 const ModelState& model, const Matrix& grad_logits,
                                 const Matrix* grad_penultimate = nullptr);

struct LossResult {
    double value = 0.0;
    Matrix grad;
};

/// Mean masked cross-entropy with optional per-class weights (normalized by
/// the sum of weights over the mask, so uniform weights give the plain mean)
/// and optional additive logit bias (balanced-softmax log priors).
LossResult softmax_cross_entropy(const Matrix& logits, std::span<const std::int32_t> labels,
                                 std::span<const std::int32_t> mask,
                                 const std::vector<double>* class_weights = nullptr,
                                 const std::vector<double>* logit_bias = nullptr);

/// Contrastive edge loss on penultimate embeddings: same-label edges pay
/// their Manhattan distance h, different-label edges pay max(0, margin - h).
/// Mean over the listed edges; zero loss and gradient when no edges listed.
struct HeteroLossResult {
    double value = 0.0;
    Matrix grad;
    std::size_t num_edges = 0;
};
HeteroLossResult hetero_loss(const Matrix& embeddings, std::span<const UndirectedEdge> edges,
                             std::span<const std::int32_t> labels, double margin);

/// Bias-corrected Adam update. Throws NumericError naming the layer if a
/// gradient has non-finite entries.
void adam_step(ModelState& model, const std::vector<Matrix>& gradients, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// Vanilla GCN propagation operator D^{-1/2} (A + I) D^{-1/2} of a graph.
CsrMatrix gcn_operator(const Graph& graph);

/// Flat binary checkpoint: layer count, per-layer shape, seed, then the
/// weight matrices as little-endian 64-bit floats in row-major order.
void save_model(const std::filesystem::path& file, const ModelState& model);
ModelState load_model(const std::filesystem::path& file);

} // namespace buffgraph
