#pragma once

#include "buffgraph/buffer.hpp"
#include "buffgraph/graph.hpp"
#include "buffgraph/metrics.hpp"
#include "buffgraph/nn.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace buffgraph {

enum class LossMode {
    kPlain,    // plain cross-entropy
    kReweight, // class weights inversely proportional to train frequency
    kBalanced, // log class-prior added to logits before softmax
};

enum class TrainMethod {
    kBuffGraph, // gated dual-path training on the augmented graph
    kVanilla,   // plain GCN on the base graph (paired baseline)
};

struct TrainConfig {
    double alpha = 0.5;
    double lambda = 1.0;
    double margin = 1.0;
    double lr = 0.01;
    std::int32_t hidden_dim = 256;
    double dropout = 0.4;
    std::int32_t max_epochs = 2000;
    std::int32_t patience = 500;
    std::int32_t pretrain_epochs = 200;
    std::int32_t recompute_interval = 50;
    LossMode loss_mode = LossMode::kPlain;
    TrainMethod method = TrainMethod::kBuffGraph;
    std::uint64_t seed = 0;
    // Debug/ablation: freeze every gate at this value and skip recomputation
    // (0 reduces message passing to the vanilla graph).
    std::optional<double> fixed_gate;
};

void validate(const TrainConfig& config);

struct EpochRecord {
    std::int32_t epoch = 0; // 1-based
    double loss_pred = 0.0;
    double loss_hetero = 0.0;
    double loss_total = 0.0;
    double val_acc = 0.0;
    double val_bacc = 0.0;
    double val_f1 = 0.0;
    bool gates_refreshed = false;
    double train_ms = 0.0;
    double eval_ms = 0.0;
};

struct TrainLog {
    std::vector<EpochRecord> records;
    std::int32_t best_epoch = 0;     // 1-based; 0 = none
    double best_val_bacc = -1.0;
};

void write_train_log(const std::filesystem::path& file, const TrainLog& log);

/// Stage one: train a vanilla GCN on the original graph with plain CE for
/// pretrain_epochs, then score every original edge from the penultimate
/// embeddings. pretrain_epochs = 0 scores the freshly initialized model.
struct PretrainResult {
    ModelState model;
    std::vector<double> edge_scores; // one per canonical original edge
};
PretrainResult pretrain(const Graph& graph, const Split& split, const TrainConfig& config);

struct FitHooks {
    /// Called after each epoch's validation forward with the logits of the
    /// original nodes.
    std::function<void(std::int32_t epoch, const Matrix& logits)> on_eval_logits;
};

/// Full two-stage training. Returns the model and gate state of the epoch
/// with the best validation balanced accuracy.
struct FitResult {
    ModelState model;
    AugmentedGraph aug; // gates restored to the best epoch's values
    TrainLog log;
};
FitResult fit(const Graph& graph, const Split& split, const TrainConfig& config,
              const FitHooks& hooks = {});

/// Dropout-off forward on the augmented operator; argmax predictions on
/// original nodes; metrics over the given mask.
MetricsReport evaluate(const ModelState& model, const AugmentedGraph& aug,
                       std::span<const std::int32_t> mask, std::string mask_name = {},
                       const std::vector<std::optional<double>>* class_heterophily = nullptr);

/// Argmax class per original node, dropout off. Ties resolve to the lowest id.
std::vector<std::int32_t> predict(const ModelState& model, const AugmentedGraph& aug);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Scalability probe: per size, generate an equal-block planted partition
/// with constant expected degree, run `epochs` gated training epochs and
/// report the mean per-epoch train and eval wall time.
struct BenchConfig {
    std::vector<std::int32_t> sizes;
    std::int32_t num_classes = 4;
    double avg_degree = 8.0;
    std::int32_t feature_dim = 32;
    std::int32_t hidden_dim = 32;
    std::int32_t epochs = 20;
    std::int32_t pretrain_epochs = 5;
    std::uint64_t seed = 7;
};
struct BenchRow {
    std::int32_t size = 0;
    std::int64_t nodes = 0;
    std::int64_t edges = 0;
    double train_ms = 0.0;
    double eval_ms = 0.0;
};
struct BenchResult {
    std::vector<BenchRow> rows;
    LinearFit train_time_fit; // train_ms against node count
};
BenchResult run_bench(const BenchConfig& config);

} // namespace buffgraph
