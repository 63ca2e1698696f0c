#include "buffgraph/train.hpp"

#include "buffgraph/heterophily.hpp"
#include "buffgraph/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace buffgraph {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<std::int64_t> train_class_counts(const Graph& graph,
                                             std::span<const std::int32_t> mask) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(graph.num_classes), 0);
    for (std::int32_t v : mask) {
        std::int32_t y = graph.labels[static_cast<std::size_t>(v)];
        if (y != kNoLabel) counts[static_cast<std::size_t>(y)]++;
    }
    return counts;
}

struct LossOptions {
    std::optional<std::vector<double>> class_weights;
    std::optional<std::vector<double>> logit_bias;

    const std::vector<double>* weights_ptr() const {
        return class_weights.has_value() ? &*class_weights : nullptr;
    }
    const std::vector<double>* bias_ptr() const {
        return logit_bias.has_value() ? &*logit_bias : nullptr;
    }
};

LossOptions make_loss_options(const Graph& graph, std::span<const std::int32_t> train_mask,
                              LossMode mode) {
    LossOptions options;
    if (mode == LossMode::kPlain) return options;
    auto counts = train_class_counts(graph, train_mask);
    std::int64_t total = 0;
    for (std::int64_t n : counts) total += n;
    if (mode == LossMode::kReweight) {
        std::vector<double> weights(counts.size(), 0.0);
        for (std::size_t c = 0; c < counts.size(); ++c) {
            if (counts[c] > 0) weights[c] = 1.0 / static_cast<double>(counts[c]);
        }
        options.class_weights = std::move(weights);
    } else {
        std::vector<double> bias(counts.size(), -700.0); // effectively -inf prior
        for (std::size_t c = 0; c < counts.size(); ++c) {
            if (counts[c] > 0) {
                bias[c] = std::log(static_cast<double>(counts[c]) / static_cast<double>(total));
            }
        }
        options.logit_bias = std::move(bias);
    }
    return options;
}

std::vector<std::int32_t> argmax_rows(const Matrix& logits, std::int32_t rows) {
    std::vector<std::int32_t> out(static_cast<std::size_t>(rows));
    for (std::int32_t i = 0; i < rows; ++i) {
        Eigen::Index best = 0;
        logits.row(i).maxCoeff(&best); // first maximum: ties resolve low
        out[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(best);
    }
    return out;
}

} // namespace

void validate(const TrainConfig& config) {
    if (config.alpha < 0.0 || config.alpha > 1.0) {
        throw InvalidArgument("train config: alpha must be in [0, 1]");
    }
    if (config.lambda < 0.0) throw InvalidArgument("train config: lambda must be >= 0");
    if (config.margin < 0.0) throw InvalidArgument("train config: margin must be >= 0");
    if (config.lr <= 0.0) throw InvalidArgument("train config: lr must be positive");
    if (config.hidden_dim < 1) throw InvalidArgument("train config: hidden_dim must be >= 1");
    if (config.dropout < 0.0 || config.dropout >= 1.0) {
        throw InvalidArgument("train config: dropout must be in [0, 1)");
    }
    if (config.max_epochs < 1) throw InvalidArgument("train config: max_epochs must be >= 1");
    if (config.patience < 1 || config.patience > config.max_epochs) {
        throw InvalidArgument("train config: patience must be in [1, max_epochs]");
    }
    if (config.pretrain_epochs < 0) {
        throw InvalidArgument("train config: pretrain_epochs must be >= 0");
    }
    if (config.recompute_interval < 1) {
        throw InvalidArgument("train config: recompute_interval must be >= 1");
    }
    if (config.fixed_gate.has_value() &&
        (*config.fixed_gate < 0.0 || *config.fixed_gate > 1.0)) {
        throw InvalidArgument("train config: fixed_gate must be in [0, 1]");
    }
}

void write_train_log(const std::filesystem::path& file, const TrainLog& log) {
    std::ofstream out(file);
    if (!out) throw Error("write_train_log: cannot open " + file.string());
    out << "epoch,loss_pred,loss_hetero,loss_total,val_acc,val_bacc,val_f1,"
           "gates_refreshed,train_ms,eval_ms\n";
    char buf[512];
    for (const auto& r : log.records) {
        std::snprintf(buf, sizeof buf,
                      "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.3f,%.3f\n", r.epoch,
                      r.loss_pred, r.loss_hetero, r.loss_total, r.val_acc, r.val_bacc,
                      r.val_f1, r.gates_refreshed ? 1 : 0, r.train_ms, r.eval_ms);
        out << buf;
    }
    out << "# best_epoch=" << log.best_epoch << "\n";
}

PretrainResult pretrain(const Graph& graph, const Split& split, const TrainConfig& config) {
    validate(config);
    if (graph.num_classes < 1) {
        throw InvalidArgument("pretrain: graph has no classes");
    }
    PretrainResult result;
    result.model = make_model(graph.feature_dim(), config.hidden_dim, graph.num_classes,
                              config.dropout, config.seed);
    CsrMatrix op = gcn_operator(graph);
    for (std::int32_t epoch = 1; epoch <= config.pretrain_epochs; ++epoch) {
        ForwardTrace trace = gcn_forward(op, graph.features, result.model, true);
        LossResult ce = softmax_cross_entropy(trace.logits(), graph.labels, split.train);
        auto grads = gcn_backward(op, trace, result.model, ce.grad);
        adam_step(result.model, grads, config.lr);
        result.model.forward_index += 1;
    }
    ForwardTrace trace = gcn_forward(op, graph.features, result.model, false);
    result.edge_scores = edge_scores(trace.penultimate(), undirected_edges(graph));
    return result;
}

FitResult fit(const Graph& graph, const Split& split, const TrainConfig& config,
              const FitHooks& hooks) {
    validate(config);
    if (split.train.empty() || split.val.empty()) {
        throw InvalidArgument("fit: train and validation masks must be non-empty");
    }

    PretrainResult pre = pretrain(graph, split, config);
    ModelState model = std::move(pre.model);

    const std::int32_t n = graph.num_nodes;
    const auto original_edges = undirected_edges(graph);
    const bool buffered = config.method == TrainMethod::kBuffGraph;

    FitResult result;
    result.aug = augment(graph, config.alpha);
    if (!original_edges.empty()) {
        if (config.fixed_gate.has_value()) {
            std::vector<double> fixed(original_edges.size(), *config.fixed_gate);
            set_gates(result.aug, fixed);
        } else if (buffered) {
            set_gates(result.aug, gates_from_scores(pre.edge_scores));
        } else {
            std::vector<double> zeros(original_edges.size(), 0.0);
            set_gates(result.aug, zeros);
        }
    }

    CsrMatrix op = buffered ? normalized_propagation_matrix(result.aug) : gcn_operator(graph);
    const Matrix& inputs = buffered ? result.aug.features : graph.features;
    std::span<const std::int32_t> labels =
        buffered ? std::span<const std::int32_t>(result.aug.labels)
                 : std::span<const std::int32_t>(graph.labels);

    // Heterophily loss edges: both endpoints in the train mask.
    std::vector<UndirectedEdge> train_edges;
    if (buffered && config.lambda > 0.0) {
        std::vector<char> in_train(static_cast<std::size_t>(n), 0);
        for (std::int32_t v : split.train) in_train[static_cast<std::size_t>(v)] = 1;
        for (const auto& e : original_edges) {
            if (in_train[static_cast<std::size_t>(e.u)] && in_train[static_cast<std::size_t>(e.v)]) {
                train_edges.push_back(e);
            }
        }
    }

    LossOptions loss_options = make_loss_options(graph, split.train, config.loss_mode);

    ModelState best_model = model;
    std::vector<double> best_gates = result.aug.gates;
    std::int32_t epochs_since_best = 0;

    const bool refresh_gates =
        buffered && !config.fixed_gate.has_value() && !original_edges.empty();

    for (std::int32_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        EpochRecord record;
        record.epoch = epoch;

        if (refresh_gates && epoch % config.recompute_interval == 0) {
            ForwardTrace probe = gcn_forward(op, inputs, model, false);
            auto scores = edge_scores(probe.penultimate(), original_edges);
            set_gates(result.aug, gates_from_scores(scores));
            op = normalized_propagation_matrix(result.aug);
            record.gates_refreshed = true;
        }

        auto train_start = Clock::now();
        ForwardTrace trace = gcn_forward(op, inputs, model, true);
        LossResult ce = softmax_cross_entropy(trace.logits(), labels, split.train,
                                              loss_options.weights_ptr(),
                                              loss_options.bias_ptr());
        record.loss_pred = ce.value;

        Matrix hetero_grad;
        const Matrix* hetero_grad_ptr = nullptr;
        if (buffered && config.lambda > 0.0 && !train_edges.empty()) {
            HeteroLossResult het =
                hetero_loss(trace.penultimate(), train_edges, labels, config.margin);
            record.loss_hetero = het.value;
            hetero_grad = config.lambda * het.grad;
            hetero_grad_ptr = &hetero_grad;
        }
        record.loss_total = record.loss_pred + config.lambda * record.loss_hetero;
        if (!std::isfinite(record.loss_total)) {
            throw NumericError("fit: non-finite total loss at epoch " + std::to_string(epoch));
        }

        auto grads = gcn_backward(op, trace, model, ce.grad, hetero_grad_ptr);
        adam_step(model, grads, config.lr);
        model.forward_index += 1;
        record.train_ms = ms_since(train_start);

        auto eval_start = Clock::now();
        ForwardTrace eval_trace = gcn_forward(op, inputs, model, false);
        auto predictions = argmax_rows(eval_trace.logits(), n);
        MetricsReport val =
            compute(predictions, graph.labels, split.val, graph.num_classes, nullptr, "val");
        record.val_acc = val.acc;
        record.val_bacc = val.bacc;
        record.val_f1 = val.macro_f1;
        record.eval_ms = ms_since(eval_start);

        if (hooks.on_eval_logits) {
            hooks.on_eval_logits(epoch, eval_trace.logits().topRows(n));
        }

        result.log.records.push_back(record);

        if (val.bacc > result.log.best_val_bacc) {
            result.log.best_val_bacc = val.bacc;
            result.log.best_epoch = epoch;
            best_model = model;
            best_gates = result.aug.gates;
            epochs_since_best = 0;
        } else if (++epochs_since_best >= config.patience) {
            break;
        }
    }

    result.model = std::move(best_model);
    if (!original_edges.empty()) set_gates(result.aug, best_gates);
    return result;
}

std::vector<std::int32_t> predict(const ModelState& model, const AugmentedGraph& aug) {
    CsrMatrix op = normalized_propagation_matrix(aug);
    ForwardTrace trace = gcn_forward(op, aug.features, model, false);
    return argmax_rows(trace.logits(), aug.base.num_nodes);
}

MetricsReport evaluate(const ModelState& model, const AugmentedGraph& aug,
                       std::span<const std::int32_t> mask, std::string mask_name,
                       const std::vector<std::optional<double>>* class_heterophily) {
    auto predictions = predict(model, aug);
    return compute(predictions, aug.base.labels, mask, aug.base.num_classes,
                   class_heterophily, std::move(mask_name));
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw InvalidArgument("linear_fit: need at least two matching points");
    }
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LinearFit fit;
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw InvalidArgument("linear_fit: degenerate x values");
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    double mean_y = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double predicted = fit.slope * x[i] + fit.intercept;
        ss_res += (y[i] - predicted) * (y[i] - predicted);
        ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

BenchResult run_bench(const BenchConfig& config) {
    if (config.sizes.empty()) throw InvalidArgument("bench: no sizes given");
    if (!std::is_sorted(config.sizes.begin(), config.sizes.end())) {
        throw InvalidArgument("bench: sizes must be ascending");
    }

    BenchResult result;
    for (std::int32_t size : config.sizes) {
        SynthConfig synth;
        std::int32_t per_class = size / config.num_classes;
        synth.class_sizes.assign(static_cast<std::size_t>(config.num_classes), per_class);
        synth.class_sizes.back() += size - per_class * config.num_classes;
        synth.p_in = synth.p_out = config.avg_degree / static_cast<double>(size - 1);
        synth.feature_dim = config.feature_dim;
        synth.seed = config.seed + static_cast<std::uint64_t>(size);
        Graph graph = generate(synth);

        Split split = split_random(graph, {}, config.seed);

        TrainConfig train;
        train.hidden_dim = config.hidden_dim;
        train.pretrain_epochs = config.pretrain_epochs;
        train.max_epochs = config.epochs;
        train.patience = config.epochs;
        train.seed = config.seed;
        FitResult run = fit(graph, split, train);

        BenchRow row;
        row.size = size;
        row.nodes = graph.num_nodes;
        row.edges = graph.num_edges();
        for (const auto& r : run.log.records) {
            row.train_ms += r.train_ms;
            row.eval_ms += r.eval_ms;
        }
        row.train_ms /= static_cast<double>(run.log.records.size());
        row.eval_ms /= static_cast<double>(run.log.records.size());
        result.rows.push_back(row);
    }

    std::vector<double> xs, ys;
    for (const auto& row : result.rows) {
        xs.push_back(static_cast<double>(row.size));
        ys.push_back(row.train_ms);
    }
    if (xs.size() >= 2) result.train_time_fit = linear_fit(xs, ys);
    return result;
}

} // namespace buffgraph
