#include "buffgraph/nn.hpp"

#include "buffgraph/rng.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

namespace buffgraph {

namespace {

constexpr std::uint64_t kInitStreamTag = 0x494e4954ull;
constexpr std::uint64_t kDropStreamTag = 0x44524f50ull;
constexpr std::uint64_t kCheckpointMagic = 0x314d4746465542ull; // "BUFFGM1"

double sign_or_zero(double x) {
    if (x > 0.0) return 1.0;
    if (x < 0.0) return -1.0;
    return 0.0;
}

} // namespace

ModelState make_model(std::int32_t input_dim, std::int32_t hidden_dim,
                      std::int32_t num_classes, double dropout_rate, std::uint64_t seed) {
    if (input_dim < 1 || hidden_dim < 1 || num_classes < 1) {
        throw InvalidArgument("make_model: dimensions must be positive");
    }
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
        throw InvalidArgument("make_model: dropout_rate must be in [0, 1)");
    }
    ModelState model;
    model.dropout_rate = dropout_rate;
    model.dropout_seed = seed;
    const std::int32_t dims[5] = {input_dim, hidden_dim, hidden_dim, hidden_dim, num_classes};
    for (int l = 0; l < 4; ++l) {
        Matrix w(dims[l], dims[l + 1]);
        double bound = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
        Rng rng = Rng::stream(seed, kInitStreamTag, static_cast<std::uint64_t>(l));
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            w.data()[i] = bound * (2.0 * rng.uniform() - 1.0);
        }
        model.weights.push_back(std::move(w));
        model.moment1.emplace_back(Matrix::Zero(dims[l], dims[l + 1]));
        model.moment2.emplace_back(Matrix::Zero(dims[l], dims[l + 1]));
    }
    return model;
}

ForwardTrace gcn_forward(const CsrMatrix& op, const Matrix& features,
                         const ModelState& model, bool train_mode) {
    if (op.cols != features.rows()) {
        throw InvalidArgument("gcn_forward: operator size " + std::to_string(op.cols) +
                              " != feature rows " + std::to_string(features.rows()));
    }
    if (features.cols() != model.input_dim()) {
        throw InvalidArgument("gcn_forward: feature dim " + std::to_string(features.cols()) +
                              " != model input dim " + std::to_string(model.input_dim()));
    }
    if (!features.allFinite()) {
        throw NumericError("gcn_forward: non-finite value in input features");
    }

    const auto num_layers = model.weights.size();
    ForwardTrace trace;
    trace.train_mode = train_mode;
    trace.hidden.reserve(num_layers);
    trace.hidden.push_back(features);

    const bool use_dropout = train_mode && model.dropout_rate > 0.0;
    const double keep = 1.0 - model.dropout_rate;

    for (std::size_t l = 0; l < num_layers; ++l) {
        trace.propagated.push_back(spmm(op, trace.hidden[l]));
        trace.pre_activation.push_back(trace.propagated[l] * model.weights[l]);
        if (l + 1 == num_layers) break; // raw logits, no activation/dropout
        Matrix h = trace.pre_activation[l].cwiseMax(0.0);
        if (use_dropout) {
            Matrix mask(h.rows(), h.cols());
            parallel_rows(static_cast<std::int32_t>(h.rows()),
                          [&](std::int32_t begin, std::int32_t end) {
                for (std::int32_t i = begin; i < end; ++i) {
                    Rng rng = Rng::stream(model.dropout_seed ^ kDropStreamTag,
                                          model.forward_index, static_cast<std::uint64_t>(l),
                                          static_cast<std::uint64_t>(i));
                    for (Eigen::Index j = 0; j < h.cols(); ++j) {
                        mask(i, j) = rng.uniform() < model.dropout_rate ? 0.0 : 1.0;
                    }
                }
            });
            h = h.cwiseProduct(mask) / keep;
            trace.dropout_masks.push_back(std::move(mask));
        }
        trace.hidden.push_back(std::move(h));
    }
    return trace;
}

std::vector<Matrix> gcn_backward(const CsrMatrix& op, const ForwardTrace& trace,
                                 const ModelState& model, const Matrix& grad_logits,
                                 const Matrix* grad_penultimate) {
    const auto num_layers = model.weights.size();
    if (grad_logits.rows() != trace.logits().rows() ||
        grad_logits.cols() != trace.logits().cols()) {
        throw InvalidArgument("gcn_backward: grad_logits shape mismatch");
    }
    const bool use_dropout = trace.train_mode && !trace.dropout_masks.empty();
    const double keep = 1.0 - model.dropout_rate;

    std::vector<Matrix> grads(num_layers);
    Matrix grad_z = grad_logits;
    for (std::size_t l = num_layers; l-- > 0;) {
        // pre_activation_l = propagated_l * Theta_l
        grads[l] = trace.propagated[l].transpose() * grad_z;
        if (l == 0) break;
        Matrix grad_prop = grad_z * model.weights[l].transpose();
        // P is symmetric, so d(P H)/dH pulls back through another P multiply.
        Matrix grad_h = spmm(op, grad_prop);
        if (l == num_layers - 1 && grad_penultimate != nullptr) {
            grad_h += *grad_penultimate;
        }
        if (use_dropout) {
            grad_h = grad_h.cwiseProduct(trace.dropout_masks[l - 1]) / keep;
        }
        // ReLU subgradient: 0 at the kink.
        grad_z = (trace.pre_activation[l - 1].array() > 0.0)
                     .select(grad_h, Matrix::Zero(grad_h.rows(), grad_h.cols()));
    }
    return grads;
}

LossResult softmax_cross_entropy(const Matrix& logits, std::span<const std::int32_t> labels,
                                 std::span<const std::int32_t> mask,
                                 const std::vector<double>* class_weights,
                                 const std::vector<double>* logit_bias) {
    const auto num_classes = static_cast<std::int32_t>(logits.cols());
    if (mask.empty()) {
        throw InvalidArgument("softmax_cross_entropy: empty mask");
    }
    if (class_weights != nullptr &&
        static_cast<std::int32_t>(class_weights->size()) != num_classes) {
        throw InvalidArgument("softmax_cross_entropy: class_weights length " +
                              std::to_string(class_weights->size()) + " != " +
                              std::to_string(num_classes) + " classes");
    }
    if (logit_bias != nullptr &&
        static_cast<std::int32_t>(logit_bias->size()) != num_classes) {
        throw InvalidArgument("softmax_cross_entropy: logit_bias length mismatch");
    }

    double weight_sum = 0.0;
    for (std::int32_t v : mask) {
        std::int32_t y = labels[static_cast<std::size_t>(v)];
        if (y < 0 || y >= num_classes) {
            throw InvalidArgument("softmax_cross_entropy: node " + std::to_string(v) +
                                  " has invalid label " + std::to_string(y));
        }
        weight_sum += class_weights != nullptr ? (*class_weights)[static_cast<std::size_t>(y)] : 1.0;
    }
    if (weight_sum <= 0.0) {
        throw InvalidArgument("softmax_cross_entropy: class weights sum to zero over mask");
    }

    LossResult result;
    result.grad = Matrix::Zero(logits.rows(), logits.cols());
    Eigen::RowVectorXd probs(num_classes);
    for (std::int32_t v : mask) {
        Eigen::RowVectorXd row = logits.row(v);
        if (logit_bias != nullptr) {
            for (std::int32_t c = 0; c < num_classes; ++c) row(c) += (*logit_bias)[static_cast<std::size_t>(c)];
        }
        double row_max = row.maxCoeff();
        double denom = 0.0;
        for (std::int32_t c = 0; c < num_classes; ++c) {
            probs(c) = std::exp(row(c) - row_max);
            denom += probs(c);
        }
        probs /= denom;
        std::int32_t y = labels[static_cast<std::size_t>(v)];
        double w = class_weights != nullptr ? (*class_weights)[static_cast<std::size_t>(y)] : 1.0;
        result.value += -w * std::log(std::max(probs(y), std::numeric_limits<double>::min()));
        for (std::int32_t c = 0; c < num_classes; ++c) {
            result.grad(v, c) = w * (probs(c) - (c == y ? 1.0 : 0.0)) / weight_sum;
        }
    }
    result.value /= weight_sum;
    return result;
}

HeteroLossResult hetero_loss(const Matrix& embeddings, std::span<const UndirectedEdge> edges,
                             std::span<const std::int32_t> labels, double margin) {
    HeteroLossResult result;
    result.grad = Matrix::Zero(embeddings.rows(), embeddings.cols());
    result.num_edges = edges.size();
    if (edges.empty()) return result;

    const auto dim = static_cast<std::int32_t>(embeddings.cols());
    const double scale = 1.0 / (static_cast<double>(dim) * static_cast<double>(edges.size()));
    for (const auto& [u, v] : edges) {
        double h = 0.0;
        for (std::int32_t j = 0; j < dim; ++j) h += std::abs(embeddings(u, j) - embeddings(v, j));
        h /= static_cast<double>(dim);
        const bool different = labels[static_cast<std::size_t>(u)] != labels[static_cast<std::size_t>(v)];
        double dh; // d(contribution)/dh before the 1/E mean
        if (!different) {
            result.value += h;
            dh = 1.0;
        } else if (h < margin) {
            result.value += margin - h;
            dh = -1.0;
        } else {
            dh = 0.0; // hinge satisfied (subgradient 0 at h == margin)
        }
        if (dh != 0.0) {
            for (std::int32_t j = 0; j < dim; ++j) {
                double s = dh * sign_or_zero(embeddings(u, j) - embeddings(v, j)) * scale;
                result.grad(u, j) += s;
                result.grad(v, j) -= s;
            }
        }
    }
    result.value /= static_cast<double>(edges.size());
    return result;
}

void adam_step(ModelState& model, const std::vector<Matrix>& gradients, double lr,
               double beta1, double beta2, double eps) {
    if (gradients.size() != model.weights.size()) {
        throw InvalidArgument("adam_step: gradient count mismatch");
    }
    for (std::size_t l = 0; l < gradients.size(); ++l) {
        if (gradients[l].rows() != model.weights[l].rows() ||
            gradients[l].cols() != model.weights[l].cols()) {
            throw InvalidArgument("adam_step: gradient shape mismatch at layer " + std::to_string(l));
        }
        if (!gradients[l].allFinite()) {
            throw NumericError("adam_step: non-finite gradient at layer " + std::to_string(l));
        }
    }
    model.adam_steps += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(model.adam_steps));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(model.adam_steps));
    for (std::size_t l = 0; l < gradients.size(); ++l) {
        model.moment1[l] = beta1 * model.moment1[l] + (1.0 - beta1) * gradients[l];
        model.moment2[l].array() =
            beta2 * model.moment2[l].array() + (1.0 - beta2) * gradients[l].array().square();
        model.weights[l].array() -=
            lr * (model.moment1[l].array() / bc1) /
            ((model.moment2[l].array() / bc2).sqrt() + eps);
    }
}

CsrMatrix gcn_operator(const Graph& graph) {
    CsrMatrix adj;
    adj.rows = graph.num_nodes;
    adj.cols = graph.num_nodes;
    adj.offsets = graph.row_offsets;
    adj.indices = graph.col_indices;
    adj.values.assign(graph.col_indices.size(), 1.0);
    return normalize_adjacency(adj);
}

void save_model(const std::filesystem::path& file, const ModelState& model) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error("save_model: cannot open " + file.string());
    auto put_u64 = [&out](std::uint64_t x) {
        unsigned char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((x >> (8 * i)) & 0xff);
        out.write(reinterpret_cast<const char*>(bytes), 8);
    };
    put_u64(kCheckpointMagic);
    put_u64(model.weights.size());
    for (const auto& w : model.weights) {
        put_u64(static_cast<std::uint64_t>(w.rows()));
        put_u64(static_cast<std::uint64_t>(w.cols()));
    }
    put_u64(model.dropout_seed);
    for (const auto& w : model.weights) {
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            std::uint64_t bits;
            double value = w.data()[i]; // row-major storage
            std::memcpy(&bits, &value, 8);
            put_u64(bits);
        }
    }
}

ModelState load_model(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw DatasetError(DatasetErrorKind::kMissingFile, file.string(), 0,
                           "missing or unreadable checkpoint");
    }
    auto get_u64 = [&in, &file]() {
        unsigned char bytes[8];
        in.read(reinterpret_cast<char*>(bytes), 8);
        if (!in) throw Error("load_model: truncated checkpoint " + file.string());
        std::uint64_t x = 0;
        for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
        return x;
    };
    if (get_u64() != kCheckpointMagic) {
        throw Error("load_model: " + file.string() + " is not a model checkpoint");
    }
    std::uint64_t layer_count = get_u64();
    if (layer_count == 0 || layer_count > 64) {
        throw Error("load_model: implausible layer count in " + file.string());
    }
    std::vector<std::pair<std::int64_t, std::int64_t>> shapes;
    for (std::uint64_t l = 0; l < layer_count; ++l) {
        auto rows = static_cast<std::int64_t>(get_u64());
        auto cols = static_cast<std::int64_t>(get_u64());
        shapes.emplace_back(rows, cols);
        if (l > 0 && shapes[l - 1].second != rows) {
            throw Error("load_model: layer shapes do not chain in " + file.string());
        }
    }
    ModelState model;
    model.dropout_seed = get_u64();
    for (auto [rows, cols] : shapes) {
        Matrix w(rows, cols);
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            std::uint64_t bits = get_u64();
            std::memcpy(w.data() + i, &bits, 8);
        }
        model.weights.push_back(std::move(w));
        model.moment1.emplace_back(Matrix::Zero(rows, cols));
        model.moment2.emplace_back(Matrix::Zero(rows, cols));
    }
    return model;
}

} // namespace buffgraph
