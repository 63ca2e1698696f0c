#include "buffgraph/synth.hpp"

#include "buffgraph/rng.hpp"

#include <cmath>
#include <numeric>

namespace buffgraph {

namespace {

constexpr std::uint64_t kEdgeStreamTag = 0x45444745ull; // per block pair
constexpr std::uint64_t kFeatStreamTag = 0x46454154ull; // per node

// Visit each index of [0, count) independently with probability p, via
// geometric gap sampling: only sampled indices cost a draw.
template <typename Fn>
void sample_bernoulli_indices(std::int64_t count, double p, Rng& rng, Fn&& fn) {
    if (count <= 0 || p <= 0.0) return;
    if (p >= 1.0) {
        for (std::int64_t t = 0; t < count; ++t) fn(t);
        return;
    }
    const double log1mp = std::log1p(-p);
    std::int64_t t = -1;
    while (true) {
        double u = rng.uniform();
        t += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-u) / log1mp));
        if (t >= count || t < 0) break;
        fn(t);
    }
}

// Inverse of t = i*(i-1)/2 + j (j < i) over the strict lower triangle.
std::pair<std::int64_t, std::int64_t> triangle_unrank(std::int64_t t) {
    auto i = static_cast<std::int64_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(t))) / 2.0);
    while (i * (i - 1) / 2 > t) --i;
    while ((i + 1) * i / 2 <= t) ++i;
    return {i, t - i * (i - 1) / 2};
}

} // namespace

void validate(const SynthConfig& config) {
    if (config.class_sizes.empty()) {
        throw InvalidArgument("synth: class_sizes must be non-empty");
    }
    for (std::int32_t s : config.class_sizes) {
        if (s < 1) throw InvalidArgument("synth: every class size must be >= 1");
    }
    if (config.p_in < 0.0 || config.p_in > 1.0 || config.p_out < 0.0 || config.p_out > 1.0) {
        throw InvalidArgument("synth: edge probabilities must be in [0, 1]");
    }
    if (config.feature_dim < 1) {
        throw InvalidArgument("synth: feature_dim must be >= 1");
    }
    if (config.feature_noise < 0.0) {
        throw InvalidArgument("synth: feature_noise must be >= 0");
    }
}

Graph generate(const SynthConfig& config) {
    validate(config);
    const auto num_classes = static_cast<std::int32_t>(config.class_sizes.size());
    const std::int64_t total =
        std::accumulate(config.class_sizes.begin(), config.class_sizes.end(), std::int64_t{0});
    const auto num_nodes = static_cast<std::int32_t>(total);

    std::vector<std::int32_t> block_start(static_cast<std::size_t>(num_classes) + 1, 0);
    for (std::int32_t c = 0; c < num_classes; ++c) {
        block_start[static_cast<std::size_t>(c) + 1] =
            block_start[static_cast<std::size_t>(c)] + config.class_sizes[static_cast<std::size_t>(c)];
    }

    std::vector<std::int32_t> labels(static_cast<std::size_t>(num_nodes));
    for (std::int32_t c = 0; c < num_classes; ++c) {
        for (std::int32_t v = block_start[c]; v < block_start[c + 1]; ++v) {
            labels[static_cast<std::size_t>(v)] = c;
        }
    }

    std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
    for (std::int32_t a = 0; a < num_classes; ++a) {
        for (std::int32_t b = a; b < num_classes; ++b) {
            const std::int64_t sa = config.class_sizes[static_cast<std::size_t>(a)];
            const std::int64_t sb = config.class_sizes[static_cast<std::size_t>(b)];
            const double p = (a == b) ? config.p_in : config.p_out;
            Rng rng = Rng::stream(config.seed, kEdgeStreamTag,
                                  static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(b));
            if (a == b) {
                sample_bernoulli_indices(sa * (sa - 1) / 2, p, rng, [&](std::int64_t t) {
                    auto [i, j] = triangle_unrank(t);
                    pairs.emplace_back(block_start[a] + static_cast<std::int32_t>(j),
                                       block_start[a] + static_cast<std::int32_t>(i));
                });
            } else {
                sample_bernoulli_indices(sa * sb, p, rng, [&](std::int64_t t) {
                    pairs.emplace_back(block_start[a] + static_cast<std::int32_t>(t / sb),
                                       block_start[b] + static_cast<std::int32_t>(t % sb));
                });
            }
        }
    }

    Matrix features(num_nodes, config.feature_dim);
    for (std::int32_t v = 0; v < num_nodes; ++v) {
        Rng rng = Rng::stream(config.seed, kFeatStreamTag, static_cast<std::uint64_t>(v));
        const std::int32_t mean_dim = labels[static_cast<std::size_t>(v)] % config.feature_dim;
        for (std::int32_t j = 0; j < config.feature_dim; ++j) {
            double mean = (j == mean_dim) ? config.class_mean_scale : 0.0;
            features(v, j) = mean + config.feature_noise * rng.gaussian();
        }
    }

    return build_graph(num_nodes, pairs, std::move(features), std::move(labels), num_classes);
}

} // namespace buffgraph
