#pragma once

#include "buffgraph/graph.hpp"

#include <cstdint>
#include <vector>

namespace buffgraph {

/// Planted-partition generator config. Nodes are laid out block by block
/// (class 0 first), each unordered pair drawn independently with p_in
/// inside a block and p_out across blocks. Features are Gaussian around a
/// class mean of class_mean_scale * e_{c mod feature_dim}.
///
/// p_out is the heterophily knob: with p_in = p_out the expected class
/// heterophily of a node approaches the share of other-class nodes
/// (≈ (C-1)/C for equal blocks); p_out = 0 gives fully homophilous blocks.
struct SynthConfig {
    std::vector<std::int32_t> class_sizes;
    double p_in = 0.05;
    double p_out = 0.05;
    std::int32_t feature_dim = 16;
    double class_mean_scale = 1.0;
    double feature_noise = 1.0;
    std::uint64_t seed = 0;
};

/// Throws InvalidArgument on out-of-range probabilities, empty/non-positive
/// class sizes, non-positive feature_dim, or negative feature_noise.
void validate(const SynthConfig& config);

Graph generate(const SynthConfig& config);

} // namespace buffgraph
