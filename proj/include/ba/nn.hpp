#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ba/autodiff.hpp"
#include "ba/rng.hpp"
#include "ba/tensor.hpp"

namespace ba {

enum class Activation : std::uint8_t { relu = 0, identity = 1 };

struct DenseLayer {
    Tensor weight;  // (d_in, d_out)
    Tensor bias;    // (d_out)
    Activation act = Activation::identity;
};

// A stack of dense layers applied along the last axis, sharing weights over
// all leading axes (per-point shared MLP when the rows are points).
struct MlpParams {
    std::vector<DenseLayer> layers;

    std::int64_t input_width() const { return layers.front().weight.dim(0); }
    std::int64_t output_width() const { return layers.back().weight.dim(1); }
};

// He-style initialization; final layer uses the activation passed for it.
MlpParams init_mlp(const std::vector<std::int64_t>& widths,
                   const std::vector<Activation>& acts, Rng& rng);

// Forward pass without gradient tracking.
Tensor mlp_apply(const MlpParams& params, const Tensor& x);

// Max over one axis (axis removed from the shape) plus argmax indices,
// ties to the lowest index.
std::pair<Tensor, std::vector<std::int64_t>> max_pool(const Tensor& x, int axis);

// Tape registration: per-layer (weight, bias) leaf ids.
struct MlpNodes {
    std::vector<std::pair<Graph::Id, Graph::Id>> layers;
};

MlpNodes register_mlp(Graph& g, const MlpParams& params, bool requires_grad);
Graph::Id mlp_forward(Graph& g, const MlpParams& params, const MlpNodes& nodes, Graph::Id x);

// Flat, ordered view over every tensor in a parameter pack; gradient and
// optimizer state follow this order.
using TensorRefs = std::vector<Tensor*>;
using ConstTensorRefs = std::vector<const Tensor*>;

void collect(MlpParams& p, TensorRefs& out);
void collect(const MlpParams& p, ConstTensorRefs& out);

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t step = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;

    static AdamState init(const ConstTensorRefs& params, double lr);
};

// One Adam step; grads must be ordered like params.
void adam_update(const TensorRefs& params, const std::vector<Tensor>& grads, AdamState& state);

// Accumulates per-leaf gradients from a finished backward pass.
void accumulate_grads(const Graph& g, const MlpNodes& nodes, std::vector<Tensor>& grads,
                      std::size_t offset);

std::vector<Tensor> zero_grads_like(const ConstTensorRefs& params);

// FNV-1a over raw parameter bytes; used to assert freeze contracts.
std::uint64_t checksum(const ConstTensorRefs& params);

}  // namespace ba
