#include "ba/nn.hpp"

#include <cmath>
#include <cstring>

#include "ba/error.hpp"

namespace ba {

MlpParams init_mlp(const std::vector<std::int64_t>& widths,
                   const std::vector<Activation>& acts, Rng& rng) {
    if (widths.size() < 2 || acts.size() != widths.size() - 1)
        throw ArgumentError("init_mlp: need n widths and n-1 activations");
    MlpParams p;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        DenseLayer layer;
        layer.act = acts[l];
        layer.weight = Tensor({widths[l], widths[l + 1]});
        layer.bias = Tensor({widths[l + 1]});
        const double scale =
            std::sqrt((acts[l] == Activation::relu ? 2.0 : 1.0) / static_cast<double>(widths[l]));
        for (std::int64_t i = 0; i < layer.weight.numel(); ++i)
            layer.weight[i] = scale * rng.normal();
        p.layers.push_back(std::move(layer));
    }
    return p;
}

Tensor mlp_apply(const MlpParams& params, const Tensor& x) {
    Graph g;
    MlpNodes nodes = register_mlp(g, params, false);
    const Graph::Id out = mlp_forward(g, params, nodes, g.constant(x));
    return g.value(out);
}

std::pair<Tensor, std::vector<std::int64_t>> max_pool(const Tensor& x, int axis) {
    if (axis < 0 || static_cast<std::size_t>(axis) >= x.rank())
        throw ArgumentError("max_pool: axis out of range");
    if (x.dim(axis) == 0) throw ArgumentError("max_pool: empty axis");
    std::int64_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= x.dim(i);
    for (std::size_t i = static_cast<std::size_t>(axis) + 1; i < x.rank(); ++i) inner *= x.dim(i);
    const std::int64_t len = x.dim(axis);
    std::vector<std::int64_t> oshape;
    for (std::size_t i = 0; i < x.rank(); ++i)
        if (static_cast<int>(i) != axis) oshape.push_back(x.dim(i));
    if (oshape.empty()) oshape.push_back(1);
    Tensor values(std::move(oshape));
    std::vector<std::int64_t> argmax(static_cast<std::size_t>(outer * inner), 0);
    for (std::int64_t o = 0; o < outer; ++o)
        for (std::int64_t in = 0; in < inner; ++in) {
            std::int64_t best = 0;
            double bv = x[(o * len) * inner + in];
            for (std::int64_t l = 1; l < len; ++l)
                if (x[(o * len + l) * inner + in] > bv) {
                    bv = x[(o * len + l) * inner + in];
                    best = l;
                }
            values[o * inner + in] = bv;
            argmax[static_cast<std::size_t>(o * inner + in)] = best;
        }
    return {std::move(values), std::move(argmax)};
}

MlpNodes register_mlp(Graph& g, const MlpParams& params, bool requires_grad) {
    MlpNodes nodes;
    for (const DenseLayer& layer : params.layers)
        nodes.layers.emplace_back(g.leaf(layer.weight, requires_grad),
                                  g.leaf(layer.bias, requires_grad));
    return nodes;
}

Graph::Id mlp_forward(Graph& g, const MlpParams& params, const MlpNodes& nodes, Graph::Id x) {
    Graph::Id h = x;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        h = g.linear(h, nodes.layers[l].first, nodes.layers[l].second);
        if (params.layers[l].act == Activation::relu) h = g.relu(h);
    }
    return h;
}

void collect(MlpParams& p, TensorRefs& out) {
    for (DenseLayer& l : p.layers) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
}

void collect(const MlpParams& p, ConstTensorRefs& out) {
    for (const DenseLayer& l : p.layers) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
}

AdamState AdamState::init(const ConstTensorRefs& params, double lr) {
    AdamState s;
    s.lr = lr;
    for (const Tensor* t : params) {
        s.m.emplace_back(t->shape());
        s.v.emplace_back(t->shape());
    }
    return s;
}

void adam_update(const TensorRefs& params, const std::vector<Tensor>& grads, AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw ArgumentError("adam_update: parameter/gradient/state count mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k];
        const Tensor& g = grads[k];
        if (!p.same_shape(g)) throw ArgumentError("adam_update: gradient shape mismatch");
        Tensor& m = state.m[k];
        Tensor& v = state.v[k];
        for (std::int64_t i = 0; i < p.numel(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

void accumulate_grads(const Graph& g, const MlpNodes& nodes, std::vector<Tensor>& grads,
                      std::size_t offset) {
    for (std::size_t l = 0; l < nodes.layers.size(); ++l) {
        const Tensor gw = g.grad(nodes.layers[l].first);
        const Tensor gb = g.grad(nodes.layers[l].second);
        Tensor& aw = grads[offset + 2 * l];
        Tensor& ab = grads[offset + 2 * l + 1];
        for (std::int64_t i = 0; i < gw.numel(); ++i) aw[i] += gw[i];
        for (std::int64_t i = 0; i < gb.numel(); ++i) ab[i] += gb[i];
    }
}

std::vector<Tensor> zero_grads_like(const ConstTensorRefs& params) {
    std::vector<Tensor> grads;
    grads.reserve(params.size());
    for (const Tensor* t : params) grads.emplace_back(t->shape());
    return grads;
}

std::uint64_t checksum(const ConstTensorRefs& params) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, std::size_t n) {
        const unsigned char* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    for (const Tensor* t : params)
        mix(t->data(), static_cast<std::size_t>(t->numel()) * sizeof(double));
    return h;
}

}  // namespace ba
