#pragma once

#include <cstdint>
#include <vector>

#include "ba/losses.hpp"
#include "ba/tensor.hpp"

namespace ba {

// Reverse-mode tape over a fixed operator set. Forward values are computed
// eagerly as nodes are added; backward() fills gradients for every node that
// (transitively) depends on a leaf created with requires_grad = true.
//
// The operator set is exactly what the networks here need: dense layers
// broadcasting over leading axes, max-pooling, concatenation/slicing along
// the feature axis, plain matrix products for the deformation algebra, and
// the point-cloud losses as primitive ops with hand-derived adjoints.
class Graph {
  public:
    using Id = std::int32_t;

    enum class Op : std::uint8_t {
        leaf,
        linear,     // x (.., din), W (din, dout), b (dout)
        relu,
        max_pool,   // pooled axis removed; argmax recorded
        concat,     // along last axis
        slice_cols, // [i0, i1) of last axis
        repeat_rows,// 1-D (d) -> (i0, d)
        matmul,     // 2-D a (p,q) * b (q,r)
        add,
        scale,      // * d0
        reshape,
        permute3,   // 3-D axis permutation
        sum,        // -> scalar
        cross_entropy, // logits (k), label i0
        chamfer,       // (n1,3), (n2,3) -> scalar
        symmetry,      // (n,3) -> scalar, rotation set in daux
        ortho_pairs,   // (m,q) -> scalar
        group_l21,     // (m, 3c) -> scalar, group size i0
    };

    Id constant(Tensor value) { return leaf(std::move(value), false); }
    Id leaf(Tensor value, bool requires_grad);

    Id linear(Id x, Id w, Id b);
    Id relu(Id x);
    Id max_pool(Id x, int axis);
    Id concat(const std::vector<Id>& parts);
    Id slice_cols(Id x, std::int64_t from, std::int64_t to);
    Id repeat_rows(Id x, std::int64_t rows);
    Id matmul(Id a, Id b);
    Id add(Id a, Id b);
    Id scale(Id x, double factor);
    Id reshape(Id x, std::vector<std::int64_t> shape);
    Id permute3(Id x, int p0, int p1, int p2);
    Id sum(Id x);
    Id cross_entropy(Id logits, int label);
    Id chamfer(Id a, Id b);
    Id symmetry(Id p, const RotationSet& rots);
    Id ortho_pairs(Id m);
    Id group_l21(Id m, std::int64_t group);

    const Tensor& value(Id id) const { return nodes_[id].value; }
    bool requires_grad(Id id) const { return nodes_[id].rg; }

    // Reverse pass from a scalar root. Gradients of earlier backward() calls
    // are discarded. Throws NumericError if any propagated gradient is
    // non-finite.
    void backward(Id root);

    // Gradient of the last backward() root w.r.t. this node; zeros when no
    // path reached it.
    Tensor grad(Id id) const;

    std::size_t size() const { return nodes_.size(); }

  private:
    struct Node {
        Op op;
        std::vector<Id> in;
        Tensor value;
        Tensor grad;
        bool rg = false;
        bool has_grad = false;
        std::int64_t i0 = 0, i1 = 0;
        double d0 = 0.0;
        std::vector<std::int64_t> iaux;
        std::vector<double> daux;
    };

    Id push(Node n);
    Tensor& grad_buffer(Id id);
    void backward_node(Id id);

    std::vector<Node> nodes_;
};

}  // namespace ba
