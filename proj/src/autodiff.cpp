#include "ba/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "ba/error.hpp"

namespace ba {

namespace {

Points points_of(const Tensor& t) {
    if (t.rank() != 2 || t.dim(1) != 3)
        throw ArgumentError("expected an (n,3) tensor, got " + t.shape_str());
    return Eigen::Map<const Points>(t.data(), t.dim(0), 3);
}

Tensor tensor_of(const Points& p) {
    Tensor t({p.rows(), 3});
    Eigen::Map<Points>(t.data(), p.rows(), 3) = p;
    return t;
}

// outer * axis_len * inner decomposition around a pooled axis.
struct AxisSplit {
    std::int64_t outer = 1, len = 1, inner = 1;
};

AxisSplit split_axis(const std::vector<std::int64_t>& shape, int axis) {
    AxisSplit s;
    for (int i = 0; i < axis; ++i) s.outer *= shape[i];
    s.len = shape[axis];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
    return s;
}

}  // namespace

Graph::Id Graph::push(Node n) {
    for (Id i : n.in) n.rg = n.rg || nodes_[i].rg;
    require_finite(n.value, "forward value");
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size() - 1);
}

Graph::Id Graph::leaf(Tensor value, bool requires_grad) {
    Node n;
    n.op = Op::leaf;
    n.value = std::move(value);
    n.rg = requires_grad;
    require_finite(n.value, "leaf value");
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size() - 1);
}

Graph::Id Graph::linear(Id x, Id w, Id b) {
    const Tensor& xv = nodes_[x].value;
    const Tensor& wv = nodes_[w].value;
    const Tensor& bv = nodes_[b].value;
    if (wv.rank() != 2 || bv.rank() != 1 || bv.dim(0) != wv.dim(1))
        throw ArgumentError("linear: bad parameter shapes W" + wv.shape_str() + " b" +
                            bv.shape_str());
    if (xv.last_dim() != wv.dim(0))
        throw ArgumentError("linear: input width " + std::to_string(xv.last_dim()) +
                            " != " + std::to_string(wv.dim(0)));
    Node n;
    n.op = Op::linear;
    n.in = {x, w, b};
    std::vector<std::int64_t> oshape = xv.shape();
    oshape.back() = wv.dim(1);
    n.value = Tensor(std::move(oshape));
    mat2d(n.value).noalias() = mat2d(xv) * mat2d(wv);
    mat2d(n.value).rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bv.data(), bv.dim(0));
    return push(std::move(n));
}

Graph::Id Graph::relu(Id x) {
    Node n;
    n.op = Op::relu;
    n.in = {x};
    n.value = nodes_[x].value;
    for (std::int64_t i = 0; i < n.value.numel(); ++i)
        if (n.value[i] < 0.0) n.value[i] = 0.0;
    return push(std::move(n));
}

Graph::Id Graph::max_pool(Id x, int axis) {
    const Tensor& xv = nodes_[x].value;
    if (axis < 0 || static_cast<std::size_t>(axis) >= xv.rank())
        throw ArgumentError("max_pool: axis out of range");
    if (xv.dim(axis) == 0) throw ArgumentError("max_pool: empty axis");
    const AxisSplit s = split_axis(xv.shape(), axis);
    Node n;
    n.op = Op::max_pool;
    n.in = {x};
    n.i0 = axis;
    std::vector<std::int64_t> oshape;
    for (std::size_t i = 0; i < xv.rank(); ++i)
        if (static_cast<int>(i) != axis) oshape.push_back(xv.dim(i));
    if (oshape.empty()) oshape.push_back(1);
    n.value = Tensor(std::move(oshape));
    n.iaux.assign(static_cast<std::size_t>(s.outer * s.inner), 0);
    for (std::int64_t o = 0; o < s.outer; ++o) {
        for (std::int64_t in = 0; in < s.inner; ++in) {
            std::int64_t best = 0;
            double bv = xv[(o * s.len) * s.inner + in];
            for (std::int64_t l = 1; l < s.len; ++l) {
                const double v = xv[(o * s.len + l) * s.inner + in];
                if (v > bv) {
                    bv = v;
                    best = l;
                }
            }
            n.value[o * s.inner + in] = bv;
            n.iaux[static_cast<std::size_t>(o * s.inner + in)] = best;
        }
    }
    return push(std::move(n));
}

Graph::Id Graph::concat(const std::vector<Id>& parts) {
    if (parts.empty()) throw ArgumentError("concat: no inputs");
    const std::int64_t rows = nodes_[parts[0]].value.lead_rows();
    std::int64_t width = 0;
    for (Id p : parts) {
        if (nodes_[p].value.lead_rows() != rows)
            throw ArgumentError("concat: leading dimensions disagree");
        width += nodes_[p].value.last_dim();
    }
    Node n;
    n.op = Op::concat;
    n.in = parts;
    n.value = Tensor({rows, width});
    std::int64_t col = 0;
    auto out = mat2d(n.value);
    for (Id p : parts) {
        const Tensor& pv = nodes_[p].value;
        out.middleCols(col, pv.last_dim()) = mat2d(pv);
        col += pv.last_dim();
    }
    return push(std::move(n));
}

Graph::Id Graph::slice_cols(Id x, std::int64_t from, std::int64_t to) {
    const Tensor& xv = nodes_[x].value;
    if (from < 0 || to > xv.last_dim() || from >= to)
        throw ArgumentError("slice_cols: bad range");
    Node n;
    n.op = Op::slice_cols;
    n.in = {x};
    n.i0 = from;
    n.i1 = to;
    n.value = Tensor({xv.lead_rows(), to - from});
    mat2d(n.value) = mat2d(xv).middleCols(from, to - from);
    return push(std::move(n));
}

Graph::Id Graph::repeat_rows(Id x, std::int64_t rows) {
    const Tensor& xv = nodes_[x].value;
    if (xv.rank() != 1) throw ArgumentError("repeat_rows: expected a 1-D input");
    Node n;
    n.op = Op::repeat_rows;
    n.in = {x};
    n.i0 = rows;
    n.value = Tensor({rows, xv.dim(0)});
    mat2d(n.value).rowwise() = Eigen::Map<const Eigen::RowVectorXd>(xv.data(), xv.dim(0));
    return push(std::move(n));
}

Graph::Id Graph::matmul(Id a, Id b) {
    const Tensor& av = nodes_[a].value;
    const Tensor& bv = nodes_[b].value;
    if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(0))
        throw ArgumentError("matmul: shape mismatch " + av.shape_str() + " * " + bv.shape_str());
    Node n;
    n.op = Op::matmul;
    n.in = {a, b};
    n.value = Tensor({av.dim(0), bv.dim(1)});
    mat2d(n.value).noalias() = mat2d(av) * mat2d(bv);
    return push(std::move(n));
}

Graph::Id Graph::add(Id a, Id b) {
    const Tensor& av = nodes_[a].value;
    if (!av.same_shape(nodes_[b].value))
        throw ArgumentError("add: shape mismatch " + av.shape_str() + " + " +
                            nodes_[b].value.shape_str());
    Node n;
    n.op = Op::add;
    n.in = {a, b};
    n.value = av;
    for (std::int64_t i = 0; i < n.value.numel(); ++i) n.value[i] += nodes_[b].value[i];
    return push(std::move(n));
}

Graph::Id Graph::scale(Id x, double factor) {
    Node n;
    n.op = Op::scale;
    n.in = {x};
    n.d0 = factor;
    n.value = nodes_[x].value;
    for (std::int64_t i = 0; i < n.value.numel(); ++i) n.value[i] *= factor;
    return push(std::move(n));
}

Graph::Id Graph::reshape(Id x, std::vector<std::int64_t> shape) {
    Node n;
    n.op = Op::reshape;
    n.in = {x};
    std::int64_t c = 1;
    for (std::int64_t d : shape) c *= d;
    if (c != nodes_[x].value.numel()) throw ArgumentError("reshape: element count mismatch");
    n.value = Tensor(std::move(shape),
                     std::vector<double>(nodes_[x].value.data(),
                                         nodes_[x].value.data() + nodes_[x].value.numel()));
    return push(std::move(n));
}

Graph::Id Graph::permute3(Id x, int p0, int p1, int p2) {
    const Tensor& xv = nodes_[x].value;
    if (xv.rank() != 3) throw ArgumentError("permute3: expected a 3-D input");
    int perm[3] = {p0, p1, p2};
    bool seen[3] = {false, false, false};
    for (int p : perm) {
        if (p < 0 || p > 2 || seen[p]) throw ArgumentError("permute3: bad permutation");
        seen[p] = true;
    }
    Node n;
    n.op = Op::permute3;
    n.in = {x};
    n.iaux = {p0, p1, p2};
    const std::int64_t d[3] = {xv.dim(0), xv.dim(1), xv.dim(2)};
    n.value = Tensor({d[perm[0]], d[perm[1]], d[perm[2]]});
    const std::int64_t od[3] = {d[perm[0]], d[perm[1]], d[perm[2]]};
    std::int64_t src[3];
    for (std::int64_t a = 0; a < od[0]; ++a)
        for (std::int64_t b = 0; b < od[1]; ++b)
            for (std::int64_t c = 0; c < od[2]; ++c) {
                src[perm[0]] = a;
                src[perm[1]] = b;
                src[perm[2]] = c;
                n.value[(a * od[1] + b) * od[2] + c] =
                    xv[(src[0] * d[1] + src[1]) * d[2] + src[2]];
            }
    return push(std::move(n));
}

Graph::Id Graph::sum(Id x) {
    Node n;
    n.op = Op::sum;
    n.in = {x};
    double s = 0.0;
    for (std::int64_t i = 0; i < nodes_[x].value.numel(); ++i) s += nodes_[x].value[i];
    n.value = Tensor::scalar(s);
    return push(std::move(n));
}

Graph::Id Graph::cross_entropy(Id logits, int label) {
    const Tensor& lv = nodes_[logits].value;
    if (lv.rank() != 1) throw ArgumentError("cross_entropy: logits must be 1-D");
    if (label < 0 || label >= lv.dim(0)) throw ArgumentError("cross_entropy: label out of range");
    Node n;
    n.op = Op::cross_entropy;
    n.in = {logits};
    n.i0 = label;
    n.value = Tensor::scalar(ba::cross_entropy(lv, label));
    return push(std::move(n));
}

Graph::Id Graph::chamfer(Id a, Id b) {
    Node n;
    n.op = Op::chamfer;
    n.in = {a, b};
    const Points pa = points_of(nodes_[a].value);
    const Points pb = points_of(nodes_[b].value);
    std::vector<std::int64_t> ab, ba_;
    const double loss = chamfer_with_matches(pa, pb, ab, ba_);
    n.value = Tensor::scalar(loss);
    n.iaux = std::move(ab);
    n.iaux.insert(n.iaux.end(), ba_.begin(), ba_.end());
    return push(std::move(n));
}

Graph::Id Graph::symmetry(Id p, const RotationSet& rots) {
    if (rots.angles.empty()) throw ArgumentError("symmetry: empty rotation set");
    Node n;
    n.op = Op::symmetry;
    n.in = {p};
    n.daux = rots.angles;
    const Points pts = points_of(nodes_[p].value);
    double best = 0.0;
    std::size_t best_frame = 0;
    std::vector<std::int64_t> best_ab, best_ba;
    for (std::size_t f = 0; f < rots.angles.size(); ++f) {
        const Points q = rotate_y(pts, rots.angles[f]);
        const Points qm = mirror_x(q);
        std::vector<std::int64_t> ab, ba_;
        const double loss = chamfer_with_matches(qm, q, ab, ba_);
        if (f == 0 || loss < best) {
            best = loss;
            best_frame = f;
            best_ab = std::move(ab);
            best_ba = std::move(ba_);
        }
    }
    n.value = Tensor::scalar(best);
    n.i0 = static_cast<std::int64_t>(best_frame);
    n.iaux = std::move(best_ab);
    n.iaux.insert(n.iaux.end(), best_ba.begin(), best_ba.end());
    return push(std::move(n));
}

Graph::Id Graph::ortho_pairs(Id m) {
    const Tensor& mv = nodes_[m].value;
    if (mv.rank() != 2) throw ArgumentError("ortho_pairs: expected a 2-D input");
    Node n;
    n.op = Op::ortho_pairs;
    n.in = {m};
    const auto mm = mat2d(mv);
    double loss = 0.0;
    for (std::int64_t i = 0; i < mm.rows(); ++i) {
        const double ni = mm.row(i).norm();
        if (ni == 0.0) continue;
        for (std::int64_t j = i + 1; j < mm.rows(); ++j) {
            const double nj = mm.row(j).norm();
            if (nj == 0.0) continue;
            const double c = mm.row(i).dot(mm.row(j)) / (ni * nj);
            loss += c * c;
        }
    }
    n.value = Tensor::scalar(loss);
    return push(std::move(n));
}

Graph::Id Graph::group_l21(Id m, std::int64_t group) {
    const Tensor& mv = nodes_[m].value;
    if (mv.rank() != 2 || group <= 0 || mv.dim(1) % group != 0)
        throw ArgumentError("group_l21: columns must split into equal groups");
    Node n;
    n.op = Op::group_l21;
    n.in = {m};
    n.i0 = group;
    const auto mm = mat2d(mv);
    double loss = 0.0;
    for (std::int64_t i = 0; i < mm.rows(); ++i)
        for (std::int64_t g = 0; g < mm.cols() / group; ++g)
            loss += mm.row(i).segment(g * group, group).norm();
    n.value = Tensor::scalar(mm.rows() > 0 ? loss / static_cast<double>(mm.rows()) : 0.0);
    return push(std::move(n));
}

Tensor& Graph::grad_buffer(Id id) {
    Node& n = nodes_[id];
    if (!n.has_grad) {
        n.grad = Tensor(n.value.shape());
        n.has_grad = true;
    }
    return n.grad;
}

Tensor Graph::grad(Id id) const {
    const Node& n = nodes_[id];
    if (n.has_grad) return n.grad;
    return Tensor(n.value.shape());
}

void Graph::backward(Id root) {
    if (nodes_[root].value.numel() != 1)
        throw ArgumentError("backward: root must be a scalar");
    for (Node& n : nodes_) n.has_grad = false;
    if (!nodes_[root].rg) return;
    grad_buffer(root)[0] = 1.0;
    for (Id id = root; id >= 0; --id) {
        const Node& n = nodes_[id];
        if (!n.rg || !n.has_grad || n.op == Op::leaf) continue;
        backward_node(id);
    }
    for (const Node& n : nodes_) {
        if (n.op == Op::leaf && n.has_grad && !n.grad.all_finite())
            throw NumericError("non-finite gradient in backward pass");
    }
}

void Graph::backward_node(Id id) {
    Node& n = nodes_[id];
    const Tensor& go = n.grad;
    auto rg = [&](std::size_t k) { return nodes_[n.in[k]].rg; };

    switch (n.op) {
        case Op::leaf:
            break;
        case Op::linear: {
            const Tensor& xv = nodes_[n.in[0]].value;
            const Tensor& wv = nodes_[n.in[1]].value;
            auto gom = mat2d(go);
            if (rg(0)) mat2d(grad_buffer(n.in[0])).noalias() += gom * mat2d(wv).transpose();
            if (rg(1)) mat2d(grad_buffer(n.in[1])).noalias() += mat2d(xv).transpose() * gom;
            if (rg(2)) {
                Tensor& gb = grad_buffer(n.in[2]);
                Eigen::Map<Eigen::RowVectorXd>(gb.data(), gb.dim(0)) += gom.colwise().sum();
            }
            break;
        }
        case Op::relu: {
            if (!rg(0)) break;
            Tensor& gx = grad_buffer(n.in[0]);
            const Tensor& xv = nodes_[n.in[0]].value;
            for (std::int64_t i = 0; i < go.numel(); ++i)
                if (xv[i] > 0.0) gx[i] += go[i];
            break;
        }
        case Op::max_pool: {
            if (!rg(0)) break;
            Tensor& gx = grad_buffer(n.in[0]);
            const AxisSplit s = split_axis(nodes_[n.in[0]].value.shape(), static_cast<int>(n.i0));
            for (std::int64_t o = 0; o < s.outer; ++o)
                for (std::int64_t in = 0; in < s.inner; ++in) {
                    const std::int64_t l = n.iaux[static_cast<std::size_t>(o * s.inner + in)];
                    gx[(o * s.len + l) * s.inner + in] += go[o * s.inner + in];
                }
            break;
        }
        case Op::concat: {
            std::int64_t col = 0;
            auto gom = mat2d(go);
            for (std::size_t k = 0; k < n.in.size(); ++k) {
                const std::int64_t w = nodes_[n.in[k]].value.last_dim();
                if (rg(k)) mat2d(grad_buffer(n.in[k])) += gom.middleCols(col, w);
                col += w;
            }
            break;
        }
        case Op::slice_cols: {
            if (!rg(0)) break;
            mat2d(grad_buffer(n.in[0])).middleCols(n.i0, n.i1 - n.i0) += mat2d(go);
            break;
        }
        case Op::repeat_rows: {
            if (!rg(0)) break;
            Tensor& gx = grad_buffer(n.in[0]);
            Eigen::Map<Eigen::RowVectorXd>(gx.data(), gx.dim(0)) += mat2d(go).colwise().sum();
            break;
        }
        case Op::matmul: {
            const Tensor& av = nodes_[n.in[0]].value;
            const Tensor& bv = nodes_[n.in[1]].value;
            auto gom = mat2d(go);
            if (rg(0)) mat2d(grad_buffer(n.in[0])).noalias() += gom * mat2d(bv).transpose();
            if (rg(1)) mat2d(grad_buffer(n.in[1])).noalias() += mat2d(av).transpose() * gom;
            break;
        }
        case Op::add: {
            for (std::size_t k = 0; k < 2; ++k) {
                if (!rg(k)) continue;
                Tensor& g = grad_buffer(n.in[k]);
                for (std::int64_t i = 0; i < go.numel(); ++i) g[i] += go[i];
            }
            break;
        }
        case Op::scale: {
            if (!rg(0)) break;
            Tensor& gx = grad_buffer(n.in[0]);
            for (std::int64_t i = 0; i < go.numel(); ++i) gx[i] += n.d0 * go[i];
            break;
        }
        case Op::reshape: {
            if (!rg(0)) break;
            Tensor& gx = grad_buffer(n.in[0]);
            for (std::int64_t i = 0; i < go.numel(); ++i) gx[i] += go[i];
            break;
        }
        case Op::permute3: {
            if (!rg(0)) break;
            Tensor& gx = grad_buffer(n.in[0]);
            const std::int64_t* perm = n.iaux.data();
            const auto& xs = nodes_[n.in[0]].value.shape();
            const std::int64_t d[3] = {xs[0], xs[1], xs[2]};
            const std::int64_t od[3] = {d[perm[0]], d[perm[1]], d[perm[2]]};
            std::int64_t src[3];
            for (std::int64_t a = 0; a < od[0]; ++a)
                for (std::int64_t b = 0; b < od[1]; ++b)
                    for (std::int64_t c = 0; c < od[2]; ++c) {
                        src[perm[0]] = a;
                        src[perm[1]] = b;
                        src[perm[2]] = c;
                        gx[(src[0] * d[1] + src[1]) * d[2] + src[2]] +=
                            go[(a * od[1] + b) * od[2] + c];
                    }
            break;
        }
        case Op::sum: {
            if (!rg(0)) break;
            Tensor& gx = grad_buffer(n.in[0]);
            for (std::int64_t i = 0; i < gx.numel(); ++i) gx[i] += go[0];
            break;
        }
        case Op::cross_entropy: {
            if (!rg(0)) break;
            const Tensor& lv = nodes_[n.in[0]].value;
            const std::int64_t k = lv.dim(0);
            double mx = lv[0];
            for (std::int64_t i = 1; i < k; ++i) mx = std::max(mx, lv[i]);
            double z = 0.0;
            for (std::int64_t i = 0; i < k; ++i) z += std::exp(lv[i] - mx);
            Tensor& gx = grad_buffer(n.in[0]);
            for (std::int64_t i = 0; i < k; ++i) {
                const double p = std::exp(lv[i] - mx) / z;
                gx[i] += go[0] * (p - (i == n.i0 ? 1.0 : 0.0));
            }
            break;
        }
        case Op::chamfer: {
            const Points pa = points_of(nodes_[n.in[0]].value);
            const Points pb = points_of(nodes_[n.in[1]].value);
            const std::size_t na = static_cast<std::size_t>(pa.rows());
            std::vector<std::int64_t> ab(n.iaux.begin(), n.iaux.begin() + na);
            std::vector<std::int64_t> ba_(n.iaux.begin() + na, n.iaux.end());
            Points da = Points::Zero(pa.rows(), 3), db = Points::Zero(pb.rows(), 3);
            chamfer_backward(pa, pb, ab, ba_, go[0], da, db);
            if (rg(0))
                Eigen::Map<Points>(grad_buffer(n.in[0]).data(), pa.rows(), 3) += da;
            if (rg(1))
                Eigen::Map<Points>(grad_buffer(n.in[1]).data(), pb.rows(), 3) += db;
            break;
        }
        case Op::symmetry: {
            if (!rg(0)) break;
            const Points pts = points_of(nodes_[n.in[0]].value);
            const double angle = n.daux[static_cast<std::size_t>(n.i0)];
            const Points q = rotate_y(pts, angle);
            const Points qm = mirror_x(q);
            const std::size_t nq = static_cast<std::size_t>(q.rows());
            std::vector<std::int64_t> ab(n.iaux.begin(), n.iaux.begin() + nq);
            std::vector<std::int64_t> ba_(n.iaux.begin() + nq, n.iaux.end());
            Points dqm = Points::Zero(q.rows(), 3), dq = Points::Zero(q.rows(), 3);
            chamfer_backward(qm, q, ab, ba_, go[0], dqm, dq);
            dqm.col(0) = -dqm.col(0);  // mirror adjoint
            dq += dqm;
            const Eigen::Matrix3d r = rotation_y(angle);
            Eigen::Map<Points>(grad_buffer(n.in[0]).data(), pts.rows(), 3) += dq * r;
            break;
        }
        case Op::ortho_pairs: {
            if (!rg(0)) break;
            const auto mm = mat2d(nodes_[n.in[0]].value);
            auto gm = mat2d(grad_buffer(n.in[0]));
            for (std::int64_t i = 0; i < mm.rows(); ++i) {
                const double ni = mm.row(i).norm();
                if (ni == 0.0) continue;
                for (std::int64_t j = i + 1; j < mm.rows(); ++j) {
                    const double nj = mm.row(j).norm();
                    if (nj == 0.0) continue;
                    const double c = mm.row(i).dot(mm.row(j)) / (ni * nj);
                    const double f = 2.0 * c * go[0];
                    gm.row(i) += f * (mm.row(j) / (ni * nj) - c * mm.row(i) / (ni * ni));
                    gm.row(j) += f * (mm.row(i) / (ni * nj) - c * mm.row(j) / (nj * nj));
                }
            }
            break;
        }
        case Op::group_l21: {
            if (!rg(0)) break;
            const auto mm = mat2d(nodes_[n.in[0]].value);
            auto gm = mat2d(grad_buffer(n.in[0]));
            const std::int64_t group = n.i0;
            const double w = go[0] / static_cast<double>(mm.rows());
            for (std::int64_t i = 0; i < mm.rows(); ++i)
                for (std::int64_t g = 0; g < mm.cols() / group; ++g) {
                    const double norm = mm.row(i).segment(g * group, group).norm();
                    if (norm > 0.0)
                        gm.row(i).segment(g * group, group) +=
                            (w / norm) * mm.row(i).segment(g * group, group);
                }
            break;
        }
    }
}

}  // namespace ba
