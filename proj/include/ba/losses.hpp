#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ba/point_cloud.hpp"
#include "ba/tensor.hpp"

namespace ba {

// v rotation angles {0, pi/v, ..., (v-1)pi/v} about the up-axis (y).
struct RotationSet {
    std::vector<double> angles;

    static RotationSet uniform(int v);
};

Eigen::Matrix3d rotation_y(double angle);
Points rotate_y(const Points& p, double angle);
// Mirror along the x-axis (negate the x coordinate).
Points mirror_x(const Points& p);

// Symmetric sum of squared nearest-neighbor distances. Ties break to the
// lowest index so the gradient path is deterministic.
double chamfer(const Points& a, const Points& b);
double chamfer(const PointCloud& a, const PointCloud& b);

// Chamfer plus the nearest-neighbor assignment in both directions.
double chamfer_with_matches(const Points& a, const Points& b,
                            std::vector<std::int64_t>& a_to_b,
                            std::vector<std::int64_t>& b_to_a);

// Accumulates d(chamfer)/dA and d(chamfer)/dB for a fixed assignment,
// scaled by upstream gradient go.
void chamfer_backward(const Points& a, const Points& b,
                      const std::vector<std::int64_t>& a_to_b,
                      const std::vector<std::int64_t>& b_to_a, double go,
                      Points& da, Points& db);

// min over rotations of chamfer(mirror_x(rotate(P)), rotate(P)).
double symmetry_loss(const Points& p, const RotationSet& rots);
double symmetry_loss(const PointCloud& p, const RotationSet& rots);

// -log softmax(logits)[label], max-stabilized.
double cross_entropy(const Tensor& logits, int label);

// (ortho, sparsity) over prototypes M of shape m x c x 3.
// ortho: sum over unordered pairs of squared cosine similarity of the
// flattened prototypes (pairs with a zero-norm prototype contribute 0).
// sparsity: mean over prototypes of the sum of per-control-point L2 norms.
std::pair<double, double> prototype_regularizers(const Tensor& m);

}  // namespace ba
