#include "ba/losses.hpp"

#include <cmath>
#include <limits>

#include "ba/error.hpp"

namespace ba {

RotationSet RotationSet::uniform(int v) {
    if (v < 1) throw ArgumentError("rotation set: v must be >= 1");
    RotationSet r;
    r.angles.reserve(static_cast<std::size_t>(v));
    for (int i = 0; i < v; ++i)
        r.angles.push_back(3.14159265358979323846 * static_cast<double>(i) / v);
    return r;
}

Eigen::Matrix3d rotation_y(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Eigen::Matrix3d r;
    r << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
    return r;
}

Points rotate_y(const Points& p, double angle) {
    return p * rotation_y(angle).transpose();
}

Points mirror_x(const Points& p) {
    Points q = p;
    q.col(0) = -q.col(0);
    return q;
}

namespace {

// For each row of a, the squared distance to its nearest row of b and that
// row's index; ties resolve to the lowest index.
double directed_matches(const Points& a, const Points& b, std::vector<std::int64_t>& match) {
    match.assign(static_cast<std::size_t>(a.rows()), 0);
    double total = 0.0;
    for (std::int64_t i = 0; i < a.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::int64_t best_j = 0;
        for (std::int64_t j = 0; j < b.rows(); ++j) {
            const double d = (a.row(i) - b.row(j)).squaredNorm();
            if (d < best) {
                best = d;
                best_j = j;
            }
        }
        match[static_cast<std::size_t>(i)] = best_j;
        total += best;
    }
    return total;
}

}  // namespace

double chamfer_with_matches(const Points& a, const Points& b,
                            std::vector<std::int64_t>& a_to_b,
                            std::vector<std::int64_t>& b_to_a) {
    if (a.rows() == 0 || b.rows() == 0) throw ArgumentError("chamfer: empty cloud");
    return directed_matches(a, b, a_to_b) + directed_matches(b, a, b_to_a);
}

double chamfer(const Points& a, const Points& b) {
    std::vector<std::int64_t> ab, ba;
    return chamfer_with_matches(a, b, ab, ba);
}

double chamfer(const PointCloud& a, const PointCloud& b) { return chamfer(a.points, b.points); }

void chamfer_backward(const Points& a, const Points& b,
                      const std::vector<std::int64_t>& a_to_b,
                      const std::vector<std::int64_t>& b_to_a, double go,
                      Points& da, Points& db) {
    for (std::int64_t i = 0; i < a.rows(); ++i) {
        const std::int64_t j = a_to_b[static_cast<std::size_t>(i)];
        const Eigen::RowVector3d d = 2.0 * go * (a.row(i) - b.row(j));
        da.row(i) += d;
        db.row(j) -= d;
    }
    for (std::int64_t j = 0; j < b.rows(); ++j) {
        const std::int64_t i = b_to_a[static_cast<std::size_t>(j)];
        const Eigen::RowVector3d d = 2.0 * go * (b.row(j) - a.row(i));
        db.row(j) += d;
        da.row(i) -= d;
    }
}

double symmetry_loss(const Points& p, const RotationSet& rots) {
    if (rots.angles.empty()) throw ArgumentError("symmetry loss: empty rotation set");
    double best = std::numeric_limits<double>::infinity();
    for (double angle : rots.angles) {
        const Points q = rotate_y(p, angle);
        best = std::min(best, chamfer(mirror_x(q), q));
    }
    return best;
}

double symmetry_loss(const PointCloud& p, const RotationSet& rots) {
    return symmetry_loss(p.points, rots);
}

double cross_entropy(const Tensor& logits, int label) {
    if (logits.rank() != 1 || logits.dim(0) == 0)
        throw ArgumentError("cross_entropy: logits must be a non-empty vector");
    if (label < 0 || label >= logits.dim(0))
        throw ArgumentError("cross_entropy: label out of range");
    require_finite(logits, "logits");
    double mx = logits[0];
    for (std::int64_t i = 1; i < logits.dim(0); ++i) mx = std::max(mx, logits[i]);
    double z = 0.0;
    for (std::int64_t i = 0; i < logits.dim(0); ++i) z += std::exp(logits[i] - mx);
    return mx + std::log(z) - logits[label];
}

std::pair<double, double> prototype_regularizers(const Tensor& m) {
    if (m.rank() != 3 || m.dim(2) != 3)
        throw ArgumentError("prototype_regularizers: expected (m,c,3), got " + m.shape_str());
    const std::int64_t count = m.dim(0), c = m.dim(1);
    ConstRowMatMap rows(m.data(), count, c * 3);
    double ortho = 0.0;
    for (std::int64_t i = 0; i < count; ++i) {
        const double ni = rows.row(i).norm();
        if (ni == 0.0) continue;
        for (std::int64_t j = i + 1; j < count; ++j) {
            const double nj = rows.row(j).norm();
            if (nj == 0.0) continue;
            const double cs = rows.row(i).dot(rows.row(j)) / (ni * nj);
            ortho += cs * cs;
        }
    }
    double sparsity = 0.0;
    for (std::int64_t i = 0; i < count; ++i)
        for (std::int64_t j = 0; j < c; ++j)
            sparsity += rows.row(i).segment(j * 3, 3).norm();
    if (count > 0) sparsity /= static_cast<double>(count);
    return {ortho, sparsity};
}

}  // namespace ba
