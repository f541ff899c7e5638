#include "ba/point_cloud.hpp"

#include "ba/error.hpp"

namespace ba {

PointCloud normalize_cloud(const PointCloud& cloud) {
    if (cloud.points.rows() < 1) throw ArgumentError("normalize: empty cloud");
    if (!cloud.points.allFinite()) throw ArgumentError("normalize: non-finite coordinates");
    PointCloud out = cloud;
    const Eigen::RowVector3d centroid = out.points.colwise().mean();
    out.points.rowwise() -= centroid;
    const double radius = out.points.rowwise().norm().maxCoeff();
    if (radius <= 0.0)
        throw DegenerateInputError("normalize: all points coincide");
    out.points /= radius;
    return out;
}

}  // namespace ba
