#pragma once

#include <string>

#include <Eigen/Core>

namespace ba {

// n x 3 coordinates, one point per row.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

struct PointCloud {
    Points points;
    int label = -1;
    std::string id;

    std::int64_t size() const { return points.rows(); }
};

// Center at the centroid and scale so the farthest point has unit norm.
// Label and id are preserved. Throws DegenerateInputError when all points
// coincide and ArgumentError on an empty or non-finite cloud.
PointCloud normalize_cloud(const PointCloud& cloud);

}  // namespace ba
