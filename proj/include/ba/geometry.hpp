#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "ba/point_cloud.hpp"

namespace ba {

// Symmetric weighted neighbor graph. Adjacency lists are sorted by neighbor
// index; (i,j) and (j,i) always carry the same weight.
struct NeighborGraph {
    int n = 0;
    int k = 0;
    std::vector<std::vector<std::pair<int, double>>> adj;
    // Edges inserted to reconnect components (thin structures can fragment).
    int bridges_added = 0;
};

enum class MassMode { unit, degree };

struct LaplacianPair {
    Eigen::SparseMatrix<double> laplacian;  // n x n, symmetric PSD
    Eigen::VectorXd inv_mass;               // diagonal of M^-1, strictly positive
};

struct ControlPoints {
    std::vector<int> indices;  // c distinct node indices
    Points rest;               // c x 3 rest positions (copies of the indexed points)

    int count() const { return static_cast<int>(indices.size()); }
};

// n x c weights with unit rows at the control indices and rows summing to 1.
struct BiharmonicCoords {
    Eigen::MatrixXd weights;  // n x c
    ControlPoints controls;

    std::int64_t point_count() const { return weights.rows(); }
    int control_count() const { return static_cast<int>(weights.cols()); }
};

using ControlOffsets = Points;  // c x 3 control-point displacements

// k nearest Euclidean neighbors per node, union-symmetrized, Gaussian edge
// weights exp(-d^2/sigma^2) with sigma the mean kNN distance. Disconnected
// results are repaired by adding the shortest inter-component edge per merge.
NeighborGraph knn_graph(const PointCloud& cloud, int k);

// L = D - A over the edge weights; inv_mass is ones (unit) or 1/degree.
LaplacianPair graph_laplacian(const NeighborGraph& graph, MassMode mass);

// Greedy farthest-point selection, first index drawn uniformly from the
// seeded stream, ties to the lowest index.
ControlPoints farthest_point_sample(const PointCloud& cloud, int c, std::uint64_t seed);

// Minimize tr(W^T K W), K = L M^-1 L, subject to W[indices,:] = I, via a
// single sparse SPD factorization shared across all c right-hand sides.
BiharmonicCoords compute_biharmonic_coords(const LaplacianPair& lap,
                                           const ControlPoints& controls);

// f(O) = W (C0 + O)
Points deform(const BiharmonicCoords& bc, const ControlOffsets& offsets);

// g(a) = W (C0 + sum_i a_i M_i); prototypes flattened as (m, c*3) rows.
Points blend_deform(const BiharmonicCoords& bc, const Eigen::MatrixXd& prototypes,
                    const Eigen::VectorXd& coefficients);

// Rest-pose reconstruction W C0.
Points reconstruct(const BiharmonicCoords& bc);

}  // namespace ba
