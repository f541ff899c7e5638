#include "ba/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include <Eigen/SparseCholesky>

#include "ba/error.hpp"
#include "ba/rng.hpp"

namespace ba {

namespace {

struct UnionFind {
    std::vector<int> parent;

    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[b] = a;
        return true;
    }
};

void add_edge(NeighborGraph& g, int i, int j, double w) {
    auto insert = [](std::vector<std::pair<int, double>>& row, int idx, double weight) {
        auto it = std::lower_bound(row.begin(), row.end(), idx,
                                   [](const auto& e, int v) { return e.first < v; });
        if (it != row.end() && it->first == idx) return;
        row.insert(it, {idx, weight});
    };
    insert(g.adj[i], j, w);
    insert(g.adj[j], i, w);
}

}  // namespace

NeighborGraph knn_graph(const PointCloud& cloud, int k) {
    const int n = static_cast<int>(cloud.points.rows());
    if (k < 1 || k >= n) throw ArgumentError("knn_graph: need 1 <= k < n");

    NeighborGraph g;
    g.n = n;
    g.k = k;
    g.adj.resize(n);

    // Brute-force kNN; desk scale keeps n small enough that a spatial index
    // is not worth its complexity here.
    std::vector<std::vector<std::pair<double, int>>> nearest(n);
    double sigma_acc = 0.0;
    std::vector<std::pair<double, int>> cand;
    for (int i = 0; i < n; ++i) {
        cand.clear();
        cand.reserve(n - 1);
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            cand.emplace_back((cloud.points.row(i) - cloud.points.row(j)).squaredNorm(), j);
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        nearest[i].assign(cand.begin(), cand.begin() + k);
        for (int t = 0; t < k; ++t) sigma_acc += std::sqrt(nearest[i][t].first);
    }
    const double sigma = sigma_acc / (static_cast<double>(n) * k);
    const double sigma2 = sigma > 0.0 ? sigma * sigma : 1.0;

    UnionFind uf(n);
    for (int i = 0; i < n; ++i)
        for (const auto& [d2, j] : nearest[i]) {
            add_edge(g, i, j, std::exp(-d2 / sigma2));
            uf.unite(i, j);
        }

    // Reconnect fragments: per merge, the globally shortest edge between
    // any two distinct components.
    for (;;) {
        int root0 = uf.find(0);
        bool connected = true;
        for (int i = 1; i < n; ++i)
            if (uf.find(i) != root0) {
                connected = false;
                break;
            }
        if (connected) break;
        double best = std::numeric_limits<double>::infinity();
        int bi = -1, bj = -1;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                if (uf.find(i) == uf.find(j)) continue;
                const double d2 = (cloud.points.row(i) - cloud.points.row(j)).squaredNorm();
                if (d2 < best) {
                    best = d2;
                    bi = i;
                    bj = j;
                }
            }
        add_edge(g, bi, bj, std::exp(-best / sigma2));
        uf.unite(bi, bj);
        g.bridges_added += 1;
    }
    return g;
}

LaplacianPair graph_laplacian(const NeighborGraph& graph, MassMode mass) {
    const int n = graph.n;
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd degree = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        for (const auto& [j, w] : graph.adj[i]) {
            trip.emplace_back(i, j, -w);
            degree[i] += w;
        }
        if (degree[i] <= 0.0)
            throw ArgumentError("graph_laplacian: node " + std::to_string(i) + " has no edges");
        trip.emplace_back(i, i, degree[i]);
    }
    LaplacianPair lap;
    lap.laplacian.resize(n, n);
    lap.laplacian.setFromTriplets(trip.begin(), trip.end());
    lap.inv_mass = mass == MassMode::unit ? Eigen::VectorXd::Ones(n)
                                          : degree.cwiseInverse().eval();
    return lap;
}

ControlPoints farthest_point_sample(const PointCloud& cloud, int c, std::uint64_t seed) {
    const int n = static_cast<int>(cloud.points.rows());
    if (c < 2 || c > n) throw ArgumentError("farthest_point_sample: need 2 <= c <= n");
    Rng rng(seed);
    std::vector<int> chosen;
    chosen.reserve(c);
    chosen.push_back(static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n))));
    Eigen::VectorXd min_d2 =
        (cloud.points.rowwise() - cloud.points.row(chosen[0])).rowwise().squaredNorm();
    while (static_cast<int>(chosen.size()) < c) {
        int best = 0;
        double best_d2 = -1.0;
        for (int i = 0; i < n; ++i)
            if (min_d2[i] > best_d2) {
                best_d2 = min_d2[i];
                best = i;
            }
        chosen.push_back(best);
        min_d2 = min_d2.cwiseMin(
            (cloud.points.rowwise() - cloud.points.row(best)).rowwise().squaredNorm());
    }
    ControlPoints cp;
    cp.indices = std::move(chosen);
    cp.rest.resize(c, 3);
    for (int j = 0; j < c; ++j) cp.rest.row(j) = cloud.points.row(cp.indices[j]);
    return cp;
}

BiharmonicCoords compute_biharmonic_coords(const LaplacianPair& lap,
                                           const ControlPoints& controls) {
    const int n = static_cast<int>(lap.laplacian.rows());
    const int c = controls.count();
    if (c < 2) throw ArgumentError("biharmonic: need at least 2 control points");
    std::vector<char> is_control(n, 0);
    for (int idx : controls.indices) {
        if (idx < 0 || idx >= n) throw ArgumentError("biharmonic: control index out of range");
        if (is_control[idx]) throw ArgumentError("biharmonic: duplicate control index");
        is_control[idx] = 1;
    }

    // Every free node must reach a control point through the graph, else the
    // constrained system is singular. BFS over the Laplacian pattern.
    {
        std::vector<char> reached(n, 0);
        std::queue<int> q;
        for (int idx : controls.indices) {
            reached[idx] = 1;
            q.push(idx);
        }
        while (!q.empty()) {
            const int i = q.front();
            q.pop();
            for (Eigen::SparseMatrix<double>::InnerIterator it(lap.laplacian, i); it; ++it) {
                const int j = static_cast<int>(it.row());
                if (!reached[j]) {
                    reached[j] = 1;
                    q.push(j);
                }
            }
        }
        int orphan = -1, orphan_count = 0;
        for (int i = 0; i < n; ++i)
            if (!reached[i]) {
                if (orphan < 0) orphan = i;
                ++orphan_count;
            }
        if (orphan_count > 0)
            throw SolverError("biharmonic: component of " + std::to_string(orphan_count) +
                              " nodes (e.g. node " + std::to_string(orphan) +
                              ") is disconnected from every control point");
    }

    const Eigen::SparseMatrix<double> k_full =
        lap.laplacian * lap.inv_mass.asDiagonal() * lap.laplacian;

    std::vector<int> free_of(n, -1), ctrl_of(n, -1);
    std::vector<int> free_nodes;
    free_nodes.reserve(n - c);
    for (int i = 0; i < n; ++i)
        if (!is_control[i]) {
            free_of[i] = static_cast<int>(free_nodes.size());
            free_nodes.push_back(i);
        }
    for (int j = 0; j < c; ++j) ctrl_of[controls.indices[j]] = j;

    const int nf = static_cast<int>(free_nodes.size());
    BiharmonicCoords bc;
    bc.controls = controls;
    bc.weights = Eigen::MatrixXd::Zero(n, c);
    for (int j = 0; j < c; ++j) bc.weights(controls.indices[j], j) = 1.0;
    if (nf > 0) {
        std::vector<Eigen::Triplet<double>> tff;
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nf, c);
        for (int col = 0; col < k_full.outerSize(); ++col)
            for (Eigen::SparseMatrix<double>::InnerIterator it(k_full, col); it; ++it) {
                const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
                if (free_of[i] < 0) continue;
                if (free_of[j] >= 0)
                    tff.emplace_back(free_of[i], free_of[j], it.value());
                else
                    rhs(free_of[i], ctrl_of[j]) -= it.value();
            }
        Eigen::SparseMatrix<double> kff(nf, nf);
        kff.setFromTriplets(tff.begin(), tff.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
        solver.compute(kff);
        if (solver.info() != Eigen::Success)
            throw SolverError("biharmonic: factorization of the free block failed");
        const Eigen::MatrixXd wf = solver.solve(rhs);
        if (solver.info() != Eigen::Success || !wf.allFinite())
            throw SolverError("biharmonic: solve failed");
        for (int r = 0; r < nf; ++r) bc.weights.row(free_nodes[r]) = wf.row(r);
    }

    const Eigen::VectorXd row_sums = bc.weights.rowwise().sum();
    if ((row_sums.array() - 1.0).abs().maxCoeff() > 1e-8)
        throw NumericError("biharmonic: rows do not sum to 1 (max deviation " +
                           std::to_string((row_sums.array() - 1.0).abs().maxCoeff()) + ")");
    return bc;
}

Points deform(const BiharmonicCoords& bc, const ControlOffsets& offsets) {
    if (offsets.rows() != bc.control_count())
        throw ArgumentError("deform: offsets rows " + std::to_string(offsets.rows()) +
                            " != control count " + std::to_string(bc.control_count()));
    return bc.weights * (bc.controls.rest + offsets);
}

Points blend_deform(const BiharmonicCoords& bc, const Eigen::MatrixXd& prototypes,
                    const Eigen::VectorXd& coefficients) {
    if (prototypes.rows() != coefficients.size())
        throw ArgumentError("blend_deform: prototype count " + std::to_string(prototypes.rows()) +
                            " != coefficient length " + std::to_string(coefficients.size()));
    const int c = bc.control_count();
    if (prototypes.cols() != 3 * c)
        throw ArgumentError("blend_deform: prototype width != 3c");
    const Eigen::VectorXd flat = prototypes.transpose() * coefficients;
    const ControlOffsets offsets =
        Eigen::Map<const Points>(flat.data(), c, 3);
    return deform(bc, offsets);
}

Points reconstruct(const BiharmonicCoords& bc) { return bc.weights * bc.controls.rest; }

}  // namespace ba
