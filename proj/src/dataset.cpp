#include "ba/dataset.hpp"

#include <cmath>

#include "ba/error.hpp"
#include "ba/losses.hpp"
#include "ba/rng.hpp"

namespace ba {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::RowVector3d sphere_dir(Rng& rng) {
    for (;;) {
        Eigen::RowVector3d v(rng.normal(), rng.normal(), rng.normal());
        const double n = v.norm();
        if (n > 1e-12) return v / n;
    }
}

Points sample_ellipsoid(int n, Rng& rng) {
    const double a = rng.uniform(0.55, 1.0);
    const double b = rng.uniform(0.35, 0.8);
    const double c = rng.uniform(0.55, 1.0);
    Points p(n, 3);
    for (int i = 0; i < n; ++i) {
        const Eigen::RowVector3d d = sphere_dir(rng);
        p.row(i) << a * d.x(), b * d.y(), c * d.z();
    }
    return p;
}

Points sample_box(int n, Rng& rng) {
    const double hx = rng.uniform(0.4, 1.0);
    const double hy = rng.uniform(0.4, 1.0);
    const double hz = rng.uniform(0.4, 1.0);
    const double h[3] = {hx, hy, hz};
    const double areas[3] = {hy * hz, hx * hz, hx * hy};  // +-x, +-y, +-z faces
    const double total = 2.0 * (areas[0] + areas[1] + areas[2]);
    Points p(n, 3);
    for (int i = 0; i < n; ++i) {
        double pick = rng.uniform() * total;
        int face = 5;
        for (int f = 0; f < 6; ++f) {
            if (pick < areas[f / 2]) {
                face = f;
                break;
            }
            pick -= areas[f / 2];
        }
        const int axis = face / 2;
        const double sign = face % 2 == 0 ? 1.0 : -1.0;
        Eigen::RowVector3d q;
        for (int a = 0; a < 3; ++a)
            q[a] = a == axis ? sign * h[a] : rng.uniform(-h[a], h[a]);
        p.row(i) = q;
    }
    return p;
}

// Lateral surface plus caps of a y-aligned cylinder.
Points cylinder_patch(int n, double radius, double y0, double y1, Rng& rng, bool caps) {
    const double height = y1 - y0;
    const double lateral = 2.0 * kPi * radius * height;
    const double cap = caps ? kPi * radius * radius : 0.0;
    Points p(n, 3);
    for (int i = 0; i < n; ++i) {
        const double pick = rng.uniform() * (lateral + 2.0 * cap);
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        if (pick < lateral) {
            const double y = rng.uniform(y0, y1);
            p.row(i) << radius * std::cos(phi), y, radius * std::sin(phi);
        } else {
            const double r = radius * std::sqrt(rng.uniform());
            const double y = pick < lateral + cap ? y0 : y1;
            p.row(i) << r * std::cos(phi), y, r * std::sin(phi);
        }
    }
    return p;
}

Points sample_cylinder(int n, Rng& rng) {
    const double radius = rng.uniform(0.3, 0.7);
    const double half = rng.uniform(0.5, 1.0);
    return cylinder_patch(n, radius, -half, half, rng, true);
}

// Base lobe, thin stem, and a shade lobe pushed sideways: asymmetric about
// the x = 0 plane, and the stem is sparse enough to fragment a kNN graph.
Points sample_lamp(int n, Rng& rng) {
    const double base_r = rng.uniform(0.28, 0.42);
    const double stem_r = rng.uniform(0.04, 0.07);
    const double shade_r = rng.uniform(0.22, 0.34);
    const double shade_dx = rng.uniform(0.15, 0.35);
    const double base_y = -0.85, shade_y = 0.75;

    const double base_area = 4.0 * kPi * base_r * base_r * 0.5;  // squashed half weight
    const double stem_area = 2.0 * kPi * stem_r * (shade_y - base_y);
    const double shade_area = 4.0 * kPi * shade_r * shade_r;
    const double total = base_area + stem_area + shade_area;

    Points p(n, 3);
    for (int i = 0; i < n; ++i) {
        const double pick = rng.uniform() * total;
        if (pick < base_area) {
            const Eigen::RowVector3d d = sphere_dir(rng);
            p.row(i) << base_r * d.x(), base_y + 0.35 * base_r * d.y(), base_r * d.z();
        } else if (pick < base_area + stem_area) {
            const double phi = rng.uniform(0.0, 2.0 * kPi);
            const double y = rng.uniform(base_y, shade_y);
            p.row(i) << stem_r * std::cos(phi), y, stem_r * std::sin(phi);
        } else {
            const Eigen::RowVector3d d = sphere_dir(rng);
            p.row(i) << shade_dx + shade_r * d.x(), shade_y + shade_r * d.y(),
                shade_r * d.z();
        }
    }
    return p;
}

}  // namespace

const std::vector<std::string>& synth_family_names() {
    static const std::vector<std::string> names = {"ellipsoid", "box", "cylinder", "lamp"};
    return names;
}

Dataset synth_dataset(int classes, int per_class, int points, std::uint64_t seed,
                      const std::string& split) {
    const auto& families = synth_family_names();
    if (classes < 2) throw ArgumentError("synth_dataset: need at least 2 classes");
    if (classes > static_cast<int>(families.size()))
        throw ArgumentError("synth_dataset: only " + std::to_string(families.size()) +
                            " families available");
    if (per_class < 1 || points < 1) throw ArgumentError("synth_dataset: bad counts");

    Dataset ds;
    ds.split = split;
    ds.class_names.assign(families.begin(), families.begin() + classes);
    const std::uint64_t split_tag = Rng::splitmix(std::hash<std::string>{}(split));
    for (int cls = 0; cls < classes; ++cls) {
        for (int idx = 0; idx < per_class; ++idx) {
            Rng rng(Rng::splitmix(seed ^ split_tag) ^
                    Rng::splitmix((static_cast<std::uint64_t>(cls) << 32) | idx));
            PointCloud cloud;
            switch (cls) {
                case 0: cloud.points = sample_ellipsoid(points, rng); break;
                case 1: cloud.points = sample_box(points, rng); break;
                case 2: cloud.points = sample_cylinder(points, rng); break;
                default: cloud.points = sample_lamp(points, rng); break;
            }
            cloud.points = rotate_y(cloud.points, rng.uniform(0.0, 2.0 * kPi));
            cloud.label = cls;
            cloud.id = split + "_" + families[cls] + "_" + std::to_string(idx);
            ds.items.push_back(std::move(cloud));
        }
    }
    return ds;
}

}  // namespace ba
