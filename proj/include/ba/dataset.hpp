#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ba/point_cloud.hpp"

namespace ba {

struct Dataset {
    std::vector<PointCloud> items;
    std::vector<std::string> class_names;
    std::string split;  // "train" or "test"

    std::size_t size() const { return items.size(); }
    int class_count() const { return static_cast<int>(class_names.size()); }
};

// Parametric surface families: ellipsoid, box, cylinder, lamp (two lobes on
// a thin stem, shade offset sideways so the class is not mirror-symmetric).
// Each sample gets random aspect ratios and a random rotation about the
// up-axis (y). Deterministic given the seed.
Dataset synth_dataset(int classes, int per_class, int points, std::uint64_t seed,
                      const std::string& split = "train");

const std::vector<std::string>& synth_family_names();

}  // namespace ba
