#pragma once

#include <cstdint>
#include <vector>

#include "wbrt/geometry.hpp"

namespace wbrt {

// Squared Euclidean distance (in pixel units) from every pixel center to the nearest
// pixel with feature != 0. Pixels with no feature anywhere get a very large value.
std::vector<double> distance_sq(const std::vector<std::uint8_t>& feature, int cols, int rows);

// Euclidean disk of radius mm. Pixels outside the frame count as unset.
BevSilhouette dilate(const BevSilhouette& s, double radius_mm);
BevSilhouette erode(const BevSilhouette& s, double radius_mm);
BevSilhouette close(const BevSilhouette& s, double radius_mm);

struct Components {
    std::vector<int> label;         // -1 for background, else component id
    std::vector<std::size_t> sizes; // pixel count per component, ids in scan order
};

// 8-connected components.
Components components(const BevSilhouette& s);

// The k largest 8-connected components (ties go to the one found first in scan order),
// returned as separate silhouettes in size order.
std::vector<BevSilhouette> largest_components(const BevSilhouette& s, std::size_t k);

}  // namespace wbrt
