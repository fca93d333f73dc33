#pragma once

#include <vector>

#include "wbrt/geometry.hpp"

namespace wbrt {

// Iso-contours at occupancy 0.5 over pixel centers (marching squares). Every returned
// polyline is closed and oriented with the set region on its left: outer boundaries
// have positive signed area, holes negative. Diagonal pixel pairs count as connected.
std::vector<Polyline2D> extract_contour(const BevSilhouette& mask);

}  // namespace wbrt
