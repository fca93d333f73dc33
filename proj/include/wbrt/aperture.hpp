#pragma once

#include <string>
#include <vector>

#include "wbrt/geometry.hpp"
#include "wbrt/landmarks.hpp"
#include "wbrt/util.hpp"

namespace wbrt {

struct AperturePolygon {
    Polygon2D boundary;
    std::vector<std::string> names;  // one per vertex: landmark letter, or "ce" for C -> E path vertices
    ApertureConfig config;
    BevFrame frame;
    std::vector<std::string> warnings;
};

AperturePolygon build(const LandmarkSet& l, const BevFrame& frame);

// Pixel set iff its center is inside (even-odd) or on the boundary. Throws if the polygon leaves the frame.
BevSilhouette rasterize(const AperturePolygon& p, const BevFrame& frame);
// Same rule for any ring; parts outside the frame are dropped.
BevSilhouette rasterize_ring(const std::vector<Vec2>& ring, const BevFrame& frame, const std::string& label);

double area(const AperturePolygon& p);

json to_json(const AperturePolygon& p);
AperturePolygon aperture_from_json(const json& j);

// Presentation only.
std::string to_svg(const AperturePolygon& p);

}  // namespace wbrt
